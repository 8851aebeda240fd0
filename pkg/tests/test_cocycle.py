"""Tests for the twisted-shift cocycle, transport, diagonalizer, and the
invariance-defect harness."""

import math

import numpy as np
import pytest

from invmasa import (
    PiecewiseMatrixField,
    ReflectionParams,
    RotationConfig,
    apply_twisted_shift,
    conjugate_step,
    constant_projection_field,
    diagonalizer,
    first_return,
    hermitian_eig,
    identity_twist,
    interval_action,
    interval_index,
    invariance_defect,
    is_unitary,
    matrix_sign_profile,
    max_norm,
    orbit,
    propagate_constraint,
    random_projection_field,
    resolve_sign,
    validate_projection_field,
)
from invmasa.errors import InvalidCandidate, MissingSample

A = math.sqrt(2.0) / 8.0
E11 = np.diag([1.0, 0.0]).astype(complex)


def standard(config):
    from invmasa import standard_twist

    return standard_twist(config)


def random_reflection(rng, allow_zero=True):
    def comp():
        if allow_zero and rng.random() < 0.25:
            return 0.0
        return float(rng.uniform(0.1, 2.0) * (1.0 if rng.random() < 0.5 else -1.0))

    d = comp()
    kind = rng.integers(0, 3)
    if kind == 0:
        ang = float(rng.uniform(0.15, math.pi / 2 - 0.15) + rng.integers(0, 4) * math.pi / 2)
        theta = complex(math.cos(ang), math.sin(ang))
    elif kind == 1:
        theta = 1j if rng.random() < 0.5 else -1j
    else:
        theta = 1.0 + 0j if rng.random() < 0.5 else -1.0 + 0j
    return ReflectionParams(d=d, e=float(rng.uniform(0.1, 2.0)), theta=theta)


class TestPiecewiseField:
    def test_lookup_with_wrap(self):
        field = PiecewiseMatrixField(
            breakpoints=(0.25, 0.75),
            values=(np.eye(2, dtype=complex), 2 * np.eye(2, dtype=complex)),
        )
        assert field.value_at(0.3)[0, 0] == 1.0
        assert field.value_at(0.8)[0, 0] == 2.0
        assert field.value_at(0.1)[0, 0] == 2.0  # wrap interval [0.75, 1) u [0, 0.25)
        batch = field.values_at([0.3, 0.8, 0.1])
        assert batch[0, 0, 0] == 1.0 and batch[1, 0, 0] == 2.0 and batch[2, 0, 0] == 2.0

    def test_validation(self):
        with pytest.raises(ValueError):
            PiecewiseMatrixField(breakpoints=(0.5, 0.5), values=(np.eye(2), np.eye(2)))
        with pytest.raises(ValueError):
            PiecewiseMatrixField(breakpoints=(1.5,), values=(np.eye(2),))


class TestStandardTwist:
    def test_piece_values(self):
        cfg = RotationConfig(A)
        field = standard(cfg)
        s = 1.0 / math.sqrt(2.0)
        assert np.allclose(field.value_at(0.0), s * np.array([[1, -1], [1, 1]]))
        assert np.allclose(
            field.value_at(2.0 * cfg.a), s * np.array([[-1, -1], [-1j, 1j]])
        )
        inside_j3 = 4.0 * cfg.a + 0.01 * (1.0 - 4.0 * cfg.a)
        assert np.array_equal(field.value_at(inside_j3), np.eye(2))

    def test_pieces_unitary(self):
        cfg = RotationConfig(A)
        for v in standard(cfg).values:
            # direct product oracle, tighter than the library default
            assert max_norm(v.conj().T @ v - np.eye(2)) <= 1e-12
            assert is_unitary(v)


class TestApplyTwistedShift:
    def test_identity_twist_is_plain_shift(self):
        cfg = RotationConfig(A)
        pts = orbit(0.1, cfg, 6)
        rng = np.random.default_rng(0)
        f = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
        out = apply_twisted_shift(f, pts, cfg, identity_twist())
        assert np.array_equal(out, f[1:])

    def test_delta_moves_to_preimage(self):
        cfg = RotationConfig(A)
        pts = orbit(0.1, cfg, 5)
        f = np.zeros((5, 2), dtype=complex)
        f[3] = (1.0, 2.0)
        out = apply_twisted_shift(f, pts, cfg, standard(cfg))
        nonzero = [k for k in range(4) if np.any(out[k] != 0)]
        assert nonzero == [2]

    def test_norm_preserved_off_the_unsampled_end(self):
        cfg = RotationConfig(A)
        pts = orbit(0.37, cfg, 1000)
        rng = np.random.default_rng(1)
        f = rng.standard_normal((1000, 2)) + 1j * rng.standard_normal((1000, 2))
        f[0] = 0.0  # the first point has no sampled preimage
        out = apply_twisted_shift(f, pts, cfg, standard(cfg))
        assert abs(np.linalg.norm(out) - np.linalg.norm(f)) <= 1e-10 * np.linalg.norm(f)

    def test_missing_sample(self):
        cfg = RotationConfig(A)
        with pytest.raises(MissingSample):
            apply_twisted_shift(np.zeros((1, 2)), [0.0], cfg, identity_twist())
        with pytest.raises(MissingSample):
            apply_twisted_shift(np.zeros((3, 2)), [0.0, 0.1], cfg, identity_twist())


class TestReflectionParams:
    def test_matrix_shape_and_roundtrip(self):
        p = ReflectionParams(d=0.3, e=0.8, theta=complex(math.cos(1.1), math.sin(1.1)))
        m = p.matrix()
        assert max_norm(m - m.conj().T) == 0.0
        assert abs(np.trace(m)) == 0.0
        back = ReflectionParams.from_matrix(m)
        assert abs(back.d - p.d) <= 1e-15
        assert abs(back.e - p.e) <= 1e-15
        assert abs(back.theta - p.theta) <= 1e-15

    def test_validation(self):
        with pytest.raises(ValueError):
            ReflectionParams(d=0.0, e=-1.0, theta=1.0 + 0j)
        with pytest.raises(ValueError):
            ReflectionParams(d=0.0, e=1.0, theta=2.0 + 0j)


class TestConjugateStep:
    def test_identity_on_third_interval(self):
        cfg = RotationConfig(A)
        field = standard(cfg)
        p = ReflectionParams(d=1.0, e=1.0, theta=1.0 + 0j)
        t = 4.0 * cfg.a + 0.5 * (1.0 - 4.0 * cfg.a)
        out = conjugate_step(p, t, cfg, field)
        assert np.array_equal(out, p.matrix())

    def test_first_interval_against_direct_product(self):
        cfg = RotationConfig(A)
        field = standard(cfg)
        p = ReflectionParams(d=1.0, e=1.0, theta=1.0 + 0j)
        s = p.matrix()
        assert np.allclose(s, np.array([[1.0, 1.0], [1.0, -1.0]]))
        v1 = field.value_at(0.0)
        expected = v1.conj().T @ s @ v1
        out = conjugate_step(p, 0.0, cfg, field)
        assert max_norm(out - expected) == 0.0

    def test_sign_transport_law(self):
        cfg = RotationConfig(A)
        field = standard(cfg)
        rng = np.random.default_rng(2)
        sample_points = (0.31 * cfg.a, 2.2 * cfg.a, 4.0 * cfg.a + 0.4 * (1 - 4 * cfg.a))
        for _ in range(2000):
            p = random_reflection(rng)
            for t in sample_points:
                j = interval_index(t, cfg)
                out = conjugate_step(p, t, cfg, field)
                assert matrix_sign_profile(out) == interval_action(
                    j, matrix_sign_profile(p.matrix())
                )

    def test_resolved_e_stays_nonnegative(self):
        cfg = RotationConfig(A)
        field = standard(cfg)
        rng = np.random.default_rng(3)
        for _ in range(500):
            p = random_reflection(rng)
            t = float(rng.uniform(0.0, 1.0))
            _, resolved = resolve_sign(conjugate_step(p, t, cfg, field))
            assert resolved.e >= 0.0


class TestDiagonalizer:
    def test_offdiagonal_example(self):
        b = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        res = diagonalizer(b)
        s = 1.0 / math.sqrt(2.0)
        assert np.allclose(res.t, s * np.array([[1.0, 1.0], [-1.0, 1.0]]))
        # direct multiplication oracle
        assert max_norm(res.t @ b @ res.t.conj().T - np.diag([1.0, -1.0])) <= 1e-15

    def test_diagonal_branch(self):
        res = diagonalizer(np.diag([5.0, 1.0]).astype(complex))
        assert np.array_equal(res.t, np.eye(2))
        assert np.array_equal(res.p, E11)

    def test_zero_matrix(self):
        res = diagonalizer(np.zeros((2, 2)))
        assert np.array_equal(res.t, np.eye(2))
        assert np.array_equal(res.p, E11)

    def test_random_selfadjoint_inputs(self):
        rng = np.random.default_rng(4)
        for _ in range(500):
            z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            b = (z + z.conj().T) / 2.0
            res = diagonalizer(b)
            assert is_unitary(res.t)
            p = res.p
            assert max_norm(p @ p - p) <= 1e-10
            assert max_norm(p - p.conj().T) <= 1e-10
            assert abs(np.trace(p).real - 1.0) <= 1e-10
            traceless = b - (np.trace(b).real / 2.0) * np.eye(2)
            scale = math.hypot(traceless[0, 0].real, abs(traceless[1, 0]))
            if scale > 1e-12 and abs(traceless[1, 0]) > 1e-12:
                b0 = traceless / scale
                assert max_norm(res.t @ b0 @ res.t.conj().T - np.diag([1.0, -1.0])) <= 1e-10
                # rows of T agree with the eigenvectors up to phase
                vals, q = hermitian_eig(b0)
                assert np.allclose(vals, [-1.0, 1.0], atol=1e-10)
                plus = q[:, 1]
                overlap = abs(np.vdot(np.conj(res.t[0, :]), plus))
                assert abs(overlap - 1.0) <= 1e-9


class TestInvarianceDefect:
    def test_control_has_no_false_obstruction(self):
        cfg = RotationConfig(A)
        report = invariance_defect(
            constant_projection_field(E11), cfg, identity_twist(), 0.0, 2000
        )
        assert report.max_defect <= 1e-12

    def test_constant_diagonal_defect_is_two(self):
        cfg = RotationConfig(A)
        field = standard(cfg)
        # hand oracle on the first interval: conjugating diag(1,-1) gives
        # the off-diagonal matrix [[0,-1],[-1,0]], at Frobenius distance 2
        # from +/- diag(1,-1)
        s = np.diag([1.0, -1.0]).astype(complex)
        v1 = field.value_at(0.0)
        moved = v1.conj().T @ s @ v1
        assert np.allclose(moved, np.array([[0.0, -1.0], [-1.0, 0.0]]))
        assert abs(np.linalg.norm(s - moved) - 2.0) <= 1e-15
        assert abs(np.linalg.norm(s + moved) - 2.0) <= 1e-15
        report = invariance_defect(constant_projection_field(E11), cfg, field, 0.0, 5000)
        assert abs(report.max_defect - 2.0) <= 1e-9

    def test_interval_stats_cover_all_steps(self):
        cfg = RotationConfig(A)
        report = invariance_defect(
            constant_projection_field(E11), cfg, standard(cfg), 0.0, 999
        )
        assert sum(s.count for s in report.per_interval.values()) == 999

    def test_rejects_invalid_candidate(self):
        cfg = RotationConfig(A)
        bad = PiecewiseMatrixField(
            breakpoints=(0.0,), values=(np.diag([1.0, 1.0]).astype(complex),)
        )
        with pytest.raises(InvalidCandidate):
            invariance_defect(bad, cfg, standard(cfg), 0.0, 10)

    def test_random_candidates_are_valid_fields(self):
        for seed in range(10):
            field = random_projection_field(seed, 16)
            validate_projection_field(field)


class TestPropagation:
    def test_constant_on_third_interval(self):
        cfg = RotationConfig(A)
        start = ReflectionParams(d=0.4, e=0.6, theta=1j)
        t0 = 4.0 * cfg.a + 0.01
        result = propagate_constraint(start, t0, cfg, standard(cfg), 1)
        assert result.parameters[1] == start

    def test_diagonal_start_leaves_the_boundary(self):
        cfg = RotationConfig(A)
        start = ReflectionParams(d=1.0, e=0.0, theta=1.0 + 0j)
        result = propagate_constraint(start, 0.0, cfg, standard(cfg), 1)
        assert result.parameters[1].e > 0.01

    def test_full_return_loop_acts_like_interval_one(self):
        cfg = RotationConfig(A)
        field = standard(cfg)
        rng = np.random.default_rng(5)
        for _ in range(50):
            start = random_reflection(rng, allow_zero=False)
            t0 = float(rng.uniform(0.0, cfg.a))
            loop = first_return(t0, cfg)
            result = propagate_constraint(start, t0, cfg, field, loop.steps)
            assert result.classes[-1] == interval_action(1, result.classes[0])

    def test_long_run_agrees_with_automaton(self):
        cfg = RotationConfig(A)
        start = ReflectionParams(d=0.3, e=0.7, theta=complex(math.cos(0.4), math.sin(0.4)))
        result = propagate_constraint(start, 0.02, cfg, standard(cfg), 2000)
        assert result.agreement
        assert result.boundary_steps == ()
        assert all(p.e >= 0.0 for p in result.parameters)
