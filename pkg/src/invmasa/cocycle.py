"""Piecewise-constant 2x2 unitary twists over a circle rotation.

This module carries the dynamical side of the library: a field of 2x2
unitaries V(t) on the circle defines a twisted shift (rotate by a, then
multiply by V pointwise).  Conjugating a traceless self-adjoint matrix
field S(t) = 2P(t) - I by the twist transports sign patterns of its
parameters exactly along the interval automaton of :mod:`invmasa.signs`.

The invariance-defect harness measures how badly a candidate rank-one
projection field violates the transport constraint

    S(t + a) = +/- V(t)* S(t) V(t)

along an orbit.  A nonzero defect falsifies the candidate; the harness is
a falsifier for concrete candidates, not a nonexistence proof (see the
project README).
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .circle import RotationConfig, interval_indices, orbit
from .errors import InvalidCandidate, MissingSample
from .numerics import DEFAULT_TOL, as_matrix, max_norm
from .signs import SignClass, interval_action, sign_profile

__all__ = [
    "SIGN_ZERO_TOL",
    "PROJECTION_TOL",
    "PiecewiseMatrixField",
    "standard_twist",
    "identity_twist",
    "constant_projection_field",
    "random_projection_field",
    "validate_projection_field",
    "ReflectionParams",
    "apply_twisted_shift",
    "conjugate_step",
    "resolve_sign",
    "matrix_sign_profile",
    "DiagonalizerResult",
    "diagonalizer",
    "DefectReport",
    "IntervalDefect",
    "invariance_defect",
    "PropagationResult",
    "propagate_constraint",
]

# Dead zone for signum on computed (propagated) values; analytic inputs
# keep the exact-zero semantics of signs.sign_profile.
SIGN_ZERO_TOL = 1e-10
# Tolerance for the rank-one projection invariants of candidate fields.
PROJECTION_TOL = 1e-10
# Off-diagonal magnitude below which a parameterised matrix counts as
# sitting on the diagonal boundary.
DIAGONAL_BOUNDARY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PiecewiseMatrixField:
    """Piecewise-constant field of 2x2 matrices on the circle.

    ``breakpoints`` are strictly increasing values in [0,1); piece ``i``
    covers [breakpoints[i], breakpoints[i+1]) and the last piece wraps
    around through 1 back to breakpoints[0].
    """

    breakpoints: tuple[float, ...]
    values: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        bps = tuple(float(b) for b in self.breakpoints)
        if not bps:
            raise ValueError("field needs at least one breakpoint")
        if any(not (0.0 <= b < 1.0) for b in bps):
            raise ValueError("breakpoints must lie in [0, 1)")
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if len(self.values) != len(bps):
            raise ValueError("one matrix per piece required")
        vals = []
        for v in self.values:
            m = as_matrix(v)
            if m.shape != (2, 2):
                raise ValueError("field values must be 2x2")
            m = m.copy()
            m.setflags(write=False)
            vals.append(m)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", tuple(vals))

    @property
    def pieces(self) -> int:
        return len(self.breakpoints)

    def piece_index(self, t: float) -> int:
        i = bisect.bisect_right(self.breakpoints, t) - 1
        if i < 0:
            i = len(self.breakpoints) - 1
        return i

    def value_at(self, t: float) -> np.ndarray:
        return self.values[self.piece_index(t)]

    def values_at(self, points) -> np.ndarray:
        """Stacked values at an array of points, shape (len(points), 2, 2)."""
        ts = np.asarray(points, dtype=float)
        idx = np.searchsorted(self.breakpoints, ts, side="right") - 1
        idx[idx < 0] = len(self.breakpoints) - 1
        return np.stack(self.values)[idx]


def standard_twist(config: RotationConfig) -> PiecewiseMatrixField:
    """The three-piece unitary twist driving the falsification harness.

    On [0,a) it is the real rotation by 45 degrees, on [a,4a) a unitary
    mixing the components through the imaginary axis, and on [4a,1) the
    identity.
    """
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    v1 = inv_sqrt2 * np.array([[1.0, -1.0], [1.0, 1.0]], dtype=complex)
    v2 = inv_sqrt2 * np.array([[-1.0, -1.0], [-1.0j, 1.0j]], dtype=complex)
    v3 = np.eye(2, dtype=complex)
    return PiecewiseMatrixField(
        breakpoints=(0.0, config.a, 4.0 * config.a),
        values=(v1, v2, v3),
    )


def identity_twist() -> PiecewiseMatrixField:
    """Control twist: identity everywhere (plain untwisted shift)."""
    return PiecewiseMatrixField(breakpoints=(0.0,), values=(np.eye(2, dtype=complex),))


def constant_projection_field(p) -> PiecewiseMatrixField:
    return PiecewiseMatrixField(breakpoints=(0.0,), values=(as_matrix(p),))


def random_projection_field(seed: int, max_pieces: int = 64) -> PiecewiseMatrixField:
    """Random piecewise-constant field of rank-one projections."""
    rng = np.random.default_rng(seed)
    pieces = int(rng.integers(1, max_pieces + 1))
    while True:
        bps = np.sort(rng.uniform(0.0, 1.0, size=pieces))
        if pieces == 1 or np.min(np.diff(bps)) > 1e-12:
            break
    values = []
    for _ in range(pieces):
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        z /= np.linalg.norm(z)
        values.append(np.outer(z, z.conj()))
    return PiecewiseMatrixField(breakpoints=tuple(bps), values=tuple(values))


def validate_projection_field(field: PiecewiseMatrixField, tol: float = PROJECTION_TOL) -> None:
    """Check the rank-one projection invariants of every piece."""
    for i, p in enumerate(field.values):
        if max_norm(p @ p - p) > tol or max_norm(p - p.conj().T) > tol:
            raise InvalidCandidate(f"piece {i} is not a projection within {tol:g}")
        if abs(np.trace(p) - 1.0) > tol:
            raise InvalidCandidate(f"piece {i} does not have unit trace (rank one)")


@dataclass(frozen=True)
class ReflectionParams:
    """Parameters (d, e, theta) of a traceless self-adjoint 2x2 matrix

        [[d, conj(theta) e], [theta e, -d]]

    with e >= 0 and theta unimodular.  For e > 0 the parameterisation is
    unique; e == 0 marks the diagonal boundary, where theta is fixed at 1
    by convention.
    """

    d: float
    e: float
    theta: complex

    def __post_init__(self) -> None:
        if not (math.isfinite(self.d) and math.isfinite(self.e)):
            raise ValueError("parameters must be finite")
        if self.e < 0.0:
            raise ValueError("e must be nonnegative")
        if abs(abs(self.theta) - 1.0) > 1e-12:
            raise ValueError("theta must be unimodular")

    @property
    def c(self) -> float:
        return self.theta.real

    @property
    def s(self) -> float:
        return self.theta.imag

    def matrix(self) -> np.ndarray:
        off = self.theta * self.e
        return np.array([[self.d, np.conj(off)], [off, -self.d]], dtype=complex)

    def sign_class(self, zero_tol: float = 0.0) -> SignClass:
        return sign_profile(self.d, self.c * self.e, self.s * self.e, zero_tol)

    @classmethod
    def from_matrix(cls, m, hermitian_tol: float = 1e-9) -> "ReflectionParams":
        m = as_matrix(m)
        if m.shape != (2, 2):
            raise ValueError("expected a 2x2 matrix")
        if max_norm(m - m.conj().T) > hermitian_tol:
            raise ValueError("matrix is not self-adjoint")
        if abs(np.trace(m)) > hermitian_tol:
            raise ValueError("matrix is not traceless")
        d = float(m[0, 0].real)
        off = complex(m[1, 0])
        e = abs(off)
        theta = off / e if e > DIAGONAL_BOUNDARY_TOL else 1.0 + 0.0j
        return cls(d=d, e=e, theta=theta)


def matrix_sign_profile(m, zero_tol: float = SIGN_ZERO_TOL) -> SignClass:
    """Sign class of a traceless self-adjoint 2x2 matrix.

    Reads (d, c e, s e) straight off the entries, so it stays meaningful on
    the diagonal boundary e == 0 where theta itself is undefined.
    """
    m = np.asarray(m, dtype=complex)
    return sign_profile(m[0, 0].real, m[1, 0].real, m[1, 0].imag, zero_tol)


def apply_twisted_shift(samples, orbit_points, config: RotationConfig, field: PiecewiseMatrixField) -> np.ndarray:
    """Twisted shift on orbit samples: out[k] = V(t_k) @ f(t_{k+1}).

    ``samples[k]`` is the value of a C^2-valued function at orbit point
    ``orbit_points[k]``; the result is defined at the first len - 1 orbit
    points, because the shifted value at the last point was never sampled.
    Pointwise the twist is unitary, so the transform preserves the length
    of any sample vector supported away from the unsampled end.
    """
    pts = np.asarray(orbit_points, dtype=float)
    f = np.asarray(samples, dtype=complex)
    if f.shape != (pts.size, 2):
        raise MissingSample(f"expected {pts.size} two-component samples, got shape {f.shape}")
    if pts.size < 2:
        raise MissingSample("need at least two orbit points to shift samples")
    v = field.values_at(pts[:-1])
    return np.einsum("kij,kj->ki", v, f[1:])


def conjugate_step(params: ReflectionParams, t: float, config: RotationConfig, field: PiecewiseMatrixField) -> np.ndarray:
    """Forced value of S(t + a) up to a global sign: V(t)* S(t) V(t).

    The caller resolves the sign; :func:`resolve_sign` applies the
    deterministic convention used by the propagation harness.
    """
    v = field.value_at(t)
    return v.conj().T @ params.matrix() @ v


def resolve_sign(m, zero_tol: float = DIAGONAL_BOUNDARY_TOL) -> tuple[int, ReflectionParams]:
    """Deterministic sign resolution for a matrix defined up to +/-.

    The off-diagonal modulus is sign-blind, so e >= 0 holds either way and
    the + branch is kept; on the diagonal boundary (e below ``zero_tol``)
    the sign making d nonnegative is chosen instead.
    """
    m = np.asarray(m, dtype=complex)
    d = float(m[0, 0].real)
    off = complex(m[1, 0])
    e = abs(off)
    if e > zero_tol:
        sign = 1
        theta = off / e
    else:
        sign = 1 if d >= 0.0 else -1
        theta = 1.0 + 0.0j
    return sign, ReflectionParams(d=sign * d, e=e, theta=sign * theta if e > zero_tol else 1.0 + 0.0j)


@dataclass(frozen=True)
class DiagonalizerResult:
    t: np.ndarray
    p: np.ndarray


def diagonalizer(b) -> DiagonalizerResult:
    """Explicit unitary frame and rank-one spectral projection of a
    self-adjoint 2x2 matrix.

    The trace is removed internally; with the traceless part written as
    [[alpha, conj(xi) beta], [xi beta, -alpha]] (beta > 0, |xi| = 1) and
    x = alpha / hypot(alpha, beta), the frame

        T = 1/sqrt(2) [[sqrt(1+x), conj(xi) sqrt(1-x)],
                       [-sqrt(1-x), conj(xi) sqrt(1+x)]]

    satisfies T B0 T* = diag(1, -1) for the normalised traceless part B0.
    On (numerically) diagonal input, T is the identity.  P = T* E11 T is
    always a rank-one projection.
    """
    b = as_matrix(b)
    if b.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    if max_norm(b - b.conj().T) > DEFAULT_TOL.eps_eq:
        raise ValueError("matrix is not self-adjoint")
    traceless = b - (np.trace(b).real / 2.0) * np.eye(2)
    beta = abs(traceless[1, 0])
    e11 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    if beta <= 1e-14:
        t = np.eye(2, dtype=complex)
        return DiagonalizerResult(t=t, p=e11.copy())
    alpha = float(traceless[0, 0].real)
    xi = traceless[1, 0] / beta
    x = alpha / math.hypot(alpha, beta)
    t = (1.0 / math.sqrt(2.0)) * np.array(
        [
            [math.sqrt(1.0 + x), np.conj(xi) * math.sqrt(1.0 - x)],
            [-math.sqrt(1.0 - x), np.conj(xi) * math.sqrt(1.0 + x)],
        ],
        dtype=complex,
    )
    p = t.conj().T @ e11 @ t
    return DiagonalizerResult(t=t, p=p)


@dataclass(frozen=True)
class IntervalDefect:
    count: int
    max_defect: float
    mean_defect: float


@dataclass(frozen=True)
class DefectReport:
    max_defect: float
    mean_defect: float
    steps: int
    per_interval: dict[int, IntervalDefect]


def invariance_defect(
    candidate: PiecewiseMatrixField,
    config: RotationConfig,
    field: PiecewiseMatrixField,
    t0: float,
    steps: int,
) -> DefectReport:
    """Transport defect of a candidate projection field along an orbit.

    At each orbit point t the candidate's S = 2P - I must satisfy
    S(t + a) = +/- V(t)* S(t) V(t); the defect is the smaller Frobenius
    distance over the two signs.  Zero defect along the orbit means the
    candidate survives the necessary commutation condition there; any
    sizable defect falsifies it.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    validate_projection_field(candidate)
    pts = orbit(t0, config, steps + 1)
    eye = np.eye(2, dtype=complex)
    s_all = 2.0 * candidate.values_at(pts) - eye
    v = field.values_at(pts[:-1])
    transported = np.einsum("kji,kjl,klm->kim", v.conj(), s_all[:-1], v)
    diff_plus = s_all[1:] - transported
    diff_minus = s_all[1:] + transported
    def frob(arr):
        return np.sqrt(np.sum(np.abs(arr) ** 2, axis=(1, 2)))
    defects = np.minimum(frob(diff_plus), frob(diff_minus))
    idx = interval_indices(pts[:-1], config)
    per_interval = {}
    for j in (1, 2, 3):
        mask = idx == j
        if np.any(mask):
            sel = defects[mask]
            per_interval[j] = IntervalDefect(
                count=int(mask.sum()),
                max_defect=float(sel.max()),
                mean_defect=float(sel.mean()),
            )
        else:
            per_interval[j] = IntervalDefect(count=0, max_defect=0.0, mean_defect=0.0)
    return DefectReport(
        max_defect=float(defects.max()),
        mean_defect=float(defects.mean()),
        steps=steps,
        per_interval=per_interval,
    )


@dataclass(frozen=True, eq=False)
class PropagationResult:
    """Forced parameter trajectory along an orbit, with its sign classes
    and the classes predicted by the interval automaton."""

    points: np.ndarray
    parameters: tuple[ReflectionParams, ...]
    classes: tuple[SignClass, ...]
    expected_classes: tuple[SignClass, ...]
    mismatches: tuple[int, ...]
    boundary_steps: tuple[int, ...]

    @property
    def agreement(self) -> bool:
        return not self.mismatches


def propagate_constraint(
    start: ReflectionParams,
    t0: float,
    config: RotationConfig,
    field: PiecewiseMatrixField,
    steps: int,
) -> PropagationResult:
    """Propagate the forced values of S forward along the orbit of t0.

    Each step conjugates by the twist at the current point and resolves
    the free global sign deterministically.  The emitted sign classes are
    compared against the interval automaton acting on the initial class;
    steps where the trajectory lands on the diagonal boundary (e below
    tolerance) are logged, not treated as errors.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    pts = orbit(t0, config, steps + 1)
    s = start.matrix()
    params = [start]
    classes = [matrix_sign_profile(s)]
    expected = [classes[0]]
    mismatches = []
    boundary = []
    for k in range(steps):
        t = pts[k]
        j = 1 if t < config.a else (2 if t < 4.0 * config.a else 3)
        v = field.value_at(t)
        m = v.conj().T @ s @ v
        sign, p = resolve_sign(m)
        s = sign * m
        params.append(p)
        cls = matrix_sign_profile(s)
        classes.append(cls)
        expected.append(interval_action(j, expected[-1]))
        if cls != expected[-1]:
            mismatches.append(k + 1)
        if p.e <= DIAGONAL_BOUNDARY_TOL:
            boundary.append(k + 1)
    return PropagationResult(
        points=pts,
        parameters=tuple(params),
        classes=tuple(classes),
        expected_classes=tuple(expected),
        mismatches=tuple(mismatches),
        boundary_steps=tuple(boundary),
    )
