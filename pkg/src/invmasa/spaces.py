"""Weighted finite point sets, block partitions, and the multiplication
algebras they carry.

A block partition of the points determines the abelian algebra of
multiplication operators by functions constant on each block; its matrix
basis is the family of 0/1 block-indicator diagonals.  All matrices are
taken with respect to the orthonormalised point basis, which is what makes
multiplication operators plain diagonals regardless of the point masses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, LengthMismatch
from .numerics import (
    DEFAULT_TOL,
    TolerancePolicy,
    as_matrix,
    commutant_basis,
    max_norm,
    numerical_rank,
    span_residual,
    span_rows,
)

__all__ = [
    "DiscreteSpace",
    "BlockPartition",
    "BlockAlgebra",
    "multiplication_operator",
    "algebra_basis",
    "MasaCheck",
    "masa_check",
    "is_masa",
    "multiplicity_match",
]


@dataclass(frozen=True)
class DiscreteSpace:
    """Finite point set 0..n-1 with strictly positive point masses."""

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.weights) < 1:
            raise ValueError("a space needs at least one point")
        ws = tuple(float(w) for w in self.weights)
        if any(not np.isfinite(w) or w <= 0.0 for w in ws):
            raise ValueError("point masses must be finite and positive")
        object.__setattr__(self, "weights", ws)

    @property
    def n(self) -> int:
        return len(self.weights)

    @classmethod
    def counting(cls, n: int) -> "DiscreteSpace":
        return cls((1.0,) * n)


@dataclass(frozen=True)
class BlockPartition:
    """Disjoint nonempty index blocks covering 0..n-1.

    Block labels are positions in the ``blocks`` tuple; indices inside a
    block are kept in ascending order.
    """

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not self.blocks:
            raise ValueError("partition needs at least one block")
        norm = tuple(tuple(sorted(int(i) for i in b)) for b in self.blocks)
        seen: set[int] = set()
        for b in norm:
            if not b:
                raise ValueError("blocks must be nonempty")
            if seen.intersection(b):
                raise ValueError("blocks must be disjoint")
            seen.update(b)
        if seen != set(range(len(seen))):
            raise ValueError("blocks must cover 0..n-1 with no gaps")
        object.__setattr__(self, "blocks", norm)

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    def label_of(self, point: int) -> int:
        for j, b in enumerate(self.blocks):
            if point in b:
                return j
        raise IndexError(f"point {point} not covered")

    @classmethod
    def singletons(cls, n: int) -> "BlockPartition":
        return cls(tuple((i,) for i in range(n)))


@dataclass(frozen=True)
class BlockAlgebra:
    """The algebra of multiplication operators constant on each block."""

    space: DiscreteSpace
    partition: BlockPartition

    def __post_init__(self) -> None:
        if self.space.n != self.partition.n:
            raise DimensionMismatch(
                f"partition covers {self.partition.n} points, space has {self.space.n}"
            )

    @property
    def n(self) -> int:
        return self.space.n


def multiplication_operator(values, space: DiscreteSpace) -> np.ndarray:
    """Multiplication by a bounded function, as a diagonal matrix."""
    f = np.asarray(values, dtype=complex)
    if f.ndim != 1 or f.shape[0] != space.n:
        raise LengthMismatch(f"function has {f.shape} values, space has {space.n} points")
    if not (np.all(np.isfinite(f.real)) and np.all(np.isfinite(f.imag))):
        raise ValueError("function values must be finite")
    return np.diag(f)


def algebra_basis(algebra: BlockAlgebra) -> list[np.ndarray]:
    """Block-indicator diagonal projections, one per block.

    These are exact 0/1 matrices: mutually orthogonal idempotents that sum
    to the identity.
    """
    n = algebra.n
    basis = []
    for block in algebra.partition.blocks:
        p = np.zeros((n, n), dtype=complex)
        for i in block:
            p[i, i] = 1.0
        basis.append(p)
    return basis


@dataclass(frozen=True)
class MasaCheck:
    """Outcome of the maximal-abelian test for a spanned family."""

    rank: int
    commutant_dimension: int
    unital_residual: float
    selfadjoint_residual: float
    abelian_residual: float
    eps_eq: float

    @property
    def ok(self) -> bool:
        return (
            self.commutant_dimension == self.rank
            and self.unital_residual <= self.eps_eq
            and self.selfadjoint_residual <= self.eps_eq
            and self.abelian_residual <= self.eps_eq
        )


def masa_check(basis, n: int, tol: TolerancePolicy = DEFAULT_TOL) -> MasaCheck:
    """Test whether the span of ``basis`` is a maximal abelian self-adjoint
    algebra in the n-by-n matrices.

    Maximality is the commutant criterion: the commutant of the family must
    have the same linear dimension as the family's span (for a true masa
    this shared dimension is ``n``).
    """
    mats = [as_matrix(b) for b in basis]
    for m in mats:
        if m.shape != (n, n):
            raise DimensionMismatch(f"basis element has shape {m.shape}, expected ({n}, {n})")
    rows = span_rows(mats, tol)
    unital = span_residual(np.eye(n, dtype=complex), rows)
    selfadj = max((span_residual(m.conj().T, rows) for m in mats), default=0.0)
    abelian = 0.0
    for i, x in enumerate(mats):
        for y in mats[i + 1 :]:
            abelian = max(abelian, max_norm(x @ y - y @ x))
    commutant_dim = len(commutant_basis(mats, n, tol))
    return MasaCheck(
        rank=numerical_rank(mats, tol),
        commutant_dimension=commutant_dim,
        unital_residual=unital,
        selfadjoint_residual=selfadj,
        abelian_residual=abelian,
        eps_eq=tol.eps_eq,
    )


def is_masa(basis, n: int, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    return masa_check(basis, n, tol).ok


def _cluster_keys(values: np.ndarray, value_tol: float) -> list[int]:
    """Assign a cluster id to every value; values within ``value_tol`` of a
    chain neighbour (in lexicographic real/imag order) share an id."""
    order = np.lexsort((values.imag, values.real))
    keys = [0] * len(values)
    cluster = 0
    prev = None
    for pos in order:
        v = values[pos]
        if prev is not None and abs(v - prev) > value_tol:
            cluster += 1
        keys[pos] = cluster
        prev = v
    return keys


def multiplicity_match(f, g, value_tol: float = 0.0):
    """Find a point bijection ``sigma`` with ``g[x] == f[sigma[x]]``.

    Returns the bijection as a tuple, or ``None`` when the value multisets
    of ``f`` and ``g`` differ (some value occurs with different
    multiplicity, mirroring unequal eigenspace dimensions of the two
    multiplication operators).

    Values are compared with exact complex equality by default; a positive
    ``value_tol`` switches to chain clustering for inputs that were
    computed rather than given.  Equal values are paired in ascending point
    order, so the output is deterministic.
    """
    fv = np.asarray(f, dtype=complex)
    gv = np.asarray(g, dtype=complex)
    if fv.shape != gv.shape or fv.ndim != 1:
        raise LengthMismatch("f and g must be equal-length value tuples")
    n = fv.shape[0]
    if value_tol > 0.0:
        keys = _cluster_keys(np.concatenate([fv, gv]), value_tol)
        f_keys, g_keys = keys[:n], keys[n:]
    else:
        f_keys = [complex(v) for v in fv]
        g_keys = [complex(v) for v in gv]
    f_positions: dict = {}
    for i, k in enumerate(f_keys):
        f_positions.setdefault(k, []).append(i)
    g_positions: dict = {}
    for i, k in enumerate(g_keys):
        g_positions.setdefault(k, []).append(i)
    if set(f_positions) != set(g_positions):
        return None
    sigma = [0] * n
    for key, f_idx in f_positions.items():
        g_idx = g_positions[key]
        if len(f_idx) != len(g_idx):
            return None
        for gi, fi in zip(g_idx, f_idx):
            sigma[gi] = fi
    return tuple(sigma)
