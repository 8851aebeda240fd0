"""Dense complex linear algebra for small operator problems.

Everything in this package runs on dense ``complex128`` square matrices of
modest size (a few dozen rows at most), so the solvers here favour
robustness and predictable tolerances over speed.  All comparisons are
governed by a single :class:`TolerancePolicy` threaded through call sites.

The Hermitian eigensolver is a cyclic Jacobi iteration: at these sizes it
is effectively exact, has no balancing or deflation corner cases, and its
failure mode is a clean sweep-budget error.  Rank and null-space questions
(numerical rank of a family, commutant of a family) are large-but-routine
least-squares problems and are delegated to LAPACK via numpy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NotSelfAdjoint

__all__ = [
    "TolerancePolicy",
    "DEFAULT_TOL",
    "as_matrix",
    "max_norm",
    "hermitian_eig",
    "is_unitary",
    "numerical_rank",
    "commutant_basis",
    "span_rows",
    "span_residual",
    "matrix_to_json",
    "matrix_from_json",
]


@dataclass(frozen=True)
class TolerancePolicy:
    """Comparison thresholds used throughout the library.

    ``eps_eq`` bounds entrywise (max-norm) equality checks; ``eps_rank`` is
    the relative Gram-eigenvalue cutoff below which a direction counts as
    numerically zero.
    """

    eps_eq: float = 1e-9
    eps_rank: float = 1e-8

    def __post_init__(self) -> None:
        if not (self.eps_eq > 0.0 and self.eps_rank > 0.0):
            raise ValueError("tolerances must be strictly positive")


DEFAULT_TOL = TolerancePolicy()


def as_matrix(entries) -> np.ndarray:
    """Coerce input to a square complex matrix with finite entries."""
    m = np.asarray(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not (np.all(np.isfinite(m.real)) and np.all(np.isfinite(m.imag))):
        raise ValueError("matrix entries must be finite")
    return m


def max_norm(m) -> float:
    """Largest entry modulus; the norm behind every eps_eq comparison."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.abs(m).max())


def _offdiag_max(a: np.ndarray) -> float:
    n = a.shape[0]
    if n < 2:
        return 0.0
    iu = np.triu_indices(n, 1)
    return float(np.abs(a[iu]).max())


def hermitian_eig(
    m,
    tol: TolerancePolicy = DEFAULT_TOL,
    max_sweeps: int = 100,
) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a self-adjoint matrix by cyclic Jacobi sweeps.

    Returns ``(eigenvalues, q)`` with eigenvalues real and nondecreasing and
    ``q`` unitary, so that ``m @ q == q @ diag(eigenvalues)`` up to roundoff.
    Degenerate eigenvalues get an arbitrary orthonormal basis of their
    eigenspace; callers must not rely on a particular choice inside a
    cluster.

    Raises ``NotSelfAdjoint`` when ``m`` deviates from its adjoint by more
    than ``tol.eps_eq``, and ``NoConvergence`` when the off-diagonal mass
    survives ``max_sweeps`` full sweeps.
    """
    a = as_matrix(m)
    n = a.shape[0]
    if max_norm(a - a.conj().T) > tol.eps_eq:
        raise NotSelfAdjoint("matrix is not self-adjoint within eps_eq")
    a = (a + a.conj().T) / 2.0
    q = np.eye(n, dtype=complex)
    # Absolute off-diagonal target; sizes are tiny so a fixed factor of the
    # entry scale is plenty below every eps_eq used in practice.
    off_target = 1e-13 * max(1.0, max_norm(a))
    sweeps = 0
    while _offdiag_max(a) > off_target:
        if sweeps >= max_sweeps:
            raise NoConvergence(f"Jacobi iteration exceeded {max_sweeps} sweeps")
        for p in range(n - 1):
            for r in range(p + 1, n):
                b = abs(a[p, r])
                if b <= off_target:
                    continue
                w = a[p, r] / b
                alpha = a[p, p].real
                gamma = a[r, r].real
                tau = (gamma - alpha) / (2.0 * b)
                sign = 1.0 if tau >= 0.0 else -1.0
                t = -sign / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # A <- U* A U with the plane rotation U acting on columns
                # p and r; then accumulate Q <- Q U.
                colp = a[:, p].copy()
                colr = a[:, r].copy()
                a[:, p] = c * colp + s * np.conj(w) * colr
                a[:, r] = -s * w * colp + c * colr
                rowp = a[p, :].copy()
                rowr = a[r, :].copy()
                a[p, :] = c * rowp + s * w * rowr
                a[r, :] = -s * np.conj(w) * rowp + c * rowr
                a[p, r] = 0.0
                a[r, p] = 0.0
                a[p, p] = a[p, p].real
                a[r, r] = a[r, r].real
                qp = q[:, p].copy()
                qr = q[:, r].copy()
                q[:, p] = c * qp + s * np.conj(w) * qr
                q[:, r] = -s * w * qp + c * qr
        sweeps += 1
    values = a.diagonal().real.copy()
    order = np.argsort(values, kind="stable")
    return values[order], q[:, order]


def is_unitary(m, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """True when ``m* m`` equals the identity within ``tol.eps_eq``."""
    m = as_matrix(m)
    n = m.shape[0]
    return max_norm(m.conj().T @ m - np.eye(n)) <= tol.eps_eq


def _flatten_family(vectors) -> np.ndarray:
    mats = [np.asarray(v, dtype=complex) for v in vectors]
    if not mats:
        return np.zeros((0, 0), dtype=complex)
    shape = mats[0].shape
    for v in mats:
        if v.shape != shape:
            raise DimensionMismatch("family members must share one shape")
    return np.stack([v.ravel() for v in mats])


def numerical_rank(vectors, tol: TolerancePolicy = DEFAULT_TOL) -> int:
    """Rank of a family of arrays viewed as flat vectors.

    Computed from the Gram matrix: eigenvalues below ``eps_rank`` times the
    largest one count as zero.
    """
    flat = _flatten_family(vectors)
    if flat.shape[0] == 0:
        return 0
    gram = flat @ flat.conj().T
    eigs = np.linalg.eigvalsh(gram)
    top = float(eigs[-1])
    if top <= 0.0:
        return 0
    return int(np.sum(eigs > tol.eps_rank * top))


def span_rows(matrices, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal row basis for the span of a family of same-shape arrays.

    Rows are flat vectors; the rank cutoff matches :func:`numerical_rank`
    (singular values sigma with sigma^2 below eps_rank * sigma_max^2 are
    dropped).
    """
    flat = _flatten_family(matrices)
    if flat.shape[0] == 0:
        return flat
    _, sing, vh = np.linalg.svd(flat, full_matrices=False)
    if sing.size == 0 or sing[0] <= 0.0:
        return vh[:0]
    keep = (sing * sing) > tol.eps_rank * (sing[0] * sing[0])
    return vh[: int(np.sum(keep))]


def span_residual(matrix, rows: np.ndarray) -> float:
    """Max-norm distance from ``matrix`` to the span given by ``rows``."""
    x = np.asarray(matrix, dtype=complex).ravel()
    if rows.shape[0] == 0:
        return float(np.abs(x).max()) if x.size else 0.0
    coeffs = rows.conj() @ x
    return float(np.abs(x - rows.T @ coeffs).max())


def commutant_basis(
    generators,
    n: int,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> list[np.ndarray]:
    """Orthonormal basis of ``{x : x g == g x for every generator g}``.

    The commutation constraints are assembled as one linear system on the
    column-major vectorisation of ``x`` and solved by SVD; singular values
    are cut off with the Gram convention of :func:`numerical_rank`.
    """
    gens = [as_matrix(g) for g in generators]
    for g in gens:
        if g.shape != (n, n):
            raise DimensionMismatch(f"generator has shape {g.shape}, expected ({n}, {n})")
    if not gens:
        return [_unit_matrix(n, i, j) for i in range(n) for j in range(n)]
    eye = np.eye(n)
    system = np.vstack([np.kron(g.T, eye) - np.kron(eye, g) for g in gens])
    if system.shape[0] < system.shape[1]:
        pad = np.zeros((system.shape[1] - system.shape[0], system.shape[1]), dtype=complex)
        system = np.vstack([system, pad])
    _, sing, vh = np.linalg.svd(system, full_matrices=False)
    if sing.size == 0 or sing[0] <= 0.0:
        rank = 0
    else:
        rank = int(np.sum((sing * sing) > tol.eps_rank * (sing[0] * sing[0])))
    null = vh[rank:]
    return [vec.reshape(n, n, order="F") for vec in null.conj()]


def _unit_matrix(n: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e


def matrix_to_json(m) -> dict:
    """Serialise a complex matrix as separate real and imaginary grids."""
    m = np.asarray(m, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(obj) -> np.ndarray:
    """Inverse of :func:`matrix_to_json`; raises ``ValueError`` on bad shape."""
    if not isinstance(obj, dict) or "re" not in obj or "im" not in obj:
        raise ValueError("matrix document must have 're' and 'im' fields")
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj["im"], dtype=float)
    if re.shape != im.shape or re.ndim != 2:
        raise ValueError("'re' and 'im' must be equal-shape nested arrays")
    return re + 1j * im
