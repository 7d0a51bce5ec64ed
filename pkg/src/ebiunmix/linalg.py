"""Dense real matrix primitives: centering, covariance, symmetric eigen, SVD.

Matrices are plain 2-D float ndarrays, validated at operation boundaries
(finite entries, at least one row and column). The channel count p is tiny
(4 in the target application, never more than a handful), so the
eigensolver is a cyclic Jacobi iteration: provably convergent, simple, and
exact enough that every downstream tolerance is met with a wide margin.
The SVD is computed through the p x p Gram matrix rather than
bidiagonalization, which is both simpler and faster when n >> p.

Sign convention: every eigenvector / right-singular-vector column is
normalized so its largest-magnitude entry is positive, making outputs
deterministic across runs.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionError,
    InsufficientDataError,
    InvalidInputError,
    JacobiConvergenceError,
)

# Jacobi stops when every off-diagonal magnitude is below this fraction of
# the Frobenius norm of the input; hard cap on sweeps guards pathological input.
JACOBI_OFF_DIAG_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100

# Singular values below this fraction of the largest are treated as exactly
# zero so rank deficiency cannot leak NaN into downstream stages.
SVD_RANK_TOL = 1e-12

_SYMMETRY_TOL = 1e-9


def check_matrix(data, name: str = "matrix") -> np.ndarray:
    """Validate and return a 2-D float matrix (>=1 row, >=1 col, all finite)."""
    a = np.asarray(data, dtype=float)
    if a.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidInputError(f"{name} must have at least one row and column, got {a.shape}")
    if not np.isfinite(a).all():
        raise InvalidInputError(f"{name} contains non-finite entries")
    return a


def _sign_normalize_columns(v: np.ndarray) -> np.ndarray:
    """Flip column signs so the largest-magnitude entry of each column is positive."""
    v = v.copy()
    for j in range(v.shape[1]):
        i = int(np.argmax(np.abs(v[:, j])))
        if v[i, j] < 0:
            v[:, j] = -v[:, j]
    return v


@dataclass(frozen=True)
class SymEigen:
    """Eigendecomposition of a symmetric matrix.

    eigenvalues are sorted descending; eigenvector columns are orthonormal
    and sign-normalized.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float)
        vecs = check_matrix(self.eigenvectors, "eigenvectors")
        if vals.ndim != 1 or vals.size != vecs.shape[1]:
            raise DimensionError("eigenvalue count must match eigenvector columns")
        if np.any(np.diff(vals) > 1e-12 * max(1.0, abs(float(vals[0])))):
            raise InvalidInputError("eigenvalues must be sorted descending")
        gram = vecs.T @ vecs
        if np.abs(gram - np.eye(vecs.shape[1])).max() > 1e-10:
            raise InvalidInputError("eigenvectors are not orthonormal within 1e-10")
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD: input = U @ diag(D) @ V.T with orthonormal U columns, orthogonal V."""

    U: np.ndarray
    D: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        u = check_matrix(self.U, "U")
        d = np.asarray(self.D, dtype=float)
        v = check_matrix(self.V, "V")
        if d.ndim != 1 or u.shape[1] != d.size or v.shape != (d.size, d.size):
            raise DimensionError("inconsistent SVD factor shapes")
        if np.any(d < 0) or np.any(np.diff(d) > 1e-12 * max(1.0, float(d[0]))):
            raise InvalidInputError("singular values must be nonnegative and sorted descending")
        object.__setattr__(self, "U", u)
        object.__setattr__(self, "D", d)
        object.__setattr__(self, "V", v)

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.D) @ self.V.T


def center_columns(data) -> tuple[np.ndarray, np.ndarray]:
    """Subtract each column's mean.

    Returns:
        (centered, means): centered matrix of the same shape, and the vector
        of per-column arithmetic means.
    """
    a = check_matrix(data, "data")
    means = a.mean(axis=0)
    return a - means, means


def covariance(centered) -> np.ndarray:
    """Sample covariance (1/(n-1)) X^T X of an already column-centered matrix."""
    x = check_matrix(centered, "centered")
    n = x.shape[0]
    if n < 2:
        raise InsufficientDataError(f"covariance needs at least 2 rows, got {n}")
    c = x.T @ x / (n - 1)
    return 0.5 * (c + c.T)


def sym_eigen(m) -> SymEigen:
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps rotate every off-diagonal pair until all off-diagonal magnitudes
    fall below JACOBI_OFF_DIAG_TOL times the Frobenius norm of the input,
    with a hard cap of JACOBI_MAX_SWEEPS sweeps.

    Raises:
        InvalidInputError: non-square or asymmetric input.
        JacobiConvergenceError: threshold not reached within the sweep cap.
    """
    a = check_matrix(m, "m")
    p = a.shape[0]
    if a.shape[1] != p:
        raise InvalidInputError(f"matrix must be square, got {a.shape}")
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a - a.T).max() > _SYMMETRY_TOL * scale:
        raise InvalidInputError("matrix is not symmetric within tolerance")

    a = 0.5 * (a + a.T)
    v = np.eye(p)
    norm = float(np.linalg.norm(a))
    if norm == 0.0:
        return SymEigen(np.zeros(p), v)
    thresh = JACOBI_OFF_DIAG_TOL * norm

    others = np.arange(p)
    sweeps = 0
    while True:
        off = float(np.abs(a - np.diag(np.diag(a))).max())
        if off < thresh:
            break
        if sweeps >= JACOBI_MAX_SWEEPS:
            raise JacobiConvergenceError(
                f"off-diagonal mass {off:.3e} above threshold {thresh:.3e} "
                f"after {sweeps} sweeps",
                sweeps=sweeps,
            )
        sweeps += 1
        for i in range(p - 1):
            for j in range(i + 1, p):
                aij = a[i, j]
                if abs(aij) <= thresh:
                    continue
                theta = (a[j, j] - a[i, i]) / (2.0 * aij)
                if theta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # two-sided rotation in the (i, j) plane
                mask = (others != i) & (others != j)
                aki = a[mask, i].copy()
                akj = a[mask, j].copy()
                a[mask, i] = c * aki - s * akj
                a[i, mask] = a[mask, i]
                a[mask, j] = s * aki + c * akj
                a[j, mask] = a[mask, j]
                aii, ajj = a[i, i], a[j, j]
                a[i, i] = aii - t * aij
                a[j, j] = ajj + t * aij
                a[i, j] = 0.0
                a[j, i] = 0.0
                vki = v[:, i].copy()
                v[:, i] = c * vki - s * v[:, j]
                v[:, j] = s * vki + c * v[:, j]

    vals = np.diag(a).copy()
    order = np.argsort(-vals, kind="stable")
    return SymEigen(vals[order], _sign_normalize_columns(v[:, order]))


def svd(data) -> SvdResult:
    """Thin SVD of a tall matrix via eigendecomposition of the p x p Gram matrix.

    Singular values are sqrt of the Gram eigenvalues; U columns come from
    Y V / d. Singular values below SVD_RANK_TOL times the largest are set to
    exactly zero and their U columns are filled by Gram-Schmidt against the
    existing columns, so rank-deficient input never produces NaN.

    Raises:
        DimensionError: fewer rows than columns.
    """
    y = check_matrix(data, "data")
    n, p = y.shape
    if n < p:
        raise DimensionError(f"svd requires rows >= cols, got {y.shape}")

    gram = y.T @ y
    eig = sym_eigen(0.5 * (gram + gram.T))
    d = np.sqrt(np.clip(eig.eigenvalues, 0.0, None))
    v = eig.eigenvectors

    d_max = float(d[0])
    zero = d <= SVD_RANK_TOL * d_max if d_max > 0.0 else np.ones(p, dtype=bool)
    d = np.where(zero, 0.0, d)

    u = np.zeros((n, p))
    for j in range(p):
        if not zero[j]:
            u[:, j] = y @ v[:, j] / d[j]
    if zero.any():
        u = _fill_orthonormal_columns(u, np.flatnonzero(zero), np.flatnonzero(~zero))
    return SvdResult(u, d, v)


def _fill_orthonormal_columns(u: np.ndarray, empty: np.ndarray, filled: np.ndarray) -> np.ndarray:
    """Fill the `empty` columns of u with unit vectors orthogonal to all others."""
    n = u.shape[0]
    u = u.copy()
    taken = list(filled)
    for j in empty:
        for basis in range(n):
            cand = np.zeros(n)
            cand[basis] = 1.0
            # two Gram-Schmidt passes keep orthogonality at round-off level
            for _ in range(2):
                for k in taken:
                    cand -= (u[:, k] @ cand) * u[:, k]
            nrm = float(np.linalg.norm(cand))
            if nrm > 0.5:
                cand /= nrm
                if cand[int(np.argmax(np.abs(cand)))] < 0:
                    cand = -cand
                u[:, j] = cand
                taken.append(j)
                break
        else:
            raise InvalidInputError("could not complete orthonormal basis")
    return u
