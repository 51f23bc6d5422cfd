"""Dense real symmetric matrix algebra.

Norms, Schur (entrywise) products, and positive-semidefinite utilities.
Everything here is a pure function on immutable values; the rest of the
package builds on this substrate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SymMatrix",
    "AsymmetricMatrixError",
    "EigensolverError",
    "NotPositiveSemidefiniteError",
    "MatrixFormatError",
    "SYMMETRY_RTOL",
    "PSD_TOL",
    "identity",
    "zeros",
    "diagonal",
    "outer",
    "as_vector",
    "schur_product",
    "spectral_norm",
    "schatten_norm",
    "one_to_two_norm",
    "max_norm",
    "gershgorin_column_bound",
    "is_psd",
    "psd_order_leq",
    "psd_sqrt",
    "read_matrix_text",
    "write_matrix_text",
]

# Construction rejects inputs whose asymmetry exceeds this relative threshold.
SYMMETRY_RTOL = 1e-10
# Default relative eigenvalue tolerance for PSD checks.
PSD_TOL = 1e-9


class AsymmetricMatrixError(ValueError):
    """Input matrix is too far from symmetric to be silently repaired."""


class EigensolverError(RuntimeError):
    """The symmetric eigensolver failed to converge."""


class NotPositiveSemidefiniteError(ValueError):
    """A PSD matrix was required but the input has a significantly negative eigenvalue."""


class MatrixFormatError(ValueError):
    """Malformed dense matrix text file."""


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Immutable dense real symmetric p x p matrix.

    Construction symmetrizes the input by averaging with its transpose.
    Inputs whose maximum asymmetry exceeds ``SYMMETRY_RTOL * max(1, max|entry|)``
    are rejected, as are non-finite entries.  The stored array is read-only,
    so values can be shared freely across threads.
    """

    mat: np.ndarray

    def __post_init__(self) -> None:
        a = np.array(self.mat, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square 2-d array, got shape {a.shape}")
        if a.shape[0] < 1:
            raise ValueError("matrix dimension must be positive")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        gap = float(np.max(np.abs(a - a.T)))
        scale = max(1.0, float(np.max(np.abs(a))))
        if gap > SYMMETRY_RTOL * scale:
            raise AsymmetricMatrixError(
                f"max asymmetry {gap:.3e} exceeds {SYMMETRY_RTOL:.0e} * {scale:.3e}"
            )
        sym = 0.5 * (a + a.T)
        sym.flags.writeable = False
        object.__setattr__(self, "mat", sym)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def __add__(self, other: "SymMatrix") -> "SymMatrix":
        _check_same_dim(self, other)
        return SymMatrix(self.mat + other.mat)

    def __sub__(self, other: "SymMatrix") -> "SymMatrix":
        _check_same_dim(self, other)
        return SymMatrix(self.mat - other.mat)

    def __mul__(self, scalar: float) -> "SymMatrix":
        return SymMatrix(float(scalar) * self.mat)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"SymMatrix(dim={self.dim})"


def _check_same_dim(a: SymMatrix, b: SymMatrix) -> None:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")


def identity(p: int) -> SymMatrix:
    return SymMatrix(np.eye(p))


def zeros(p: int) -> SymMatrix:
    return SymMatrix(np.zeros((p, p)))


def diagonal(entries) -> SymMatrix:
    """Diagonal matrix from a vector of entries."""
    return SymMatrix(np.diag(as_vector(entries)))


def outer(x) -> SymMatrix:
    """Rank-one matrix x x* from a vector."""
    v = as_vector(x)
    return SymMatrix(np.outer(v, v))


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Validate a 1-d real vector with finite entries and return it as float64."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"expected a nonempty 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    if dim is not None and v.size != dim:
        raise ValueError(f"expected vector of length {dim}, got {v.size}")
    return v


def _eigvals(a: SymMatrix) -> np.ndarray:
    try:
        return np.linalg.eigvalsh(a.mat)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - hard to trigger
        raise EigensolverError(f"eigvalsh failed on {a.dim}x{a.dim} matrix: {exc}") from exc


def schur_product(a: SymMatrix, b: SymMatrix) -> SymMatrix:
    """Entrywise (Schur/Hadamard) product of two symmetric matrices."""
    _check_same_dim(a, b)
    return SymMatrix(a.mat * b.mat)


def spectral_norm(a: SymMatrix) -> float:
    """Largest absolute eigenvalue, computed by symmetric eigendecomposition."""
    lam = _eigvals(a)
    return float(max(abs(lam[0]), abs(lam[-1])))


def schatten_norm(a: SymMatrix, q: float) -> float:
    """Schatten q-norm (sum_i |lambda_i|^q)^(1/q) for real q >= 1.

    Scales out the top eigenvalue before exponentiating so large q does not
    overflow.
    """
    q = float(q)
    if q < 1.0:
        raise ValueError(f"Schatten norm requires q >= 1, got {q}")
    lam = np.abs(_eigvals(a))
    top = float(lam.max())
    if top == 0.0:
        return 0.0
    return top * float(np.sum((lam / top) ** q)) ** (1.0 / q)


def one_to_two_norm(a: SymMatrix) -> float:
    """Maximum Euclidean column norm."""
    return float(np.sqrt(np.max(np.sum(a.mat**2, axis=0))))


def max_norm(a: SymMatrix) -> float:
    """Maximum absolute entry."""
    return float(np.max(np.abs(a.mat)))


def gershgorin_column_bound(a: SymMatrix) -> float:
    """Maximum l1 norm of a column; dominates the spectral norm for symmetric input."""
    return float(np.max(np.sum(np.abs(a.mat), axis=0)))


def is_psd(a: SymMatrix, tol: float = PSD_TOL) -> bool:
    """True iff lambda_min(a) >= -tol * max(1, ||a||).

    The tolerance is relative so near-singular Monte-Carlo covariances are not
    rejected for eigensolver jitter.
    """
    lam = _eigvals(a)
    lam_min = float(lam[0])
    spec = float(max(abs(lam[0]), abs(lam[-1])))
    return lam_min >= -tol * max(1.0, spec)


def psd_order_leq(a: SymMatrix, b: SymMatrix, tol: float = PSD_TOL) -> bool:
    """True iff a precedes b in the positive-semidefinite order (b - a is PSD)."""
    return is_psd(b - a, tol)


def psd_sqrt(a: SymMatrix, tol: float = PSD_TOL) -> SymMatrix:
    """Symmetric PSD square root via eigendecomposition.

    Eigenvalues in [-tol * max(1, ||a||), 0) are clamped to zero; anything more
    negative raises ``NotPositiveSemidefiniteError``.
    """
    try:
        lam, vecs = np.linalg.eigh(a.mat)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise EigensolverError(f"eigh failed on {a.dim}x{a.dim} matrix: {exc}") from exc
    spec = float(max(abs(lam[0]), abs(lam[-1])))
    if lam[0] < -tol * max(1.0, spec):
        raise NotPositiveSemidefiniteError(
            f"lambda_min = {lam[0]:.3e} below tolerance {-tol * max(1.0, spec):.3e}"
        )
    root = (vecs * np.sqrt(np.clip(lam, 0.0, None))) @ vecs.T
    return SymMatrix(0.5 * (root + root.T))


def write_matrix_text(a: SymMatrix, path) -> None:
    """Write the dense matrix text format: first line p, then p rows of p numbers."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{a.dim}\n")
        for row in a.mat:
            fh.write(" ".join(format(v, ".17g") for v in row))
            fh.write("\n")


def read_matrix_text(path) -> SymMatrix:
    """Read the dense matrix text format, enforcing the symmetry rule."""
    with open(path, "r", encoding="ascii") as fh:
        tokens = fh.read().split()
    if not tokens:
        raise MatrixFormatError(f"{path}: empty file")
    try:
        p = int(tokens[0])
    except ValueError as exc:
        raise MatrixFormatError(f"{path}: first token must be the dimension") from exc
    if p < 1:
        raise MatrixFormatError(f"{path}: dimension must be positive, got {p}")
    if len(tokens) != 1 + p * p:
        raise MatrixFormatError(
            f"{path}: expected {p * p} entries for p={p}, found {len(tokens) - 1}"
        )
    try:
        values = np.array([float(t) for t in tokens[1:]], dtype=np.float64)
    except ValueError as exc:
        raise MatrixFormatError(f"{path}: non-numeric entry") from exc
    try:
        return SymMatrix(values.reshape(p, p))
    except (ValueError, AsymmetricMatrixError) as exc:
        raise MatrixFormatError(f"{path}: {exc}") from exc


def _spectral_norms_stacked(stack: np.ndarray) -> np.ndarray:
    """Spectral norms of a (..., p, p) stack of symmetric matrices.

    Internal helper shared by the Monte Carlo drivers; inputs are trusted to
    be symmetric.
    """
    lam = np.linalg.eigvalsh(stack)
    return np.maximum(np.abs(lam[..., 0]), np.abs(lam[..., -1]))
