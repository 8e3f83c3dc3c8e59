"""Dense complex linear algebra used by the reservoir and spectrum code.

Matrices are plain 2-D numpy arrays. The heavy lifting (eigenvalues,
Cholesky) is delegated to LAPACK through numpy/scipy; this module adds the
shape checks, error reporting and deterministic eigenvalue ordering the
rest of the package relies on.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

# LAPACK's zhseqr/dhseqr cap the QR sweeps at 30 iterations per eigenvalue.
_LAPACK_SWEEPS_PER_EIGENVALUE = 30


class LinalgError(ValueError):
    """Raised for shape violations and failed factorizations."""


class EigenConvergenceError(LinalgError):
    pass


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate ``a`` as a finite 2-D array and return it as ndarray."""
    arr = np.asarray(a)
    if arr.ndim != 2:
        raise LinalgError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise LinalgError(f"{name} contains non-finite entries")
    return arr


def _require_square(a: np.ndarray, name: str) -> None:
    if a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise LinalgError(f"{name} must be square and non-empty, got shape {a.shape}")


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a, "A")
    b = as_matrix(b, "B")
    if a.shape[1] != b.shape[0]:
        raise LinalgError(f"cannot multiply shapes {a.shape} and {b.shape}")
    return a @ b


def kron(a, b) -> np.ndarray:
    """Kronecker product, ``(A⊗B)[i*Br+k, j*Bc+l] = A[i,j] * B[k,l]``."""
    return np.kron(as_matrix(a, "A"), as_matrix(b, "B"))


def sort_eigenvalues(values) -> np.ndarray:
    """Order eigenvalues by modulus (descending), then by argument.

    Moduli and arguments are rounded before comparison so that values that
    differ only by floating-point noise land in a stable order.
    """
    values = np.asarray(values, dtype=complex).ravel()
    mod = np.round(np.abs(values), 12)
    arg = np.round(np.angle(values), 12)
    order = np.lexsort((arg, -mod))
    return values[order]


def eig_general(a) -> np.ndarray:
    """All eigenvalues of a general square matrix, with multiplicity.

    Returned in :func:`sort_eigenvalues` order.
    """
    a = as_matrix(a, "A")
    _require_square(a, "A")
    try:
        values = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        cap = _LAPACK_SWEEPS_PER_EIGENVALUE * a.shape[0]
        raise EigenConvergenceError(
            f"eigenvalue iteration did not converge within {cap} QR sweeps "
            f"(matrix size {a.shape[0]})"
        ) from exc
    return sort_eigenvalues(values)


def eig_pairs(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and right eigenvectors (columns), same order as eig_general."""
    a = as_matrix(a, "A")
    _require_square(a, "A")
    values, vectors = np.linalg.eig(a)
    mod = np.round(np.abs(values), 12)
    arg = np.round(np.angle(values), 12)
    order = np.lexsort((arg, -mod))
    return values[order], vectors[:, order]


def solve_hpd(a, b) -> np.ndarray:
    """Solve ``A X = B`` for Hermitian positive definite ``A`` via Cholesky."""
    a = as_matrix(a, "A")
    _require_square(a, "A")
    b_arr = np.asarray(b)
    vector_rhs = b_arr.ndim == 1
    b_mat = as_matrix(b_arr[:, None] if vector_rhs else b_arr, "B")
    if b_mat.shape[0] != a.shape[0]:
        raise LinalgError(f"row mismatch: A is {a.shape}, B is {b_mat.shape}")
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.conj().T).max() > 1e-10 * scale:
        raise LinalgError("matrix is not Hermitian")
    try:
        factor = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise LinalgError(f"matrix is not Hermitian positive definite: {exc}") from exc
    x = scipy.linalg.cho_solve(factor, b_mat, check_finite=False)
    return x[:, 0] if vector_rhs else x


def spectral_radius(a) -> float:
    return float(np.max(np.abs(eig_general(a))))
