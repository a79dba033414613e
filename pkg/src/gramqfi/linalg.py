"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` complex arrays; :func:`as_cmatrix` is the single
entry point that validates them.
"""

from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import ConvergenceFailure, DimensionMismatch, NotHermitian, NotPSD

DEFAULT_ATOL = 1e-10
DEFAULT_RANK_TOL = 1e-10


def as_cmatrix(M, name="matrix"):
    """Return ``M`` as a finite 2-D complex128 array or raise."""
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def _require_square(A, name):
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {A.shape}")


def hermiticity_error(M):
    return float(np.linalg.norm(M - M.conj().T))


def hermitize(M):
    return 0.5 * (M + M.conj().T)


class EigenPairs(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def herm_eig(M, atol=DEFAULT_ATOL):
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    A = as_cmatrix(M)
    _require_square(A, "M")
    if hermiticity_error(A) > atol:
        raise NotHermitian(f"|M - M^H| = {hermiticity_error(A):.3e} exceeds {atol:.1e}")
    try:
        w, V = np.linalg.eigh(hermitize(A))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return EigenPairs(w, V)


def psd_sqrt(M, atol=DEFAULT_ATOL):
    """Hermitian square root of a positive semidefinite matrix.

    Eigenvalues in ``[-atol, 0)`` are clamped to zero.
    """
    w, V = herm_eig(M, atol)
    if w.size and w[0] < -atol:
        raise NotPSD(f"smallest eigenvalue {w[0]:.3e} below -{atol:.1e}")
    root = np.sqrt(np.clip(w, 0.0, None))
    return hermitize((V * root) @ V.conj().T)


def pinv(M, rank_tol=DEFAULT_RANK_TOL):
    """Moore-Penrose pseudo-inverse with a relative singular-value cutoff."""
    return np.linalg.pinv(as_cmatrix(M), rcond=rank_tol)


def condition_number(M):
    sv = np.linalg.svd(as_cmatrix(M), compute_uv=False)
    if sv.size == 0 or sv[-1] == 0.0:
        return np.inf
    return float(sv[0] / sv[-1])


class LyapunovSolution(NamedTuple):
    X: np.ndarray
    residual: float
    rank_deficiency: int


def lyapunov_lstsq(A, Bm, C, rank_tol=DEFAULT_RANK_TOL):
    """Minimum-norm least-squares solution of ``X @ A + Bm @ X = C``.

    The equation is vectorized through its Kronecker form and solved by
    singular-value thresholding, so rank-deficient systems get the unique
    smallest-Frobenius-norm solution.
    """
    A = as_cmatrix(A, "A")
    Bm = as_cmatrix(Bm, "Bm")
    C = as_cmatrix(C, "C")
    _require_square(A, "A")
    _require_square(Bm, "Bm")
    p, q = Bm.shape[0], A.shape[0]
    if C.shape != (p, q):
        raise DimensionMismatch(f"C has shape {C.shape}, expected {(p, q)}")
    K = kernels.kron_sylvester(A, Bm)
    x, deficiency = kernels.minnorm_lstsq(K, C.reshape(-1), rank_tol)
    X = x.reshape(p, q)
    residual = float(np.linalg.norm(X @ A + Bm @ X - C))
    return LyapunovSolution(X, residual, deficiency)
