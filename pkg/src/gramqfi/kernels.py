"""Dispatch between the numba and numpy kernel implementations.

The choice is made once, at import time, from ``GRAMQFI_DISABLE_NUMBA``.
Both backends stay importable so they can be compared directly.
"""

import numpy as np

from . import _kernels_numpy as numpy_backend
from ._accel import NUMBA_ENABLED

if NUMBA_ENABLED:
    from . import _kernels_numba as numba_backend

    _impl = numba_backend
    BACKEND = "numba"
else:
    numba_backend = None
    _impl = numpy_backend
    BACKEND = "numpy"


def _c(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def kron_sylvester(A, Bm):
    """Matrix ``K`` with ``K @ vec(X) == vec(X @ A + Bm @ X)`` (row-major vec)."""
    return _impl.kron_sylvester(_c(A), _c(Bm))


def minnorm_lstsq(K, rhs, rank_tol):
    """Minimum-norm least-squares solution of ``K x = rhs``.

    Singular values at or below ``rank_tol * s_max`` are treated as zero.
    Returns ``(x, rank_deficiency)``.
    """
    x, deficiency = _impl.minnorm_lstsq(_c(K), _c(rhs), float(rank_tol))
    return x, int(deficiency)


def trace_chain_table(R, S, Ls):
    """``T[m, n] = Tr[R S L_m S L_n S]`` for a stack of coefficient matrices."""
    return _impl.trace_chain_table(_c(R), _c(S), _c(Ls))


def eigen_qfi_table(p, dmus, floor):
    """Eigenbasis sum ``sum_ij 4 p_i d^m_ij d^n_ji / (p_i + p_j)^2`` over the support.

    Also returns, per parameter, the squared weight of derivative entries
    that fell below ``floor``.
    """
    return _impl.eigen_qfi_table(
        np.ascontiguousarray(p, dtype=np.float64), _c(dmus), float(floor)
    )
