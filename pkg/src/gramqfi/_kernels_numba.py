"""Loop-level numba implementations of the hot kernels.

Same contracts as :mod:`gramqfi._kernels_numpy`; inputs must be C-contiguous
complex128 (float64 for eigenvalues).
"""

import numpy as np

from ._accel import njit


@njit(cache=True)
def kron_sylvester(A, Bm):
    p = Bm.shape[0]
    q = A.shape[0]
    K = np.zeros((p * q, p * q), dtype=np.complex128)
    for i in range(p):
        for j in range(q):
            row = i * q + j
            for k in range(p):
                K[row, k * q + j] += Bm[i, k]
            for k in range(q):
                K[row, i * q + k] += A[k, j]
    return K


@njit(cache=True)
def minnorm_lstsq(K, rhs, rank_tol):
    U, sv, Vh = np.linalg.svd(K)
    ncol = K.shape[1]
    x = np.zeros(ncol, dtype=np.complex128)
    if sv.size == 0 or sv[0] == 0.0:
        return x, ncol
    cut = rank_tol * sv[0]
    kept = 0
    for r in range(sv.size):
        if sv[r] <= cut:
            continue
        kept += 1
        c = 0j
        for i in range(U.shape[0]):
            c += np.conj(U[i, r]) * rhs[i]
        c /= sv[r]
        for j in range(ncol):
            x[j] += np.conj(Vh[r, j]) * c
    return x, ncol - kept


@njit(cache=True)
def trace_chain_table(R, S, Ls):
    N = Ls.shape[0]
    SRS = S @ R @ S
    left = np.empty_like(Ls)
    right = np.empty_like(Ls)
    for m in range(N):
        left[m] = SRS @ Ls[m]
        right[m] = S @ Ls[m]
    n = S.shape[0]
    T = np.zeros((N, N), dtype=np.complex128)
    for a in range(N):
        for b in range(N):
            acc = 0j
            for i in range(n):
                for k in range(n):
                    acc += left[a, i, k] * right[b, k, i]
            T[a, b] = acc
    return T


@njit(cache=True)
def eigen_qfi_table(p, dmus, floor):
    N = dmus.shape[0]
    n = p.shape[0]
    T = np.zeros((N, N), dtype=np.complex128)
    dropped = np.zeros(N)
    for i in range(n):
        for j in range(n):
            tot = p[i] + p[j]
            if tot > floor:
                w = 4.0 * p[i] / (tot * tot)
                for a in range(N):
                    for b in range(N):
                        T[a, b] += w * dmus[a, i, j] * dmus[b, j, i]
            else:
                for a in range(N):
                    dropped[a] += abs(dmus[a, i, j]) ** 2
    return T, dropped
