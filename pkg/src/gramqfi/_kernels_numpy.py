"""Vectorized numpy implementations of the hot kernels."""

import numpy as np


def kron_sylvester(A, Bm):
    p = Bm.shape[0]
    q = A.shape[0]
    return np.kron(Bm, np.eye(q)) + np.kron(np.eye(p), A.T)


def minnorm_lstsq(K, rhs, rank_tol):
    U, sv, Vh = np.linalg.svd(K)
    smax = sv[0] if sv.size else 0.0
    if smax == 0.0:
        return np.zeros(K.shape[1], dtype=np.complex128), K.shape[1]
    keep = sv > rank_tol * smax
    coeff = (U.conj().T @ rhs)[: sv.size]
    coeff = np.where(keep, coeff / np.where(keep, sv, 1.0), 0.0)
    x = Vh[: sv.size].conj().T @ coeff
    return x, int(K.shape[1] - np.count_nonzero(keep))


def trace_chain_table(R, S, Ls):
    # T[m, n] = Tr[R S L_m S L_n S]
    SRS = S @ R @ S
    left = np.einsum("ij,mjk->mik", SRS, Ls)
    right = np.einsum("ij,njk->nik", S, Ls)
    return np.einsum("mik,nki->mn", left, right)


def eigen_qfi_table(p, dmus, floor):
    # p: eigenvalues, dmus: (N, n, n) derivative components in the eigenbasis
    tot = p[:, None] + p[None, :]
    support = tot > floor
    weight = np.where(support, 4.0 * p[:, None] / np.where(support, tot, 1.0) ** 2, 0.0)
    table = np.einsum("ij,mij,nji->mn", weight, dmus, dmus)
    dropped = np.einsum("mij->m", np.where(support, 0.0, np.abs(dmus) ** 2))
    return table, dropped
