"""SLDs, QFI matrix and averaged SLD commutators in a non-orthogonal basis.

A finite-rank state is written as ``rho = sum_ij R_ij |psi_i><psi_j|`` over a
linearly independent but generally non-orthogonal set of kets. The Gramian
``S_ij = <psi_i|psi_j>`` plays the role of a metric: the operator product
``A B`` has coefficient matrix ``A @ S @ B`` and ``Tr[A] = Tr[A @ S]``. With it
the SLD equation ``2 d_mu rho = rho L_mu + L_mu rho`` becomes the matrix
equation ``2 D = L S R + R S L`` and ``H + i Gamma = Tr[R S L_m S L_n S]``.
"""

from dataclasses import dataclass, field
from typing import Callable, Hashable, Optional, Sequence

import numpy as np

from . import kernels
from .errors import (
    BadWeight,
    DimensionMismatch,
    EmptyBasis,
    IndexOutOfRange,
    ModelInvariantViolation,
    SingularMetric,
    SingularQfi,
    SolverFailure,
)
from .linalg import (
    DEFAULT_RANK_TOL,
    as_cmatrix,
    condition_number,
    hermiticity_error,
    hermitize,
    lyapunov_lstsq,
    psd_sqrt,
)

DEFAULT_COND_CAP = 1e12


# --------------------------------------------------------------------------
# bases


@dataclass(frozen=True)
class BasisDescriptor:
    """Symbolic name of one basis ket.

    ``label`` is opaque to the engine; only the overlap oracle interprets it.
    """

    label: Hashable
    derivative_order: int = 0
    derivative_parameter: Optional[int] = None


Overlap = Callable[[BasisDescriptor, BasisDescriptor], complex]


@dataclass(frozen=True)
class BasisSet:
    descriptors: tuple
    overlap: Overlap
    discarded: tuple = ()

    def __post_init__(self):
        labels = [d.label for d in self.descriptors]
        if len(set(labels)) != len(labels):
            raise ValueError("basis labels must be unique")

    def __len__(self):
        return len(self.descriptors)

    def index(self, label):
        for i, d in enumerate(self.descriptors):
            if d.label == label:
                return i
        raise KeyError(label)


def _gram(descriptors, overlap):
    n = len(descriptors)
    S = np.empty((n, n), dtype=np.complex128)
    for i, di in enumerate(descriptors):
        for j in range(i, n):
            S[i, j] = overlap(di, descriptors[j])
            S[j, i] = np.conj(S[i, j]) if j != i else S[i, i]
    return S


def gramian(basis: BasisSet) -> np.ndarray:
    """Gramian ``S_ij = <psi_i|psi_j>`` of ``basis``.

    Only the upper triangle is queried; the lower one follows by Hermiticity.
    """
    return _gram(basis.descriptors, basis.overlap)


def build_basis(
    candidates: Sequence[BasisDescriptor],
    overlap: Overlap,
    cond_cap: float = DEFAULT_COND_CAP,
) -> BasisSet:
    """Greedily keep each candidate whose addition leaves ``cond(S) <= cond_cap``.

    Candidates spanning the support of the state should come first, followed
    by the derivative kets. Rejected candidates end up in ``discarded``.
    """
    kept, discarded = [], []
    for cand in candidates:
        trial = kept + [cand]
        if condition_number(_gram(trial, overlap)) <= cond_cap:
            kept.append(cand)
        else:
            discarded.append(cand)
    if not kept:
        raise EmptyBasis("no candidate ket survived the conditioning test")
    return BasisSet(tuple(kept), overlap, tuple(discarded))


# --------------------------------------------------------------------------
# models and results


@dataclass(frozen=True)
class ModelMatrices:
    """Coefficients of ``rho`` (R), the Gramian (S) and ``d_mu rho`` (D[mu])."""

    R: np.ndarray
    S: np.ndarray
    D: tuple
    parameter_names: tuple = ()

    def __post_init__(self):
        R = as_cmatrix(self.R, "R")
        S = as_cmatrix(self.S, "S")
        D = tuple(as_cmatrix(d, "D") for d in self.D)
        n = S.shape[0]
        if S.shape != (n, n) or R.shape != (n, n) or any(d.shape != (n, n) for d in D):
            raise DimensionMismatch("R, S and every D must share one square shape")
        names = tuple(self.parameter_names) or tuple(f"p{k}" for k in range(len(D)))
        if len(names) != len(D):
            raise DimensionMismatch("one parameter name per derivative matrix")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "parameter_names", names)

    @property
    def dim(self):
        return self.S.shape[0]

    @property
    def n_params(self):
        return len(self.D)

    def check(self, psd_tol=1e-10, trace_tol=1e-10, herm_tol=1e-12):
        """Raise :class:`ModelInvariantViolation` if the matrices cannot describe a state."""
        S, R = self.S, self.R
        if hermiticity_error(S) > herm_tol * max(1.0, np.linalg.norm(S)):
            raise ModelInvariantViolation("Gramian is not Hermitian")
        if hermiticity_error(R) > herm_tol * max(1.0, np.linalg.norm(R)):
            raise ModelInvariantViolation("R is not Hermitian")
        root = psd_sqrt(S)
        spec = np.linalg.eigvalsh(hermitize(root @ R @ root))
        if spec[0] < -psd_tol:
            raise ModelInvariantViolation(f"state has negative eigenvalue {spec[0]:.3e}")
        tr = np.trace(R @ S)
        if abs(tr - 1.0) > trace_tol:
            raise ModelInvariantViolation(f"Tr[R S] = {tr:.12g}, expected 1")
        for name, d in zip(self.parameter_names, self.D):
            if hermiticity_error(d) > herm_tol * max(1.0, np.linalg.norm(d)):
                raise ModelInvariantViolation(f"D[{name}] is not Hermitian")
            if abs(np.trace(d @ S)) > trace_tol:
                raise ModelInvariantViolation(f"D[{name}] is not traceless")
        return self

    def select(self, indices):
        """Same state with only the derivatives listed in ``indices``."""
        return ModelMatrices(
            self.R,
            self.S,
            tuple(self.D[i] for i in indices),
            tuple(self.parameter_names[i] for i in indices),
        )

    def permuted(self, perm):
        """Same model with the basis kets reordered by ``perm``."""
        P = np.asarray(perm)
        sub = np.ix_(P, P)
        return ModelMatrices(
            self.R[sub], self.S[sub], tuple(d[sub] for d in self.D), self.parameter_names
        )


@dataclass(frozen=True)
class SldSolution:
    L: tuple
    residuals: tuple
    rank_deficiencies: tuple
    model: Optional[ModelMatrices] = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class QfiResult:
    H: np.ndarray
    Gamma: np.ndarray
    imaginary_leakage: float = 0.0
    parameter_names: tuple = ()

    def entry(self, a, b):
        names = list(self.parameter_names)
        return self.H[names.index(a), names.index(b)]


@dataclass(frozen=True)
class WeightedBound:
    G: np.ndarray
    M: int
    bound: float


# --------------------------------------------------------------------------
# SLDs and QFI


def lyapunov_residual(model: ModelMatrices, L, mu):
    S, R = model.S, model.R
    return float(np.linalg.norm(L @ S @ R + R @ S @ L - 2.0 * model.D[mu]))


def solve_slds(
    model: ModelMatrices, rank_tol=DEFAULT_RANK_TOL, check=True, trace_tol=1e-10
) -> SldSolution:
    """Minimum-norm Hermitian solutions of ``2 D = L S R + R S L``, one per parameter.

    ``trace_tol`` is forwarded to :meth:`ModelMatrices.check`; finite-difference
    derivatives typically need about ``1e-8``.
    """
    if check:
        model.check(trace_tol=trace_tol)
    SR = model.S @ model.R
    RS = model.R @ model.S
    Ls, residuals, deficiencies = [], [], []
    for mu, d in enumerate(model.D):
        sol = lyapunov_lstsq(SR, RS, 2.0 * d, rank_tol)
        L = hermitize(sol.X)
        res = lyapunov_residual(model, L, mu)
        if not np.isfinite(res) or res > 1e-8 * max(1.0, np.linalg.norm(d)):
            raise SolverFailure(
                f"SLD for {model.parameter_names[mu]!r}: residual {res:.3e}; "
                "the derivative leaves the support of the state"
            )
        Ls.append(L)
        residuals.append(res)
        deficiencies.append(sol.rank_deficiency)
    return SldSolution(tuple(Ls), tuple(residuals), tuple(deficiencies), model)


def _split_table(T):
    sym = 0.5 * (T + T.T)
    anti = 0.5 * (T - T.T)
    H = sym.real
    Gamma = anti.imag
    leak = 0.0
    if T.size:
        leak = float(max(np.abs(sym.imag).max(), np.abs(anti.real).max()))
    return H, Gamma, leak


def qfi_gamma(model: ModelMatrices, slds: SldSolution) -> QfiResult:
    """``H + i Gamma = Tr[R S L_m S L_n S]`` split into its exact real parts.

    Whatever should vanish by symmetry (imaginary symmetric part, real
    antisymmetric part) is reported as ``imaginary_leakage``.
    """
    if len(slds.L) != model.n_params:
        raise DimensionMismatch("one SLD per model parameter expected")
    if any(L.shape != model.S.shape for L in slds.L):
        raise DimensionMismatch("SLD and model dimensions differ")
    if not slds.L:
        empty = np.zeros((0, 0))
        return QfiResult(empty, empty, 0.0, model.parameter_names)
    T = kernels.trace_chain_table(model.R, model.S, np.stack(slds.L))
    H, Gamma, leak = _split_table(T)
    return QfiResult(H, Gamma, leak, model.parameter_names)


def qfi(model: ModelMatrices, rank_tol=DEFAULT_RANK_TOL, trace_tol=1e-10):
    """Solve the SLDs and evaluate the QFI in one step. Returns ``(QfiResult, SldSolution)``."""
    slds = solve_slds(model, rank_tol, trace_tol=trace_tol)
    return qfi_gamma(model, slds), slds


def sld_mean(model: ModelMatrices, L):
    """``Tr[rho L]``, which vanishes for a genuine SLD."""
    return complex(np.trace(model.R @ model.S @ L @ model.S))


# --------------------------------------------------------------------------
# basis manipulation


def embed_zero_padded(small, index_map, full_dim):
    """Place ``small`` at rows/columns ``index_map`` of a ``full_dim`` zero matrix."""
    A = as_cmatrix(small, "small")
    idx = list(index_map)
    if A.shape != (len(idx), len(idx)):
        raise DimensionMismatch(f"{A.shape} matrix cannot use {len(idx)} positions")
    if len(set(idx)) != len(idx):
        raise IndexOutOfRange("index_map must be injective")
    if any(not 0 <= i < full_dim for i in idx):
        raise IndexOutOfRange(f"index_map {idx} out of range for dimension {full_dim}")
    out = np.zeros((full_dim, full_dim), dtype=np.complex128)
    out[np.ix_(idx, idx)] = A
    return out


def to_tilde(A, S):
    """Braket matrix ``<psi_k|A|psi_l>`` from coefficient matrix ``A``."""
    S = as_cmatrix(S, "S")
    return S @ as_cmatrix(A, "A") @ S


def from_tilde(Atilde, S, cond_cap=DEFAULT_COND_CAP):
    """Coefficient matrix from braket matrix: ``S^-1 Atilde S^-1``."""
    S = as_cmatrix(S, "S")
    if condition_number(S) > cond_cap:
        raise SingularMetric("Gramian is singular at the condition cap")
    Sinv = np.linalg.inv(S)
    return Sinv @ as_cmatrix(Atilde, "Atilde") @ Sinv


def numeric_derivatives(
    tilde_rho: Callable[[np.ndarray], np.ndarray],
    S,
    point,
    step=None,
    cond_cap=DEFAULT_COND_CAP,
):
    """Central-difference ``D`` matrices for models without analytic derivatives.

    ``tilde_rho(lam)`` must return ``<psi_k|rho(lam)|psi_l>`` with the kets
    frozen at ``point``. The default step is ``1e-6 * max(1, |lam_mu|)``.
    """
    lam = np.asarray(point, dtype=float)
    S = as_cmatrix(S, "S")
    out = []
    for mu in range(lam.size):
        h = 1e-6 * max(1.0, abs(lam[mu])) if step is None else float(step)
        e = np.zeros_like(lam)
        e[mu] = h
        dtilde = (as_cmatrix(tilde_rho(lam + e)) - as_cmatrix(tilde_rho(lam - e))) / (2 * h)
        out.append(hermitize(from_tilde(dtilde, S, cond_cap)))
    return tuple(out)


# --------------------------------------------------------------------------
# reparameterization and bounds


def reparameterize(result: QfiResult, slds: SldSolution, jacobian, names=None):
    """Move QFI and SLDs to new parameters.

    ``jacobian[m, n] = d(old_n) / d(new_m)``. The new QFI is ``B H B^T``; the
    new SLDs are ``sum_n B[m, n] L_n`` and Gamma is recomputed from them.
    """
    B = np.asarray(jacobian, dtype=float)
    if B.ndim != 2 or B.shape[1] != len(slds.L) or result.H.shape[0] != B.shape[1]:
        raise DimensionMismatch(f"Jacobian shape {B.shape} does not fit {len(slds.L)} parameters")
    if not np.all(np.isfinite(B)):
        raise ValueError("Jacobian has non-finite entries")
    names = tuple(names) if names else tuple(f"q{k}" for k in range(B.shape[0]))
    old = np.stack(slds.L)
    new_L = tuple(np.tensordot(B, old, axes=1))
    H = B @ result.H @ B.T
    model = slds.model
    if model is None:
        raise ValueError("SLD solution carries no model; Gamma cannot be recomputed")
    new_D = tuple(np.tensordot(B, np.stack(model.D), axes=1))
    new_model = ModelMatrices(model.R, model.S, new_D, names)
    residuals = tuple(lyapunov_residual(new_model, L, m) for m, L in enumerate(new_L))
    new_slds = SldSolution(new_L, residuals, slds.rank_deficiencies, new_model)
    recomputed = qfi_gamma(new_model, new_slds)
    new_result = QfiResult(0.5 * (H + H.T), recomputed.Gamma, recomputed.imaginary_leakage, names)
    return new_result, new_slds


def scalar_qcrb(H, G=None, M=1, cond_cap=DEFAULT_COND_CAP):
    """Weighted bound ``Tr[G H^-1] / M`` on the weighted estimator variance."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    n = H.shape[0]
    G = np.eye(n) if G is None else np.atleast_2d(np.asarray(G, dtype=float))
    if G.shape != H.shape:
        raise DimensionMismatch(f"weight shape {G.shape} vs QFI shape {H.shape}")
    if int(M) != M or M < 1:
        raise BadWeight("copy count M must be a positive integer")
    if not np.allclose(G, G.T, atol=1e-12) or np.linalg.eigvalsh(G)[0] <= 0:
        raise BadWeight("weight matrix must be symmetric positive definite")
    if not np.all(np.isfinite(H)) or condition_number(H) > cond_cap:
        raise SingularQfi("QFI matrix is singular; the bound diverges")
    bound = float(np.trace(G @ np.linalg.inv(H)) / M)
    return WeightedBound(G, int(M), bound)
