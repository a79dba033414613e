"""Noisy cat-state models built on closed-form coherent-state overlaps.

The probe is ``N [|a><a| + |-a><-a| + c (|a><-a| + |-a><a|)]`` with real
amplitude ``a``, coherence ``0 <= c <= 1`` and ``N = 1 / (2 (1 + s c))``,
``s = exp(-2 a^2)``. Nothing here touches a truncated Fock space: every
matrix element is an analytic function of the amplitudes.
"""

import math
from dataclasses import dataclass

import numpy as np

from .engine import (
    DEFAULT_COND_CAP,
    BasisDescriptor,
    ModelMatrices,
    build_basis,
    embed_zero_padded,
    gramian,
    qfi,
    reparameterize,
)
from .errors import DegenerateBasis, DomainError, RankChange, UnsupportedDerivativeOrder

AMPLITUDE = "amplitude"
DISPLACEMENT = "displacement"


# --------------------------------------------------------------------------
# configurations


@dataclass(frozen=True)
class CatConfig:
    c: float
    alpha: float
    epsilon: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.c <= 1.0):
            raise DomainError(f"coherence c={self.c} outside [0, 1]")
        if not (math.isfinite(self.alpha) and math.isfinite(self.epsilon)):
            raise DomainError("alpha and epsilon must be finite")

    @property
    def s(self):
        """Overlap ``<a|-a> = exp(-2 a^2)``."""
        return math.exp(-2.0 * self.alpha**2)

    @property
    def norm(self):
        return 1.0 / (2.0 * (1.0 + self.s * self.c))


@dataclass(frozen=True)
class LossyConfig:
    """Pure cat of amplitude ``alpha0`` after accumulated loss ``gammabar = gamma * t``."""

    alpha0: float
    gammabar: float

    def __post_init__(self):
        if not self.gammabar >= 0.0:
            raise DomainError(f"gammabar={self.gammabar} must be >= 0")
        if not math.isfinite(self.alpha0):
            raise DomainError("alpha0 must be finite")


@dataclass(frozen=True)
class SqueezedConfig:
    r: float
    gammabar: float = 0.0

    def __post_init__(self):
        if not self.r >= 0.0:
            raise DomainError(f"squeezing r={self.r} must be >= 0")
        if not self.gammabar >= 0.0:
            raise DomainError(f"gammabar={self.gammabar} must be >= 0")


# --------------------------------------------------------------------------
# overlaps


def coherent_overlap(a, b, da=0, db=0, kind=AMPLITUDE):
    """``<d^da a|d^db b>`` for real coherent amplitudes ``a`` and ``b``.

    ``kind="amplitude"``: derivatives act on each ket's own amplitude,
    ``d_b|b> = (a^dag - b)|b>``.
    ``kind="displacement"``: derivatives are ``d_eps D(i eps)`` at any ``eps``,
    i.e. multiplication by ``i (a + a^dag)``; the displacement itself cancels.
    """
    if da not in (0, 1) or db not in (0, 1):
        raise UnsupportedDerivativeOrder(f"derivative orders ({da}, {db}) not in {{0, 1}}")
    g = math.exp(-0.5 * (a - b) ** 2)
    if kind == AMPLITUDE:
        if da == 0 and db == 0:
            return complex(g)
        if da == 0:
            return complex((a - b) * g)
        if db == 0:
            return complex((b - a) * g)
        return complex((1.0 - (a - b) ** 2) * g)
    if kind == DISPLACEMENT:
        if da == 0 and db == 0:
            return complex(g)
        if da == 0:
            return 1j * (a + b) * g
        if db == 0:
            return -1j * (a + b) * g
        return complex(((a + b) ** 2 + 1.0) * g)
    raise ValueError(f"unknown overlap kind {kind!r}")


def cat_descriptors(kind=AMPLITUDE, with_derivatives=True):
    """``|a>, |-a>`` followed, optionally, by their parameter derivatives."""
    out = [BasisDescriptor((kind, +1, 0)), BasisDescriptor((kind, -1, 0))]
    if with_derivatives:
        out += [
            BasisDescriptor((kind, +1, 1), 1, 0),
            BasisDescriptor((kind, -1, 1), 1, 0),
        ]
    return out


def cat_overlap(alpha, kind=AMPLITUDE):
    """Overlap oracle for descriptors from :func:`cat_descriptors`.

    For amplitude derivatives the ket ``|sign * alpha>`` picks up the chain
    factor ``sign`` from ``d/d alpha``.
    """

    def overlap(bra, ket):
        _, si, oi = bra.label
        _, sj, oj = ket.label
        value = coherent_overlap(si * alpha, sj * alpha, oi, oj, kind)
        if kind == AMPLITUDE:
            value *= si**oi * sj**oj
        return value

    return overlap


def cat_basis(alpha, kind=AMPLITUDE, with_derivatives=True, cond_cap=DEFAULT_COND_CAP):
    return build_basis(cat_descriptors(kind, with_derivatives), cat_overlap(alpha, kind), cond_cap)


def _full_basis(alpha, kind, with_derivatives):
    basis = cat_basis(alpha, kind, with_derivatives)
    if basis.discarded:
        raise DegenerateBasis(
            f"cat basis is linearly dependent at alpha={alpha} "
            f"({len(basis.discarded)} kets rejected)"
        )
    return basis


# --------------------------------------------------------------------------
# model builders


def _coherence_block(c):
    return np.array([[1.0, c], [c, 1.0]], dtype=np.complex128)


def build_c_model(cfg: CatConfig, allow_rank_change=False) -> ModelMatrices:
    """Two-ket model ``{|a>, |-a>}`` for the coherence parameter ``c``.

    ``c = 1`` is a rank change (the QFI diverges) and raises
    :class:`RankChange` unless ``allow_rank_change`` is set.
    """
    if cfg.c >= 1.0 and not allow_rank_change:
        raise RankChange("c = 1: the state changes rank and H_cc diverges")
    S = gramian(_full_basis(cfg.alpha, AMPLITUDE, False))
    N, s = cfg.norm, cfg.s
    R = N * _coherence_block(cfg.c)
    D = N * np.array([[0, 1], [1, 0]], dtype=np.complex128) - 2 * s * N * R
    return ModelMatrices(R, S, (D,), ("c",))


def build_alpha_model(cfg: CatConfig) -> ModelMatrices:
    """Four-ket model ``{|a>, |-a>, d|a>, d|-a>}`` for ``(c, alpha)`` jointly."""
    S = gramian(_full_basis(cfg.alpha, AMPLITUDE, True))
    N, s, c, a = cfg.norm, cfg.s, cfg.c, cfg.alpha
    K = N * _coherence_block(c)
    R = embed_zero_padded(K, (0, 1), 4)
    Dc_small = N * np.array([[0, 1], [1, 0]], dtype=np.complex128) - 2 * s * N * K
    Dc = embed_zero_padded(Dc_small, (0, 1), 4)
    Da = np.zeros((4, 4), dtype=np.complex128)
    Da[0:2, 2:4] = K
    Da[2:4, 0:2] = K
    Da += (4 * a * s * c / (1 + s * c)) * R
    return ModelMatrices(R, S, (Dc, Da), ("c", "alpha"))


def build_displacement_model(cfg: CatConfig) -> ModelMatrices:
    """Four-ket model ``{D|a>, D|-a>, d_eps D|a>, d_eps D|-a>}``, ``D = D(i eps)``."""
    S = gramian(_full_basis(cfg.alpha, DISPLACEMENT, True))
    K = cfg.norm * _coherence_block(cfg.c)
    R = embed_zero_padded(K, (0, 1), 4)
    De = np.zeros((4, 4), dtype=np.complex128)
    De[0:2, 2:4] = K
    De[2:4, 0:2] = K
    return ModelMatrices(R, S, (De,), ("epsilon",))


# --------------------------------------------------------------------------
# fixed-frame state matrices (finite-difference references)


def _braket(beta, gamma):
    # <beta|gamma> for real beta and complex gamma
    return np.exp(-0.5 * beta**2 - 0.5 * abs(gamma) ** 2 + beta * gamma)


def alpha_model_tilde_rho(cfg: CatConfig):
    """``lam=(c, alpha) -> <psi_k|rho(lam)|psi_l>`` with kets frozen at ``cfg``."""
    descriptors = cat_descriptors(AMPLITUDE, True)

    def tilde(lam):
        c2, a2 = float(lam[0]), float(lam[1])
        st = CatConfig(min(max(c2, 0.0), 1.0), a2)
        # columns: <psi_k| sigma a2>
        V = np.empty((4, 2), dtype=np.complex128)
        for k, d in enumerate(descriptors):
            _, sk, ok = d.label
            for col, sigma in enumerate((+1, -1)):
                V[k, col] = coherent_overlap(sk * cfg.alpha, sigma * a2, ok, 0) * sk**ok
        N = 1.0 / (2.0 * (1.0 + st.s * c2))
        return V @ (N * _coherence_block(c2)) @ V.conj().T

    return tilde


def displacement_model_tilde_rho(cfg: CatConfig):
    """``lam=(eps,) -> <psi_k|rho(eps)|psi_l>`` with kets frozen at ``cfg.epsilon``."""
    descriptors = cat_descriptors(DISPLACEMENT, True)

    def tilde(lam):
        delta = float(lam[0]) - cfg.epsilon
        V = np.empty((4, 2), dtype=np.complex128)
        for k, d in enumerate(descriptors):
            _, sk, ok = d.label
            bk = sk * cfg.alpha
            for col, sigma in enumerate((+1, -1)):
                b = sigma * cfg.alpha
                # D(i delta)|b> = exp(i delta b) |b + i delta>
                g = b + 1j * delta
                amp = np.exp(1j * delta * b) * _braket(bk, g)
                if ok:
                    amp *= -1j * (bk + g)
                V[k, col] = amp
        return V @ (cfg.norm * _coherence_block(cfg.c)) @ V.conj().T

    return tilde


# --------------------------------------------------------------------------
# closed forms


def closed_form_sld_c(cfg: CatConfig):
    """Analytic SLD coefficients for ``c`` in the basis ``{|a>, |-a>}``."""
    if cfg.c >= 1.0:
        raise RankChange("c = 1: the SLD for c does not exist")
    c, s, N = cfg.c, cfg.s, cfg.norm
    den = (1 - c**2) * (1 - s**2)
    diag = -2 * (c * s**2 + 2 * s + c) / den
    off = 2 * (s**2 + 2 * c * s + 1) / den
    return N * np.array([[diag, off], [off, diag]], dtype=np.complex128)


def closed_form_sld_displacement(cfg: CatConfig):
    """One analytic SLD (among many) for the displacement model."""
    a, s, c = cfg.alpha, cfg.s, cfg.c
    u = 4j * a / (s * (1 + s * c))
    v = 2 / s
    w = 1j / (s * a)
    return np.array(
        [
            [0, -u, 0, v],
            [u, 0, v, 0],
            [0, v, 0, w],
            [v, 0, -w, 0],
        ],
        dtype=np.complex128,
    )


def closed_form_qfi_cat(cfg: CatConfig):
    """Analytic QFI matrix for ``(c, alpha)`` and ``Gamma_c,alpha`` (which is zero)."""
    if cfg.c >= 1.0:
        raise RankChange("c = 1: H_cc diverges")
    c, a = cfg.c, cfg.alpha
    e2 = math.exp(-2 * a**2)
    e4 = math.exp(-4 * a**2)
    q = (1 + c * e2) ** 2
    h_cc = (1 - e4) / ((1 - c**2) * q)
    h_aa = 4 * (1 - c**2 * e4 + 4 * c * a**2 * e2) / q
    h_ca = -4 * a * e2 / q
    return np.array([[h_cc, h_ca], [h_ca, h_aa]]), 0.0


def closed_form_qfi_displacement(cfg: CatConfig):
    c, a = cfg.c, cfg.alpha
    e2 = math.exp(-2 * a**2)
    q = (1 + c * e2) ** 2
    return 4 * (4 * a**2 * (c**2 + c * e2) + q) / q


def qfi_pure_cat_displacement(alpha):
    e2 = math.exp(-2 * alpha**2)
    return 4 * (4 * alpha**2 + 1 + e2) / (1 + e2)


def qfi_squeezed(cfg: SqueezedConfig):
    """Displacement QFI of a squeezed vacuum after loss ``gammabar``."""
    e2r = math.exp(2 * cfg.r)
    eg = math.exp(-cfg.gammabar)
    return 4 * e2r / (e2r * (1 - eg) + eg)


def squeezed_limit(gammabar):
    """Large-squeezing limit ``4 / (1 - exp(-gammabar))``; infinite without loss."""
    if gammabar <= 0:
        return math.inf
    return 4.0 / -math.expm1(-gammabar)


def mean_photon_cat(cfg: CatConfig):
    cs = cfg.c * cfg.s
    return cfg.alpha**2 * (1 - cs) / (1 + cs)


def mean_photon_pure_cat(alpha):
    return mean_photon_cat(CatConfig(1.0, alpha))


def mean_photon_squeezed(r):
    return math.sinh(r) ** 2


# --------------------------------------------------------------------------
# lossy channel


def lossy_map(cfg: LossyConfig) -> CatConfig:
    """State parameters ``(c, alpha)`` of a pure cat after amplitude damping."""
    alpha = cfg.alpha0 * math.exp(-cfg.gammabar / 2)
    c = math.exp(2 * cfg.alpha0**2 * math.expm1(-cfg.gammabar))
    return CatConfig(c, alpha)


def lossy_jacobian(cfg: LossyConfig):
    """``B[m, n] = d(c, alpha)_n / d(gammabar, alpha0)_m``."""
    a0, g = cfg.alpha0, cfg.gammabar
    st = lossy_map(cfg)
    eg = math.exp(-g)
    return np.array(
        [
            [st.c * (-2 * a0**2 * eg), -st.alpha / 2],
            [st.c * (4 * a0 * math.expm1(-g)), math.exp(-g / 2)],
        ]
    )


def lossy_tilde_rho(cfg: LossyConfig):
    """``(gammabar, alpha0) -> <psi_k|rho|psi_l>`` with kets frozen at ``lossy_map(cfg)``."""
    inner = alpha_model_tilde_rho(lossy_map(cfg))

    def tilde(lam):
        st = lossy_map(LossyConfig(float(lam[1]), max(float(lam[0]), 0.0)))
        return inner((st.c, st.alpha))

    return tilde


def lossy_cat_qfi(cfg: LossyConfig):
    """QFI and SLDs for ``(gammabar, alpha0)`` via the Jacobian of the lossy map."""
    st = lossy_map(cfg)
    if st.c >= 1.0:
        raise RankChange("gammabar = 0 (or alpha0 = 0) leaves a pure cat; H diverges")
    result, slds = qfi(build_alpha_model(st))
    return reparameterize(result, slds, lossy_jacobian(cfg), ("gammabar", "alpha0"))


def lossy_displacement_qfi(cfg: LossyConfig):
    """Closed-form displacement QFI of a pure cat after loss."""
    return closed_form_qfi_displacement(lossy_map(cfg))
