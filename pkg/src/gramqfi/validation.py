"""Self-check suite: closed forms, oracle equivalence, invariances and figure shapes.

Each check returns a :class:`CheckResult`; :func:`run_checks` drives them for
the ``validate`` command. Tolerances can be overridden per run.
"""

import time
import warnings
from dataclasses import dataclass
from typing import Callable, Dict, Optional

import mpmath
import numpy as np

from . import cats
from .cats import CatConfig, LossyConfig, SqueezedConfig
from .engine import (
    ModelMatrices,
    lyapunov_residual,
    numeric_derivatives,
    qfi,
    qfi_gamma,
    sld_mean,
    solve_slds,
)
from .linalg import condition_number, hermitize
from . import kernels
from .oracle import oracle_qfi

C_GRID = tuple(round(0.1 * k, 10) for k in range(10))
ALPHA_GRID = tuple(round(0.3 * k, 10) for k in range(1, 11))
LOSSY_POINTS = tuple((a0, g) for a0 in (0.5, 1.0, 2.0) for g in (0.1, 0.3, 0.5))
FIG1_GAMMAS = (0.0, 0.1, 0.2, 0.3, 0.5)
FIG2_GAMMAS = (0.0, 0.1, 0.5)


@dataclass
class CheckResult:
    name: str
    passed: bool
    max_error: float
    tol: Optional[float]
    detail: str = ""
    seconds: float = 0.0

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        tol = "-" if self.tol is None else f"{self.tol:.1e}"
        return f"[{tag}] {self.name:<26} max_err={self.max_error:.3e} tol={tol} ({self.seconds:.2f}s) {self.detail}"


def _rel(x, ref):
    return abs(x - ref) / abs(ref) if ref != 0 else abs(x)


def grid():
    return [CatConfig(c, a) for c in C_GRID for a in ALPHA_GRID]


# --------------------------------------------------------------------------
# synthetic models


def random_synthetic_model(rng, dim, rank, n_params=2, max_cond=1e6):
    """Random finite-rank model on non-orthogonal kets.

    Returns ``(model, kets)`` where the columns of ``kets`` live in an ambient
    space of dimension ``dim + 2``. Each derivative has the form
    ``A rho + rho A^dag`` (minus the trace correction), so its
    kernel-kernel block vanishes and an exact SLD exists.
    """
    while True:
        kets = rng.normal(size=(dim + 2, dim)) + 1j * rng.normal(size=(dim + 2, dim))
        kets /= np.linalg.norm(kets, axis=0)
        S = kets.conj().T @ kets
        if condition_number(S) <= max_cond:
            break
    W = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    R = W @ W.conj().T
    R /= np.trace(R @ S).real
    D = []
    for _ in range(n_params):
        A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        d = A @ R + R @ A.conj().T
        d -= np.trace(d @ S) * R
        D.append(hermitize(d))
    return ModelMatrices(hermitize(R), hermitize(S), tuple(D)), kets


def synthetic_suite(n=200, seed=20190317):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        dim = int(rng.integers(1, 7))
        rank = int(rng.integers(1, dim + 1))
        out.append(random_synthetic_model(rng, dim, rank, int(rng.integers(1, 4)))[0])
    return out


def cat_suite():
    models = []
    for cfg in grid():
        models.append(cats.build_c_model(cfg))
        models.append(cats.build_alpha_model(cfg))
        models.append(cats.build_displacement_model(cfg))
    for a in ALPHA_GRID:
        models.append(cats.build_alpha_model(CatConfig(1.0, a)).select([1]))
        models.append(cats.build_displacement_model(CatConfig(1.0, a)))
    return models


def kernel_perturbation(model, L, rng, rank_tol=1e-10):
    """A Hermitian direction ``K`` with ``K S R + R S K = 0``, or ``None``."""
    SR, RS = model.S @ model.R, model.R @ model.S
    K = kernels.kron_sylvester(SR, RS)
    _, sv, Vh = np.linalg.svd(K)
    null = Vh[sv <= rank_tol * sv[0]].conj()
    if null.shape[0] == 0:
        return None
    coeff = rng.normal(size=null.shape[0]) + 1j * rng.normal(size=null.shape[0])
    n = model.dim
    P = hermitize((coeff @ null).reshape(n, n))
    if np.linalg.norm(P) < 1e-12:
        return None
    return P * (max(1.0, np.linalg.norm(L)) / np.linalg.norm(P))


# --------------------------------------------------------------------------
# checks


def check_closed_form_hcc(tol=1e-8):
    t0 = time.perf_counter()
    err = max(
        _rel(qfi(cats.build_c_model(cfg))[0].H[0, 0], cats.closed_form_qfi_cat(cfg)[0][0, 0])
        for cfg in grid()
    )
    dt = time.perf_counter() - t0
    return CheckResult("closed-form-hcc", err <= tol and dt <= 1.0, err, tol, f"grid time {dt:.3f}s")


def check_closed_form_alpha(tol=1e-8):
    err = 0.0
    for cfg in grid():
        H = qfi(cats.build_alpha_model(cfg))[0].H
        ref, _ = cats.closed_form_qfi_cat(cfg)
        err = max(err, _rel(H[1, 1], ref[1, 1]), _rel(H[0, 1], ref[0, 1]), _rel(H[1, 0], ref[1, 0]))
    return CheckResult("closed-form-alpha", err <= tol, err, tol, "H_aa and H_ca")


def check_weak_commutativity(tol=1e-10):
    err_grid = max(abs(qfi(cats.build_alpha_model(cfg))[0].Gamma[0, 1]) for cfg in grid())
    err_lossy = 0.0
    for a0, g in LOSSY_POINTS:
        res, slds = cats.lossy_cat_qfi(LossyConfig(a0, g))
        m = slds.model
        Lg, La = slds.L
        comm = Lg @ m.S @ La - La @ m.S @ Lg
        err_lossy = max(err_lossy, abs(sld_mean(m, comm)), 2 * abs(res.Gamma[0, 1]))
    err = max(err_grid, err_lossy)
    detail = f"(c, alpha) {err_grid:.1e}; (gammabar, alpha0) {err_lossy:.1e}"
    return CheckResult("weak-commutativity", err <= tol, err, tol, detail)


def check_displacement(tol=1e-8):
    err = 0.0
    for cfg in grid():
        H = qfi(cats.build_displacement_model(cfg))[0].H[0, 0]
        err = max(err, _rel(H, cats.closed_form_qfi_displacement(cfg)))
    err_pure = 0.0
    err_coh = 0.0
    for a in ALPHA_GRID:
        H = qfi(cats.build_displacement_model(CatConfig(1.0, a)))[0].H[0, 0]
        err_pure = max(err_pure, _rel(H, cats.qfi_pure_cat_displacement(a)))
        H0 = qfi(cats.build_displacement_model(CatConfig(0.0, a)))[0].H[0, 0]
        err_coh = max(err_coh, abs(H0 - 4.0))
    ok = err <= tol and err_pure <= tol and err_coh <= min(tol, 1e-10)
    detail = f"grid {err:.1e}; c=1 {err_pure:.1e}; c=0 |H-4| {err_coh:.1e}"
    return CheckResult("displacement", ok, max(err, err_pure, err_coh), tol, detail)


def printed_displacement_qfi_mp(cfg, dps=50):
    """Residual and QFI of the analytic displacement SLD in ``dps``-digit arithmetic.

    The analytic SLD has entries growing like ``exp(2 alpha^2)``; in double
    precision its QFI loses every digit to cancellation for ``alpha >~ 2``.
    Returns ``(residual, H)`` as floats.
    """
    with mpmath.workdps(dps):
        a = mpmath.mpf(cfg.alpha)
        c = mpmath.mpf(cfg.c)
        s = mpmath.exp(-2 * a**2)
        N = 1 / (2 * (1 + s * c))
        j = mpmath.mpc(0, 1)
        S = mpmath.matrix(
            [
                [1, s, 2 * j * a, 0],
                [s, 1, 0, -2 * j * a],
                [-2 * j * a, 0, 1 + 4 * a**2, s],
                [0, 2 * j * a, s, 1 + 4 * a**2],
            ]
        )
        R = mpmath.matrix(4, 4)
        D = mpmath.matrix(4, 4)
        for p, q, v in ((0, 0, 1), (0, 1, c), (1, 0, c), (1, 1, 1)):
            R[p, q] = N * v
            D[p, q + 2] = N * v
            D[p + 2, q] = N * v
        u = 4 * j * a / (s * (1 + s * c))
        v = 2 / s
        w = j / (s * a)
        L = mpmath.matrix([[0, -u, 0, v], [u, 0, v, 0], [0, v, 0, w], [v, 0, -w, 0]])
        residual = mpmath.mnorm(L * S * R + R * S * L - 2 * D, "f")
        chain = R * S * L * S * L * S
        H = sum(chain[k, k] for k in range(4))
        return float(residual), float(mpmath.re(H))


def check_sld_closed_forms(tol=1e-9):
    err_c = 0.0
    err_res = 0.0
    err_h = 0.0
    for cfg in grid():
        slds = solve_slds(cats.build_c_model(cfg))
        err_c = max(err_c, float(np.abs(slds.L[0] - cats.closed_form_sld_c(cfg)).max()))
        H = qfi(cats.build_displacement_model(cfg))[0].H[0, 0]
        residual, Hp = printed_displacement_qfi_mp(cfg)
        err_res = max(err_res, residual)
        err_h = max(err_h, abs(Hp - H))
    err = max(err_c, err_res, err_h)
    detail = f"L_c {err_c:.1e}; L_eps residual {err_res:.1e}; L_eps QFI {err_h:.1e}"
    return CheckResult("sld-closed-forms", err <= tol, err, tol, detail)


def _compare(a, b):
    scale = np.maximum(1.0, np.abs(b.H))
    eh = float(np.max(np.abs(a.H - b.H) / scale)) if a.H.size else 0.0
    eg = float(np.max(np.abs(a.Gamma - b.Gamma) / scale)) if a.Gamma.size else 0.0
    return max(eh, eg)


def check_oracle_equivalence(tol=1e-8):
    t0 = time.perf_counter()
    err_cat = max(_compare(oracle_qfi(m), qfi(m)[0]) for m in cat_suite())
    err_syn = max(_compare(oracle_qfi(m), qfi(m)[0]) for m in synthetic_suite())
    dt = time.perf_counter() - t0
    err = max(err_cat, err_syn)
    detail = f"cat {err_cat:.1e}; synthetic {err_syn:.1e}; {dt:.2f}s"
    return CheckResult("oracle-equivalence", err <= tol and dt <= 10.0, err, tol, detail)


def check_asymptotes(tol=None):
    e1 = max(
        abs(qfi(cats.build_c_model(CatConfig(c, 5.0)))[0].H[0, 0] - 1 / (1 - c**2))
        for c in C_GRID
    )
    e2 = 0.0
    for c in (0.2, 0.5, 1.0):
        cfg = CatConfig(c, 7.0)
        e2 = max(e2, _rel(qfi(cats.build_displacement_model(cfg))[0].H[0, 0], 16 * c**2 * cats.mean_photon_cat(cfg) + 4))
    e3 = _rel(cats.qfi_squeezed(SqueezedConfig(3.0, 0.5)), cats.squeezed_limit(0.5))
    t1, t2, t3 = (1e-6, 1e-3, 5e-3) if tol is None else (tol, tol, tol)
    ok = e1 <= t1 and e2 <= t2 and e3 <= t3
    detail = f"H_cc(5) {e1:.1e}/{t1:.0e}; disp(7) {e2:.1e}/{t2:.0e}; squeezed {e3:.1e}/{t3:.0e}"
    return CheckResult("asymptotes", ok, max(e1, e2, e3), tol, detail)


def lossy_cat_curve(gammabar, alpha0_grid):
    n = np.array([cats.mean_photon_cat(cats.lossy_map(LossyConfig(a, gammabar))) for a in alpha0_grid])
    H = np.array([cats.lossy_displacement_qfi(LossyConfig(a, gammabar)) for a in alpha0_grid])
    return n, H


def check_figure_shapes(tol=None):
    a0 = np.linspace(0.05, 4.0, 400)
    problems = []
    n, H = lossy_cat_curve(0.0, a0)
    if not (np.all(np.diff(n) > 0) and np.all(np.diff(H) > 0)):
        problems.append("gammabar=0 not strictly increasing")
    peaks = []
    for g in FIG1_GAMMAS[1:]:
        n, H = lossy_cat_curve(g, a0)
        k = int(np.argmax(H))
        if not 0 < k < a0.size - 1:
            problems.append(f"gammabar={g}: no interior maximum")
        peaks.append(n[k])
    if not all(b < a for a, b in zip(peaks, peaks[1:])):
        problems.append(f"peak locations {peaks} not decreasing")
    r = np.linspace(0.0, 3.0, 300)
    for g in FIG2_GAMMAS[1:]:
        Hs = np.array([cats.qfi_squeezed(SqueezedConfig(x, g)) for x in r])
        if not (np.all(np.diff(Hs) >= 0) and np.all(Hs < cats.squeezed_limit(g))):
            problems.append(f"squeezed gammabar={g} not saturating from below")
    tail = cats.lossy_displacement_qfi(LossyConfig(6.0, 0.5))
    e_tail = _rel(tail, 4.0)
    if e_tail > 0.05:
        problems.append(f"alpha0=6 tail {tail:.4f} not within 5% of 4")
    detail = "; ".join(problems) or "peaks at nbar " + ", ".join(f"{p:.3f}" for p in peaks)
    return CheckResult("figure-shapes", not problems, e_tail, 0.05, detail)


def check_gauge_invariance(tol=1e-8):
    rng = np.random.default_rng(7)
    models = [cats.build_alpha_model(CatConfig(c, a)) for c in (0.0, 0.5, 0.9) for a in (0.6, 1.5)]
    models += [cats.build_alpha_model(CatConfig(1.0, a)).select([1]) for a in (0.6, 1.5)]
    models += [cats.build_displacement_model(CatConfig(c, 1.2)) for c in (0.3, 1.0)]
    for _ in range(20):
        dim = int(rng.integers(3, 7))
        models.append(random_synthetic_model(rng, dim, int(rng.integers(1, dim)), 2)[0])
    err = 0.0
    tested = 0
    for m in models:
        res, slds = qfi(m)
        Ls = list(slds.L)
        for mu in range(m.n_params):
            if slds.rank_deficiencies[mu] == 0:
                continue
            P = kernel_perturbation(m, Ls[mu], rng)
            if P is None:
                continue
            Ls[mu] = Ls[mu] + P
            tested += 1
            err = max(err, abs(lyapunov_residual(m, Ls[mu], mu) - slds.residuals[mu]))
        moved = qfi_gamma(m, type(slds)(tuple(Ls), slds.residuals, slds.rank_deficiencies, m))
        err = max(err, float(np.abs(moved.H - res.H).max()), float(np.abs(moved.Gamma - res.Gamma).max()))
    return CheckResult("gauge-invariance", err <= tol and tested > 0, err, tol, f"{tested} perturbed SLDs")


def check_basis_enlargement(tol=1e-10):
    err = 0.0
    for cfg in grid():
        small = qfi(cats.build_c_model(cfg))[0].H[0, 0]
        big = qfi(cats.build_alpha_model(cfg).select([0]))[0].H[0, 0]
        err = max(err, abs(small - big))
    return CheckResult("basis-enlargement", err <= tol, err, tol, "H_cc in 2 vs 4 kets")


def check_metric_contraction(tol=1e-10):
    rng = np.random.default_rng(11)
    err = 0.0
    for _ in range(50):
        dim = int(rng.integers(1, 7))
        m, kets = random_synthetic_model(rng, dim, dim, 0, max_cond=1e4)
        A = hermitize(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
        B = hermitize(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
        op = (kets @ A @ kets.conj().T) @ (kets @ B @ kets.conj().T)
        direct = kets.conj().T @ op @ kets
        via_metric = m.S @ (A @ m.S @ B) @ m.S
        err = max(err, float(np.abs(direct - via_metric).max()))
    return CheckResult("metric-contraction", err <= tol, err, tol, "50 random bases")


def check_fd_derivatives(tol=1e-6):
    err = 0.0
    for c, a in ((0.0, 0.6), (0.5, 1.0), (0.9, 1.8), (1.0, 0.9)):
        cfg = CatConfig(c, a)
        m = cats.build_alpha_model(cfg)
        for d_num, d in zip(numeric_derivatives(cats.alpha_model_tilde_rho(cfg), m.S, (c, a)), m.D):
            err = max(err, float(np.abs(d_num - d).max()))
        cfg = CatConfig(c, a, 0.3)
        m = cats.build_displacement_model(cfg)
        d_num = numeric_derivatives(cats.displacement_model_tilde_rho(cfg), m.S, (0.3,))[0]
        err = max(err, float(np.abs(d_num - m.D[0]).max()))
    return CheckResult("fd-derivatives", err <= tol, err, tol, "analytic vs central differences")


CHECKS: Dict[str, Callable[..., CheckResult]] = {
    "closed-form-hcc": check_closed_form_hcc,
    "closed-form-alpha": check_closed_form_alpha,
    "weak-commutativity": check_weak_commutativity,
    "displacement": check_displacement,
    "sld-closed-forms": check_sld_closed_forms,
    "oracle-equivalence": check_oracle_equivalence,
    "asymptotes": check_asymptotes,
    "figure-shapes": check_figure_shapes,
    "gauge-invariance": check_gauge_invariance,
    "basis-enlargement": check_basis_enlargement,
    "metric-contraction": check_metric_contraction,
    "fd-derivatives": check_fd_derivatives,
}

# shape checks compare booleans, so a global tolerance override does not apply
_NO_TOL = {"figure-shapes"}


def run_checks(only=None, tol=None):
    names = list(CHECKS) if not only else list(only)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown checks: {', '.join(unknown)}")
    results = []
    for name in names:
        fn = CHECKS[name]
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            if tol is None or name in _NO_TOL:
                res = fn()
            else:
                res = fn(tol=tol)
        res.seconds = time.perf_counter() - t0
        results.append(res)
    return results
