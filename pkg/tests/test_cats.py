import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from gramqfi import cats
from gramqfi.cats import CatConfig, LossyConfig, SqueezedConfig
from gramqfi.engine import numeric_derivatives, qfi
from gramqfi.errors import DegenerateBasis, DomainError, RankChange, UnsupportedDerivativeOrder

# --------------------------------------------------------------------------
# truncated Fock-space oracle, used only in tests

NMAX = 90
_a = np.diag(np.sqrt(np.arange(1, NMAX)), 1).astype(complex)
_ad = _a.conj().T


def fock_coherent(beta):
    n = np.arange(NMAX)
    logfact = np.array([math.lgamma(k + 1) for k in n])
    amp = np.exp(-abs(beta) ** 2 / 2 - 0.5 * logfact) * np.power(complex(beta), n)
    return amp


def fock_ket(beta, order, kind):
    v = fock_coherent(beta)
    if order == 0:
        return v
    if kind == cats.AMPLITUDE:
        return _ad @ v - beta * v
    return 1j * (_a + _ad) @ v


def fock_cat_rho(c, a, eps=0.0):
    cfg = CatConfig(c, a)
    k1, k2 = fock_coherent(a), fock_coherent(-a)
    rho = cfg.norm * (
        np.outer(k1, k1.conj()) + np.outer(k2, k2.conj())
        + c * (np.outer(k1, k2.conj()) + np.outer(k2, k1.conj()))
    )
    if eps:
        U = expm(1j * eps * (_a + _ad))
        rho = U @ rho @ U.conj().T
    return rho


# --------------------------------------------------------------------------
# overlaps


@pytest.mark.parametrize("kind", [cats.AMPLITUDE, cats.DISPLACEMENT])
@pytest.mark.parametrize("a,b", [(1.0, -1.0), (0.3, 0.8), (-1.7, 0.2), (2.0, 2.0)])
@pytest.mark.parametrize("da,db", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_overlap_against_fock(kind, a, b, da, db):
    ref = np.vdot(fock_ket(a, da, kind), fock_ket(b, db, kind))
    assert cats.coherent_overlap(a, b, da, db, kind) == pytest.approx(ref, abs=1e-12)


def test_overlap_simple_values():
    assert cats.coherent_overlap(1.3, -1.3) == pytest.approx(math.exp(-2 * 1.3**2))
    assert cats.coherent_overlap(0.7, 0.7) == 1.0
    a = 1.0
    s = math.exp(-2.0)
    # <d_alpha alpha | d_alpha (-alpha)> picks up the chain factor -1
    value = -cats.coherent_overlap(a, -a, 1, 1)
    assert value == pytest.approx(s * (4 * a * a - 1), abs=1e-15)


def test_overlap_rejects_second_derivatives():
    with pytest.raises(UnsupportedDerivativeOrder):
        cats.coherent_overlap(1.0, 1.0, 2, 0)


# --------------------------------------------------------------------------
# model builders


def basis_kets(a, kind):
    out = []
    for d in cats.cat_descriptors(kind):
        _, sign, order = d.label
        v = fock_ket(sign * a, order, kind)
        if kind == cats.AMPLITUDE and order:
            v = sign * v
        out.append(v)
    return np.column_stack(out)


def test_c_model_matrices_as_printed():
    cfg = CatConfig(0.5, 1.0)
    m = cats.build_c_model(cfg)
    N, s = 1 / (2 * (1 + 0.5 * math.exp(-2))), math.exp(-2)
    R = N * np.array([[1, 0.5], [0.5, 1]])
    np.testing.assert_allclose(m.R, R, atol=1e-15)
    np.testing.assert_allclose(m.S, [[1, s], [s, 1]], atol=1e-15)
    np.testing.assert_allclose(m.D[0], N * np.array([[0, 1], [1, 0]]) - 2 * s * N * R, atol=1e-15)


def test_c_model_at_zero_coherence():
    m = cats.build_c_model(CatConfig(0.0, 1.0))
    np.testing.assert_allclose(m.R, 0.5 * np.eye(2))
    np.testing.assert_allclose(m.D[0], 0.5 * np.array([[0, 1], [1, 0]]) - math.exp(-2) * 0.5 * np.eye(2))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 0.99), st.floats(0.05, 4.0))
def test_normalization(c, a):
    for m in (cats.build_c_model(CatConfig(c, a)), cats.build_alpha_model(CatConfig(c, a)),
              cats.build_displacement_model(CatConfig(c, a))):
        assert np.trace(m.R @ m.S).real == pytest.approx(1.0, abs=1e-10)
        m.check()


@pytest.mark.parametrize("c,a", [(0.5, 1.0), (0.0, 0.6), (1.0, 1.4)])
def test_alpha_model_against_fock(c, a):
    m = cats.build_alpha_model(CatConfig(c, a))
    K = basis_kets(a, cats.AMPLITUDE)
    np.testing.assert_allclose(K.conj().T @ K, m.S, atol=1e-12)
    np.testing.assert_allclose(K @ m.R @ K.conj().T, fock_cat_rho(c, a), atol=1e-12)
    h = 1e-5
    if 0.0 < c < 1.0:
        d_c = (fock_cat_rho(c + h, a) - fock_cat_rho(c - h, a)) / (2 * h)
        np.testing.assert_allclose(K @ m.D[0] @ K.conj().T, d_c, atol=1e-8)
    elif c == 0.0:
        d_c = (-3 * fock_cat_rho(0.0, a) + 4 * fock_cat_rho(h, a) - fock_cat_rho(2 * h, a)) / (2 * h)
        np.testing.assert_allclose(K @ m.D[0] @ K.conj().T, d_c, atol=1e-8)
    d_a = (fock_cat_rho(c, a + h) - fock_cat_rho(c, a - h)) / (2 * h)
    np.testing.assert_allclose(K @ m.D[1] @ K.conj().T, d_a, atol=1e-8)


@pytest.mark.parametrize("c,a,eps", [(0.5, 1.0, 0.0), (0.2, 1.5, 0.4)])
def test_displacement_model_against_fock(c, a, eps):
    m = cats.build_displacement_model(CatConfig(c, a, eps))
    U = expm(1j * eps * (_a + _ad))
    K = U @ basis_kets(a, cats.DISPLACEMENT)
    np.testing.assert_allclose(K.conj().T @ K, m.S, atol=1e-10)
    np.testing.assert_allclose(K @ m.R @ K.conj().T, fock_cat_rho(c, a, eps), atol=1e-10)
    h = 1e-5
    d = (fock_cat_rho(c, a, eps + h) - fock_cat_rho(c, a, eps - h)) / (2 * h)
    np.testing.assert_allclose(K @ m.D[0] @ K.conj().T, d, atol=1e-8)


@pytest.mark.parametrize("c,a", [(0.5, 1.0), (0.9, 2.0), (1.0, 0.7)])
def test_alpha_model_finite_difference(c, a):
    cfg = CatConfig(c, a)
    m = cats.build_alpha_model(cfg)
    num = numeric_derivatives(cats.alpha_model_tilde_rho(cfg), m.S, (c, a))
    for x, y in zip(num, m.D):
        np.testing.assert_allclose(x, y, atol=1e-6)
    assert abs(np.linalg.det(m.S)) > 1e-6


def test_degenerate_basis_and_rank_change():
    with pytest.raises(DegenerateBasis):
        cats.build_alpha_model(CatConfig(0.5, 0.0))
    with pytest.raises(RankChange):
        cats.build_c_model(CatConfig(1.0, 1.0))
    with pytest.raises(DomainError):
        CatConfig(1.5, 1.0)


@pytest.mark.parametrize("eps", [0.0, 0.3, 1.7])
def test_displacement_qfi_independent_of_eps(eps):
    ref = qfi(cats.build_displacement_model(CatConfig(0.4, 1.1)))[0].H[0, 0]
    got = qfi(cats.build_displacement_model(CatConfig(0.4, 1.1, eps)))[0].H[0, 0]
    assert abs(got - ref) <= 1e-10


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_displacement_pure_cat(a):
    got = qfi(cats.build_displacement_model(CatConfig(1.0, a)))[0].H[0, 0]
    e2 = math.exp(-2 * a * a)
    assert got == pytest.approx(4 * (4 * a * a + 1 + e2) / (1 + e2), rel=1e-10)


# --------------------------------------------------------------------------
# closed forms


def test_closed_form_large_amplitude():
    H, gamma = cats.closed_form_qfi_cat(CatConfig(0.9, 3.0))
    assert H[0, 0] == pytest.approx(1 / (1 - 0.81), abs=1e-3)
    assert gamma == 0.0


@pytest.mark.parametrize("c", [0.0, 0.3, 0.8])
def test_closed_form_at_zero_amplitude(c):
    H, _ = cats.closed_form_qfi_cat(CatConfig(c, 0.0))
    assert H[1, 1] == pytest.approx(4 * (1 - c) / (1 + c))
    assert H[0, 1] == 0.0


def test_closed_form_rank_change():
    with pytest.raises(RankChange):
        cats.closed_form_qfi_cat(CatConfig(1.0, 1.0))


def test_closed_form_cc_value():
    H, _ = cats.closed_form_qfi_cat(CatConfig(0.5, 1.0))
    assert H[0, 0] == pytest.approx(1.14826, abs=5e-6)


def test_displacement_and_squeezed_closed_forms():
    for a in (0.1, 1.0, 5.0):
        assert cats.closed_form_qfi_displacement(CatConfig(0.0, a)) == 4.0
    assert cats.qfi_squeezed(SqueezedConfig(0.0, 0.7)) == pytest.approx(4.0)
    lim = 4 / (1 - math.exp(-0.5))
    assert lim == pytest.approx(10.166, abs=1e-3)
    assert cats.qfi_squeezed(SqueezedConfig(3.0, 0.5)) == pytest.approx(lim, rel=5e-3)


@pytest.mark.parametrize("r,g", [(0.0, 0.0), (0.5, 0.1), (1.2, 0.5), (2.0, 1.3)])
def test_squeezed_against_gaussian_formula(r, g):
    # p-squeezed vacuum through loss: Var(p) = (eta e^{-2r} + 1 - eta) / 2,
    # displacement shifts <p> by sqrt(2) eps, QFI = 2 / Var(p)
    eta = math.exp(-g)
    var_p = (eta * math.exp(-2 * r) + 1 - eta) / 2
    assert cats.qfi_squeezed(SqueezedConfig(r, g)) == pytest.approx(2 / var_p, rel=1e-12)


# --------------------------------------------------------------------------
# lossy channel and photon numbers


def test_lossy_map_values():
    st0 = cats.lossy_map(LossyConfig(1.3, 0.0))
    assert (st0.alpha, st0.c) == (1.3, 1.0)
    st1 = cats.lossy_map(LossyConfig(1.0, 0.3))
    assert st1.alpha == pytest.approx(math.exp(-0.15), rel=1e-15)
    assert st1.c == pytest.approx(math.exp(-2 * (1 - math.exp(-0.3))), rel=1e-14)


@pytest.mark.parametrize("a0,g", [(1.0, 0.3), (0.5, 0.1), (2.0, 0.5)])
def test_lossy_jacobian_finite_difference(a0, g):
    B = cats.lossy_jacobian(LossyConfig(a0, g))
    h = 1e-6

    def f(gg, aa):
        st_ = cats.lossy_map(LossyConfig(aa, gg))
        return np.array([st_.c, st_.alpha])

    row_g = (f(g + h, a0) - f(g - h, a0)) / (2 * h)
    row_a = (f(g, a0 + h) - f(g, a0 - h)) / (2 * h)
    np.testing.assert_allclose(B, np.vstack([row_g, row_a]), atol=1e-7)


def test_photon_numbers():
    assert cats.mean_photon_cat(CatConfig(0.4, 0.0)) == 0.0
    assert cats.mean_photon_cat(CatConfig(0.0, 1.7)) == 1.7**2
    assert cats.mean_photon_pure_cat(2.0) == pytest.approx(4 * (1 - math.exp(-8)) / (1 + math.exp(-8)))
    assert cats.mean_photon_squeezed(1.1) == pytest.approx(math.sinh(1.1) ** 2)


@pytest.mark.parametrize("c,a", [(0.3, 0.8), (1.0, 1.5)])
def test_photon_number_against_fock(c, a):
    rho = fock_cat_rho(c, a)
    n = np.trace(rho @ _ad @ _a).real
    assert cats.mean_photon_cat(CatConfig(c, a)) == pytest.approx(n, abs=1e-10)


# --------------------------------------------------------------------------
# asymptotic and figure properties


@pytest.mark.parametrize("c", [0.2, 0.5, 1.0])
def test_linear_photon_scaling(c):
    cfg = CatConfig(c, 7.0)
    lin = 16 * c * c * cats.mean_photon_cat(cfg) + 4
    assert cats.closed_form_qfi_displacement(cfg) == pytest.approx(lin, rel=1e-3)


def test_engine_agrees_with_closed_forms_on_grid():
    for c in np.linspace(0.0, 0.95, 8):
        for a in np.linspace(0.1, 3.0, 8):
            cfg = CatConfig(c, a)
            H = qfi(cats.build_alpha_model(cfg))[0].H
            ref, _ = cats.closed_form_qfi_cat(cfg)
            np.testing.assert_allclose(H, ref, rtol=1e-8, atol=1e-8 * np.abs(ref).max())
            hd = qfi(cats.build_displacement_model(cfg))[0].H[0, 0]
            assert hd == pytest.approx(cats.closed_form_qfi_displacement(cfg), rel=1e-8)


def test_lossy_curve_shapes():
    a0 = np.linspace(0.05, 4.0, 300)

    def curve(g):
        n = [cats.mean_photon_cat(cats.lossy_map(LossyConfig(x, g))) for x in a0]
        H = [cats.lossy_displacement_qfi(LossyConfig(x, g)) for x in a0]
        return np.array(n), np.array(H)

    n, H = curve(0.0)
    assert np.all(np.diff(n) > 0) and np.all(np.diff(H) > 0)
    peaks = []
    for g in (0.1, 0.2, 0.3, 0.5):
        n, H = curve(g)
        k = int(np.argmax(H))
        assert 0 < k < len(a0) - 1
        peaks.append(n[k])
    assert all(b < a for a, b in zip(peaks, peaks[1:]))


def test_large_probe_limits():
    assert cats.lossy_displacement_qfi(LossyConfig(6.0, 0.5)) == pytest.approx(4.0, rel=0.05)
    r = np.linspace(0, 6, 200)
    for g in (0.1, 0.5):
        H = np.array([cats.qfi_squeezed(SqueezedConfig(x, g)) for x in r])
        assert np.all(np.diff(H) >= 0)
        assert np.all(H < cats.squeezed_limit(g))
        assert H[-1] == pytest.approx(cats.squeezed_limit(g), rel=1e-3)
