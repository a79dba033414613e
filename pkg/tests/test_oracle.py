import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gramqfi import cats
from gramqfi.cats import CatConfig
from gramqfi.engine import BasisDescriptor, ModelMatrices, build_basis, gramian, qfi
from gramqfi.errors import DegenerateFloor, QfiDivergenceWarning
from gramqfi.oracle import OrthoModel, eigen_qfi, oracle_qfi, orthonormalize
from gramqfi.validation import C_GRID, random_synthetic_model


def test_identity_metric_leaves_rho_unchanged():
    R = np.array([[0.7, 0.1j], [-0.1j, 0.3]])
    o = orthonormalize(ModelMatrices(R, np.eye(2), ()))
    np.testing.assert_allclose(o.rho, R, atol=1e-15)


@pytest.mark.parametrize("c,a", [(0.5, 1.0), (0.2, 0.4), (0.9, 2.0)])
def test_c_model_spectrum(c, a):
    cfg = CatConfig(c, a)
    o = orthonormalize(cats.build_c_model(cfg))
    p = np.linalg.eigvalsh(o.rho)
    N, s = cfg.norm, cfg.s
    np.testing.assert_allclose(p, sorted([N * (1 - c) * (1 - s), N * (1 + c) * (1 + s)]), atol=1e-12)
    assert np.trace(o.rho).real == pytest.approx(1.0, abs=1e-12)


def test_alpha_model_has_two_zero_eigenvalues():
    o = orthonormalize(cats.build_alpha_model(CatConfig(0.5, 1.0)))
    p = np.linalg.eigvalsh(o.rho)
    np.testing.assert_allclose(p[:2], 0, atol=1e-10)
    for d in o.drho:
        assert abs(np.trace(d)) < 1e-12


def test_pure_coherent_probe_under_displacement():
    descriptors = [
        BasisDescriptor((cats.DISPLACEMENT, +1, 0)),
        BasisDescriptor((cats.DISPLACEMENT, +1, 1), 1, 0),
    ]
    for a in (0.0, 0.7, 2.5):
        basis = build_basis(descriptors, cats.cat_overlap(a, cats.DISPLACEMENT))
        S = gramian(basis)
        m = ModelMatrices(np.diag([1.0, 0.0]), S, (np.array([[0, 1], [1, 0]]),))
        assert oracle_qfi(m).H[0, 0] == pytest.approx(4.0, abs=1e-12)
        assert qfi(m)[0].H[0, 0] == pytest.approx(4.0, abs=1e-12)


def test_cat_grid_engine_equivalence():
    for c in C_GRID:
        for a in np.linspace(0.5, 2.0, 7):
            m = cats.build_c_model(CatConfig(c, a))
            h_e = qfi(m)[0].H[0, 0]
            h_o = oracle_qfi(m).H[0, 0]
            assert abs(h_e - h_o) <= 1e-8 * max(1, abs(h_e))


def test_rank_change_warns():
    m = cats.build_c_model(CatConfig(1.0, 1.0), allow_rank_change=True)
    with pytest.warns(QfiDivergenceWarning):
        res = oracle_qfi(m)
    assert math.isinf(res.H[0, 0])


def test_no_warning_for_displacement_of_pure_cat():
    m = cats.build_displacement_model(CatConfig(1.0, 1.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        res = oracle_qfi(m)
    assert res.H[0, 0] == pytest.approx(cats.qfi_pure_cat_displacement(1.0), rel=1e-10)


def test_degenerate_floor():
    with pytest.raises(DegenerateFloor):
        eigen_qfi(OrthoModel(np.zeros((2, 2)), (np.zeros((2, 2)),), np.eye(2)))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_frame_independence(dim, seed):
    rng = np.random.default_rng(seed)
    m, _ = random_synthetic_model(rng, dim, int(rng.integers(1, dim + 1)), 2)
    a = oracle_qfi(m, frame="sqrt")
    b = oracle_qfi(m, frame="cholesky")
    np.testing.assert_allclose(a.H, b.H, atol=1e-9 * max(1, np.abs(a.H).max()))
    np.testing.assert_allclose(a.Gamma, b.Gamma, atol=1e-9 * max(1, np.abs(a.H).max()))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_oracle_engine_equivalence_synthetic(dim, seed):
    rng = np.random.default_rng(seed)
    m, _ = random_synthetic_model(rng, dim, int(rng.integers(1, dim + 1)), 3)
    e = qfi(m)[0]
    o = oracle_qfi(m)
    scale = np.maximum(1.0, np.abs(e.H))
    assert np.all(np.abs(e.H - o.H) <= 1e-8 * scale)
    assert np.all(np.abs(e.Gamma - o.Gamma) <= 1e-8 * scale)
