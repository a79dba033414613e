"""Reference QFI by orthonormalization and diagonalization.

This is the textbook route that the metric formulation avoids: move the
model to an orthonormal frame, diagonalize ``rho`` and sum over eigenpairs.
It shares nothing with :mod:`gramqfi.engine` beyond the matrix inputs and
serves as the independent check for every derived value.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .engine import DEFAULT_COND_CAP, ModelMatrices, QfiResult
from .errors import DegenerateFloor, QfiDivergenceWarning, SingularMetric
from .linalg import condition_number, herm_eig, hermitize, psd_sqrt

DEFAULT_EIG_FLOOR = 1e-12
DIVERGENCE_MASS = 1e-6


@dataclass(frozen=True)
class OrthoModel:
    rho: np.ndarray
    drho: tuple
    frame: np.ndarray
    parameter_names: tuple = ()


def orthonormalize(model: ModelMatrices, frame="sqrt", cond_cap=DEFAULT_COND_CAP) -> OrthoModel:
    """Components of ``rho`` and its derivatives in an orthonormal frame.

    With ``S = F F^H`` the kets ``Psi F^{-H}`` are orthonormal and an operator
    with coefficients ``A`` has components ``F^H A F``. ``frame`` selects
    ``F``: the Hermitian square root (``"sqrt"``) or the Cholesky factor
    (``"cholesky"``).
    """
    S = model.S
    if condition_number(S) > cond_cap:
        raise SingularMetric("Gramian is singular at the condition cap")
    if frame == "sqrt":
        F = psd_sqrt(S)
    elif frame == "cholesky":
        F = np.linalg.cholesky(hermitize(S))
    else:
        raise ValueError(f"unknown frame {frame!r}")
    Fh = F.conj().T
    rho = hermitize(Fh @ model.R @ F)
    drho = tuple(hermitize(Fh @ d @ F) for d in model.D)
    return OrthoModel(rho, drho, F, model.parameter_names)


def eigen_qfi(ortho: OrthoModel, eig_floor=DEFAULT_EIG_FLOOR) -> QfiResult:
    """``H + i Gamma = sum_ij 4 p_i <i|d_m rho|j><j|d_n rho|i> / (p_i + p_j)^2``.

    Pairs with ``p_i + p_j`` at or below ``eig_floor * max(p)`` are dropped.
    If a parameter's derivative carries more than ``1e-6`` of squared weight
    on dropped pairs the state changes rank there; a
    :class:`QfiDivergenceWarning` is issued and that row of ``H`` is set to
    ``inf`` (diagonal) / ``nan`` (off-diagonal).
    """
    p, V = herm_eig(ortho.rho)
    floor = eig_floor * max(p.max(), 0.0)
    if not np.any(p[:, None] + p[None, :] > floor):
        raise DegenerateFloor("no eigenpair lies above the floor")
    names = ortho.parameter_names
    if not ortho.drho:
        empty = np.zeros((0, 0))
        return QfiResult(empty, empty, 0.0, names)
    Vh = V.conj().T
    dmus = np.stack([Vh @ d @ V for d in ortho.drho])
    T, dropped = kernels.eigen_qfi_table(p, dmus, floor)
    sym = 0.5 * (T + T.T)
    anti = 0.5 * (T - T.T)
    H = sym.real.copy()
    Gamma = anti.imag.copy()
    leak = float(max(np.abs(sym.imag).max(), np.abs(anti.real).max()))
    for mu, mass in enumerate(dropped):
        if mass > DIVERGENCE_MASS:
            label = names[mu] if names else mu
            warnings.warn(
                f"QFI for parameter {label!r} diverges: the state changes rank "
                f"(dropped derivative weight {mass:.3e})",
                QfiDivergenceWarning,
                stacklevel=2,
            )
            H[mu, :] = np.nan
            H[:, mu] = np.nan
            H[mu, mu] = np.inf
            Gamma[mu, :] = np.nan
            Gamma[:, mu] = np.nan
    return QfiResult(H, Gamma, leak, names)


def oracle_qfi(model: ModelMatrices, frame="sqrt", eig_floor=DEFAULT_EIG_FLOOR) -> QfiResult:
    return eigen_qfi(orthonormalize(model, frame), eig_floor)
