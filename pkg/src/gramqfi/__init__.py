"""Quantum Fisher information for finite-rank models on non-orthogonal bases."""

from .cats import (
    CatConfig,
    LossyConfig,
    SqueezedConfig,
    build_alpha_model,
    build_c_model,
    build_displacement_model,
    closed_form_qfi_cat,
    closed_form_qfi_displacement,
    coherent_overlap,
    lossy_cat_qfi,
    lossy_jacobian,
    lossy_map,
    mean_photon_cat,
    qfi_squeezed,
)
from .engine import (
    BasisDescriptor,
    BasisSet,
    ModelMatrices,
    QfiResult,
    SldSolution,
    WeightedBound,
    build_basis,
    embed_zero_padded,
    from_tilde,
    gramian,
    numeric_derivatives,
    qfi,
    qfi_gamma,
    reparameterize,
    scalar_qcrb,
    solve_slds,
    to_tilde,
)
from .kernels import BACKEND
from .oracle import OrthoModel, eigen_qfi, oracle_qfi, orthonormalize

__version__ = "0.1.0"
