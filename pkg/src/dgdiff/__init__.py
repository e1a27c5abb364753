"""Discontinuous Galerkin viscous-flux formulations for 1D diffusion and their Fourier analysis."""

from __future__ import annotations

from .basis import (
    LocalMatrices,
    QuadratureRule,
    ReferenceBasis,
    build_local_matrices,
    eval_solution,
    fourier_projection,
    gauss_legendre,
    legendre_eval,
    project_element,
)
from .experiments import (
    GaussianCase,
    Spectrum,
    TurbulenceCase,
    burgers_ensemble,
    burgers_init_field,
    complex_erf,
    discrete_spectrum,
    fourier_mode_experiment,
    gaussian_exact,
    gaussian_experiment,
)
from .fourier import (
    DiffusionProfile,
    RKScheme,
    analyze,
    combined_mode_G,
    fully_discrete_G,
    fully_discrete_Km,
    max_dtau_scan,
    min_eta_scan,
    physical_eigensystem,
    track_modes,
)
from .schemes import Formulation, SchemeConfig, StencilOperator, assemble_stencil, stencil_apply
from .solver import BlowUpError, DGField, GridSpec, integrate, l2_project, sample_continuous

__version__ = "0.1.0"

__all__ = [
    "BlowUpError",
    "DGField",
    "DiffusionProfile",
    "Formulation",
    "GaussianCase",
    "GridSpec",
    "LocalMatrices",
    "QuadratureRule",
    "RKScheme",
    "ReferenceBasis",
    "SchemeConfig",
    "Spectrum",
    "StencilOperator",
    "TurbulenceCase",
    "analyze",
    "assemble_stencil",
    "build_local_matrices",
    "burgers_ensemble",
    "burgers_init_field",
    "combined_mode_G",
    "complex_erf",
    "discrete_spectrum",
    "eval_solution",
    "fourier_mode_experiment",
    "fourier_projection",
    "fully_discrete_G",
    "fully_discrete_Km",
    "gauss_legendre",
    "gaussian_exact",
    "gaussian_experiment",
    "integrate",
    "l2_project",
    "legendre_eval",
    "max_dtau_scan",
    "min_eta_scan",
    "physical_eigensystem",
    "project_element",
    "sample_continuous",
    "stencil_apply",
    "track_modes",
]
