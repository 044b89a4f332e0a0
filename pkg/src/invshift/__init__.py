"""Laplacian eigenpairs by inverse iteration with shift on model domains."""
from .decomposition import (
    ShiftSchedule,
    SpectralComponent,
    SpectralDecompositionResult,
    decompose,
    fourier_coefficient,
    reconstruct,
)
from .discrete import ShiftedOperator, apply, assemble_shifted, laplacian_matrix, solve
from .domain import (
    DISK,
    INTERVAL,
    SQUARE,
    DomainKind,
    DomainSpec,
    ExactSpectrum,
    Grid,
    GridFunction,
    build_grid,
    discrete_eigenvalue,
    exact_eigenvalues,
    sample_function,
    weyl_shift_seeds,
)
from .errors import (
    EmptyResult,
    GridError,
    GridMismatch,
    InvShiftError,
    NearSingularShift,
    NodalPoint,
    NoValidPoint,
    ZeroStart,
)
from .iteration import (
    EigenpairResult,
    EstimatorKind,
    IterationConfig,
    IterationHistory,
    Normalization,
    eigenpair,
    estimate_classic_rayleigh,
    estimate_gamma,
    estimate_linf_ratio,
    estimate_mu,
    estimate_weak_rayleigh,
    iterate,
    project_component,
    residual,
)
from .quadrature import InnerProductKind, dirichlet_energy, inner, norm_l2, norm_linf, simpson_weights

__version__ = "0.1.0"
