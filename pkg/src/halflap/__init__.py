"""Spectral square root of the Dirichlet Laplacian on intervals and rectangles.

The package builds the Dirichlet sine eigenbasis on uniform grids, applies the
half Laplacian and its inverse diagonally in that basis, evaluates the
harmonic extension to the half cylinder with its Dirichlet energy and
Dirichlet-to-Neumann map, solves the power nonlinearity problem by constrained
energy minimization with a fixed-point polish, and verifies qualitative
properties (positivity, symmetry, monotonicity, maximum principles, boundary
derivative sign, spectral stability margin) on the computed solutions.
"""

from .basis import (
    AliasingError,
    DiscreteDomain,
    DomainError,
    DomainMismatchError,
    EigenBasis,
    GridFn,
    boundary_distance,
    eigenpairs,
    inner_product,
    make_interval,
    make_rectangle,
)
from .cli import emit_plot_data, main
from .extension import (
    ExtensionField,
    ExtremalProfile,
    TruncationError,
    best_trace_constant,
    dirichlet_energy,
    dtn_fd,
    evaluate_extension,
    extremal_quotient,
)
from .nonlinear import (
    ConfigError,
    SignViolationError,
    SolveConfig,
    SolveReport,
    critical_exponent,
    galerkin_residual,
    minimize_I0,
    rescale_to_solution,
    residual,
    solve,
    sweep,
)
from .spectral import (
    SpectralFn,
    UndefinedQuotientError,
    analyze,
    apply_A_half,
    apply_B_half,
    apply_inv_laplacian,
    hardy_quotient,
    synthesize,
    v0_norm_sq,
)
from .verification import (
    CheckReport,
    check_hopf,
    check_monotonicity,
    check_positivity,
    check_symmetry,
    check_weak_mp,
    reflect,
    stability_margin,
)

__version__ = "0.1.0"

__all__ = [
    "AliasingError",
    "CheckReport",
    "ConfigError",
    "DiscreteDomain",
    "DomainError",
    "DomainMismatchError",
    "EigenBasis",
    "ExtensionField",
    "ExtremalProfile",
    "GridFn",
    "SignViolationError",
    "SolveConfig",
    "SolveReport",
    "SpectralFn",
    "TruncationError",
    "UndefinedQuotientError",
    "analyze",
    "apply_A_half",
    "apply_B_half",
    "apply_inv_laplacian",
    "best_trace_constant",
    "boundary_distance",
    "check_hopf",
    "check_monotonicity",
    "check_positivity",
    "check_symmetry",
    "check_weak_mp",
    "critical_exponent",
    "dirichlet_energy",
    "dtn_fd",
    "eigenpairs",
    "emit_plot_data",
    "evaluate_extension",
    "extremal_quotient",
    "galerkin_residual",
    "hardy_quotient",
    "inner_product",
    "main",
    "make_interval",
    "make_rectangle",
    "minimize_I0",
    "reflect",
    "rescale_to_solution",
    "residual",
    "solve",
    "stability_margin",
    "sweep",
    "synthesize",
    "v0_norm_sq",
    "__version__",
]
