"""Finite-difference laboratory for the logarithmic Schrodinger equation

    i u_t + Lap u = lam u ln|u|^2

on rectangular domains with homogeneous Dirichlet data: linearly implicit
BDF1/BDF2 steppers with a sine-transform solver, exact Gausson solutions,
conservation and error diagnostics, and refinement studies.
"""

__version__ = "0.1.0"

from .analytic import (
    CASE_PRESETS,
    GaussonParams,
    TwoGaussonParams,
    exact_on_grid,
    exact_sampler,
    gausson,
    initial_condition,
    pde_residual,
)
from .diagnostics import (
    ConvergenceReport,
    ObservableSeries,
    SeriesRecorder,
    energy,
    error_norms,
    estimate_order,
    mass,
    truncation_error,
)
from .grid import (
    GridFunction,
    GridSpec,
    discrete_laplacian,
    forward_difference,
    inner_product,
    norm,
    second_difference,
)
from .nonlinearity import F_primitive, LogNonlinearity, apply_f, f_log, f_log_eps
from .sine_spectral import (
    SineBasis,
    SolverError,
    dst_forward,
    dst_inverse,
    eigenvalues,
    solve_shifted_laplacian,
)
from .stepping import (
    DivergenceError,
    Every,
    Scheme,
    SchemeParams,
    SimulationResult,
    StepperState,
    advance,
    bdf1_step,
    bdf2_starter,
    bdf2_step,
    run_simulation,
)

__all__ = [
    "CASE_PRESETS", "ConvergenceReport", "DivergenceError", "Every", "F_primitive",
    "GaussonParams", "GridFunction", "GridSpec", "LogNonlinearity", "ObservableSeries",
    "Scheme", "SchemeParams", "SeriesRecorder", "SimulationResult", "SineBasis",
    "SolverError", "StepperState", "TwoGaussonParams", "advance", "apply_f", "bdf1_step",
    "bdf2_starter", "bdf2_step", "discrete_laplacian", "dst_forward", "dst_inverse",
    "eigenvalues", "energy", "error_norms", "estimate_order", "exact_on_grid",
    "exact_sampler", "f_log", "f_log_eps", "forward_difference", "gausson",
    "initial_condition", "inner_product", "mass", "norm", "pde_residual", "run_simulation",
    "second_difference", "solve_shifted_laplacian", "truncation_error",
]
