"""Bernstein spline Picard solver for Hilfer fractional initial value problems."""
from ._backend import BACKEND, available_backends
from .baselines import GridSolution, abm_solve, analytic_poly_solution, ml_solution_linear
from .errors import (
    ConvergenceError,
    DegenerateKnotsError,
    DomainError,
    KnotMismatchError,
    NonFiniteError,
)
from .fracint import frac_int_spline, integration_tensor
from .solver import (
    HilferProblem,
    SolutionApprox,
    SolverConfig,
    contraction_check,
    eval_solution,
    gamma_param,
    geometric_knots,
    solve,
    uniform_knots,
)
from .specfun import beta_fn, gamma_fn, inc_beta, log_gamma_fn, mittag_leffler
from .splines import BernsteinSpline, KnotCollection, VectorSpline, interpolate

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "available_backends",
    "GridSolution",
    "abm_solve",
    "analytic_poly_solution",
    "ml_solution_linear",
    "ConvergenceError",
    "DegenerateKnotsError",
    "DomainError",
    "KnotMismatchError",
    "NonFiniteError",
    "frac_int_spline",
    "integration_tensor",
    "HilferProblem",
    "SolutionApprox",
    "SolverConfig",
    "contraction_check",
    "eval_solution",
    "gamma_param",
    "geometric_knots",
    "solve",
    "uniform_knots",
    "beta_fn",
    "gamma_fn",
    "inc_beta",
    "log_gamma_fn",
    "mittag_leffler",
    "BernsteinSpline",
    "KnotCollection",
    "VectorSpline",
    "interpolate",
]
