"""Weighted error metrics and the convergence/comparison runners.

Every runner builds its problem from plain parameters, so sweep rows can be
farmed out to worker processes with ``jobs > 1``.
"""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .baselines import abm_solve, analytic_poly_solution, ml_solution_linear
from .errors import DomainError
from .solver import (
    HilferProblem,
    SolverConfig,
    eval_solution,
    geometric_knots,
    solve,
    uniform_knots,
)
from .splines import bernstein_product_rows, elevate_rows

__all__ = [
    "ErrorReport",
    "SweepResult",
    "VdPRun",
    "weighted_errors",
    "fit_log2_slope",
    "poly_problem",
    "linear_problem",
    "vdp_rhs",
    "vdp_problem",
    "run_convergence_h",
    "run_convergence_q",
    "run_convergence_eps",
    "run_pc_comparison",
    "run_iteration_cap",
    "run_vdp",
    "reports_to_csv",
    "vdp_to_csv",
    "trajectory_csv",
    "fmt16",
]

H_RANGE = tuple(2.0**-k for k in range(9))
Q_RANGE = (1, 2, 4, 8, 16)
EPS_RANGE = tuple(2.0**-k for k in range(1, 10))
N_RANGE = (1, 2, 3, 4, 5, 6, 7, 8, 9, 10)
VDP_BETAS = (0.0, 0.25, 0.5, 0.75, 1.0)
# horizon of the polynomial test problem; T = 4 matches the reference error values
POLY_T = 4.0


@dataclass
class ErrorReport:
    """One row of an error table.

    ``param`` names the swept quantity (``h``, ``q``, ``eps``, ``N`` or
    ``beta``) and ``value`` its setting. ``errors`` holds the per-point
    weighted errors at ``points``.
    """

    param: str
    value: float
    mean_weighted_error: float
    sup_weighted_error: float
    wall_time_s: float
    points: np.ndarray = field(repr=False)
    errors: np.ndarray = field(repr=False)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.sup_weighted_error >= self.mean_weighted_error >= 0:
            raise DomainError("need sup >= mean >= 0 in an error report")


@dataclass
class SweepResult:
    reports: list
    slope: float
    slope_axis: str

    def means(self) -> np.ndarray:
        return np.array([r.mean_weighted_error for r in self.reports])


@dataclass
class VdPRun:
    """Run statistics and sampled trajectory of one Van der Pol solve."""

    beta: float
    knots: int
    x_at_eps: float
    avg_iter_per_knot: float
    amplitude: float
    wall_time_s: float
    times: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)
    meta: dict = field(default_factory=dict)


def _as_rows(values, n_points):
    arr = np.asarray(values, dtype=np.float64)
    return arr.reshape(-1, n_points)


def weighted_errors(y_num: Callable, y_ref: Callable, gamma: float, points):
    """Mean and sup over ``points`` of ``max_m |t^{1-γ}(y_num - y_ref)|``.

    Both callables map an array of times to values of shape ``(n,)`` or
    ``(d, n)``. Returns ``(mean, sup, per_point)``.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1)
    if np.any(pts < 0) or (gamma != 1.0 and np.any(pts == 0)):
        raise DomainError("error points must be > 0 (>= 0 when gamma = 1)")
    diff = _as_rows(y_num(pts), pts.size) - _as_rows(y_ref(pts), pts.size)
    weight = 1.0 if gamma == 1.0 else pts ** (1.0 - gamma)
    per_point = np.max(np.abs(weight * diff), axis=0)
    return float(np.mean(per_point)), float(np.max(per_point)), per_point


def fit_log2_slope(x, err) -> float:
    """Least-squares slope of ``log2(err)`` against ``-log2(x)``."""
    lx = -np.log2(np.asarray(x, dtype=np.float64))
    le = np.log2(np.asarray(err, dtype=np.float64))
    return float(-np.polyfit(lx, le, 1)[0]) if lx.size > 1 else float("nan")


# problems ------------------------------------------------------------------

def poly_problem(alpha=0.5, beta=0.5, k=0.9, y0_tilde=1.0, T=POLY_T, epsilon=1e-10):
    """``D^{α,β} y = t^k`` with ``I^{1-γ} y(0) = ỹ₀``."""

    def rhs(t, y):
        return np.broadcast_to(t**k, y.shape)

    return HilferProblem(rhs, alpha, beta, [y0_tilde], T, epsilon, name="poly")


def _linear_spline_rhs(a):
    def spline_rhs(Y):
        return a * Y

    return spline_rhs


def linear_problem(alpha=0.5, a=-1.0, x0=1.0, T=15.0, beta=1.0, epsilon=0.0):
    """``D^{α,β} x = a x``; with ``β = 1`` the Caputo problem ``x(0) = x₀``."""

    def rhs(t, y):
        return a * y

    return HilferProblem(rhs, alpha, beta, [x0], T, epsilon,
                         spline_rhs=_linear_spline_rhs(a), name="linear")


def vdp_rhs(mu: float = 1.0):
    """Pointwise and exact-spline right-hand sides of the Van der Pol chain.

    The state is ``(x, y, z, u)`` with ``f = (y, z, u, μ(1 - x²)y - x)``.
    Returns ``(rhs, spline_rhs)``; the spline form multiplies Bernstein
    coefficients exactly, so for order-``q`` input it returns order ``3q``.
    """
    if not mu > 0:
        raise DomainError(f"mu must be > 0, got {mu}")

    def rhs(t, s):
        s = np.asarray(s, dtype=np.float64)
        x, y, z, u = s
        return np.stack([y, z, u, mu * (1.0 - x * x) * y - x])

    def spline_rhs(S):
        S = np.asarray(S, dtype=np.float64)
        q = S.shape[-1] - 1
        x, y, z, u = S
        x2y = bernstein_product_rows(bernstein_product_rows(x, x), y)
        last = mu * (elevate_rows(y, 3 * q) - x2y) - elevate_rows(x, 3 * q)
        return np.stack([elevate_rows(y, 3 * q), elevate_rows(z, 3 * q),
                         elevate_rows(u, 3 * q), last])

    return rhs, spline_rhs


def vdp_problem(beta: float, mu: float = 1.0, T: float = 100.0,
                epsilon: float = 1e-5, x0_tilde: float = 1.0) -> HilferProblem:
    """Four-dimensional order-1/2 Hilfer system equivalent to Van der Pol."""
    rhs, spline_rhs = vdp_rhs(mu)
    eps = 0.0 if beta == 1.0 else epsilon
    return HilferProblem(rhs, 0.5, beta, [x0_tilde, 0.0, 0.0, 0.0], T, eps,
                         spline_rhs=spline_rhs, name="vdp")


# runners -------------------------------------------------------------------

def _map(fn, items, jobs):
    items = list(items)
    if jobs is None or jobs <= 1 or len(items) <= 1:
        return [fn(*it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, *zip(*items)))


def _error_points(eps, T, n_points):
    # the grid includes ε, where the shift error of the ε-sweep peaks
    return np.linspace(eps, T, n_points)


_POLY_DEFAULTS = {"alpha": 0.5, "beta": 0.5, "k": 0.9, "y0": 1.0}


def _poly_args(overrides):
    unknown = set(overrides) - set(_POLY_DEFAULTS)
    if unknown:
        raise DomainError(f"unknown polynomial problem parameters: {sorted(unknown)}")
    return tuple(overrides.get(key, val) for key, val in _POLY_DEFAULTS.items())


def _poly_row(param, value, h, q, q_prime, eps, T, n_points, eps_it,
              alpha=0.5, beta=0.5, k=0.9, y0=1.0):
    prob = poly_problem(alpha, beta, k, y0, T, eps)
    cfg = SolverConfig(q=q, q_prime=q_prime if q_prime else q, eps_it=eps_it)
    t0 = time.perf_counter()
    sol = solve(prob, cfg, uniform_knots(eps, T, h))
    wall = time.perf_counter() - t0
    pts = _error_points(eps, T, n_points)

    def ref(t):
        return analytic_poly_solution(alpha, beta, k, y0, t)

    mean, sup, per = weighted_errors(lambda t: eval_solution(sol, t), ref, prob.gamma, pts)
    meta = {"h": h, "q": q, "q_prime": cfg.q_prime, "eps": eps, "beta": beta, "T": T,
            "knots": sol.knots.n_intervals, "avg_iter_per_knot": sol.avg_iterations,
            "x_at_eps": float(eval_solution(sol, eps)[0])}
    return ErrorReport(param, value, mean, sup, wall, pts, per, meta)


def run_convergence_h(hs: Sequence[float] = H_RANGE, q: int = 1, eps: float = 1e-10,
                      T: float = POLY_T, n_points: int = 1000, eps_it: float = 1e-12,
                      q_prime: Optional[int] = None, jobs: int = 1,
                      **poly) -> SweepResult:
    """Polynomial problem on uniform knots of size ``h``; slope in ``h``.

    ``poly`` may override ``alpha``, ``beta``, ``k`` and ``y0`` of the problem.
    """
    items = [("h", h, h, q, q_prime, eps, T, n_points, eps_it, *_poly_args(poly)) for h in hs]
    rows = _map(_poly_row, items, jobs)
    slope = fit_log2_slope(hs, [r.mean_weighted_error for r in rows])
    return SweepResult(rows, slope, "h")


def run_convergence_q(qs: Sequence[int] = Q_RANGE, h: float = 0.5, eps: float = 1e-10,
                      T: float = POLY_T, n_points: int = 1000, eps_it: float = 1e-12,
                      jobs: int = 1, **poly) -> SweepResult:
    """Polynomial problem with growing spline order; slope in ``1/q``."""
    items = [("q", q, h, q, q, eps, T, n_points, eps_it, *_poly_args(poly)) for q in qs]
    rows = _map(_poly_row, items, jobs)
    slope = fit_log2_slope(1.0 / np.asarray(qs, float), [r.mean_weighted_error for r in rows])
    return SweepResult(rows, slope, "q")


def run_convergence_eps(epss: Sequence[float] = EPS_RANGE, q: int = 2, h: float = 0.5,
                        T: float = POLY_T, n_points: int = 1000, eps_it: float = 1e-12,
                        jobs: int = 1, **poly) -> SweepResult:
    """Polynomial problem on ``[ε, T]`` compared with the exact solution from 0.

    The solver starts at ``ε`` with the unshifted initial value, so the error
    measures the effect of the shift. Knots have size ``h`` from ``ε``.
    """
    items = [("eps", e, h, q, q, e, T, n_points, eps_it, *_poly_args(poly)) for e in epss]
    rows = _map(_poly_row, items, jobs)
    slope = fit_log2_slope(epss, [r.mean_weighted_error for r in rows])
    return SweepResult(rows, slope, "eps")


def _linear_bs_row(param, value, h, T, eps_it, max_iter, strict):
    prob = linear_problem(T=T)
    knots = uniform_knots(0.0, T, h)
    cfg = SolverConfig(q=1, q_prime=1, eps_it=eps_it, max_iter=max_iter, strict=strict)
    t0 = time.perf_counter()
    sol = solve(prob, cfg, knots)
    wall = time.perf_counter() - t0
    pts = knots.breakpoints
    mean, sup, per = weighted_errors(
        lambda t: sol(t), lambda t: ml_solution_linear(0.5, -1.0, 1.0, t), 1.0, pts
    )
    meta = {"method": "BS", "h": h, "T": T, "knots": knots.n_intervals,
            "avg_iter_per_knot": sol.avg_iterations, "max_iter": max_iter}
    return ErrorReport(param, value, mean, sup, wall, pts, per, meta)


def _linear_pc_row(h, T):
    t0 = time.perf_counter()
    grid = abm_solve(lambda t, x: -x, 0.5, [1.0], T, h)
    wall = time.perf_counter() - t0
    pts = grid.times
    ref = ml_solution_linear(0.5, -1.0, 1.0, pts)
    per = np.abs(grid.values[0] - ref)
    meta = {"method": "PC", "h": h, "T": T, "knots": pts.size - 1}
    return ErrorReport("h", h, float(per.mean()), float(per.max()), wall, pts, per, meta)


def run_pc_comparison(hs: Sequence[float] = H_RANGE, T: float = 15.0,
                      eps_it: float = 1e-12, jobs: int = 1):
    """Predictor-corrector and spline errors at the knots of the linear problem.

    Returns ``(pc_reports, bs_reports)`` in the order of ``hs``.
    """
    pc = _map(_linear_pc_row, [(h, T) for h in hs], jobs)
    bs = _map(_linear_bs_row, [("h", h, h, T, eps_it, 200, True) for h in hs], jobs)
    return pc, bs


def run_iteration_cap(caps: Sequence[int] = N_RANGE, h: float = 0.05, T: float = 15.0,
                      eps_it: float = 1e-12, jobs: int = 1) -> list:
    """Spline errors on the linear problem with at most ``N`` Picard steps per knot."""
    return _map(_linear_bs_row, [("N", n, h, T, eps_it, int(n), False) for n in caps], jobs)


def _vdp_row(beta, mu, T, epsilon, q, c, h_max, eps_it, max_iter, n_samples):
    prob = vdp_problem(beta, mu, T, epsilon)
    knots = geometric_knots(prob.epsilon, T, prob.gamma, c, h_max)
    cfg = SolverConfig(q=q, q_prime=3 * q, eps_it=eps_it, max_iter=max_iter,
                       knot_c=c, h_max=h_max)
    t0 = time.perf_counter()
    sol = solve(prob, cfg, knots)
    wall = time.perf_counter() - t0
    times = knots.breakpoints
    states = eval_solution(sol, times)
    late = np.linspace(T / 2, T, n_samples)
    amplitude = float(np.max(np.abs(eval_solution(sol, late)[0])))
    meta = {"mu": mu, "T": T, "epsilon": prob.epsilon, "q": q, "q_prime": 3 * q,
            "c": c, "h_max": h_max, "gamma": prob.gamma}
    return VdPRun(beta, knots.n_intervals, float(states[0, 0]), sol.avg_iterations,
                  amplitude, wall, times, states, meta)


def run_vdp(betas: Sequence[float] = VDP_BETAS, T: float = 100.0, mu: float = 1.0,
            epsilon: float = 1e-5, q: int = 1, c: float = 1.5, h_max: float = 0.05,
            eps_it: float = 1e-12, max_iter: int = 200, n_samples: int = 20001,
            jobs: int = 1) -> list:
    """Van der Pol runs on geometric knots, one per ``β``.

    The trajectory is sampled at the breakpoints. Its columns are ``(x, y, z,
    u)``; ``z`` is the classical derivative of ``x``.
    """
    items = [(b, mu, T, epsilon, q, c, h_max, eps_it, max_iter, n_samples) for b in betas]
    return _map(_vdp_row, items, jobs)


# output --------------------------------------------------------------------

def fmt16(x) -> str:
    """Number with 16 significant digits."""
    x = float(x)
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return f"{x:.16g}"


BASE_COLUMNS = ["param", "mean_weighted_error", "sup_weighted_error", "total_time_s"]


def _write(header, rows, stream):
    own = stream is None
    buf = io.StringIO() if own else stream
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt16(v) for v in r])
    return buf.getvalue() if own else None


def reports_to_csv(reports, stream=None, x_at_eps=False, knots=False, avg_iter=False):
    """Error table CSV; returns the text when ``stream`` is ``None``."""
    header = list(BASE_COLUMNS)
    if x_at_eps:
        header.append("x_at_eps")
    if knots:
        header.append("knots")
    if avg_iter:
        header.append("avg_iter_per_knot")
    rows = []
    for r in reports:
        row = [r.value, r.mean_weighted_error, r.sup_weighted_error, r.wall_time_s]
        if x_at_eps:
            row.append(r.meta["x_at_eps"])
        if knots:
            row.append(r.meta["knots"])
        if avg_iter:
            row.append(r.meta.get("avg_iter_per_knot", math.nan))
        rows.append(row)
    return _write(header, rows, stream)


def vdp_to_csv(runs, stream=None):
    """Van der Pol statistics; the error columns are ``nan`` (no reference)."""
    header = BASE_COLUMNS + ["x_at_eps", "knots", "avg_iter_per_knot"]
    rows = [[r.beta, math.nan, math.nan, r.wall_time_s, r.x_at_eps, r.knots,
             r.avg_iter_per_knot] for r in runs]
    return _write(header, rows, stream)


def trajectory_csv(times, states, stream=None):
    """``t, y_1..y_d`` columns."""
    states = np.atleast_2d(states)
    header = ["t"] + [f"y_{m + 1}" for m in range(states.shape[0])]
    rows = np.column_stack([times, states.T])
    return _write(header, rows, stream)
