"""Reference solutions and the fractional Adams predictor-corrector baseline."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonFiniteError
from .solver import gamma_param
from .specfun import gamma_fn, mittag_leffler

__all__ = [
    "GridSolution",
    "analytic_poly_solution",
    "ml_solution_linear",
    "abm_weights",
    "abm_solve",
]


@dataclass(frozen=True, eq=False)
class GridSolution:
    """Values of a solution on a time grid; ``values`` has shape ``(d, n+1)``."""

    times: np.ndarray
    values: np.ndarray
    method: str

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise DomainError("grid times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise NonFiniteError("grid solution has non-finite values")


def analytic_poly_solution(alpha, beta, k, y0_tilde, t):
    """Exact solution of ``D^{α,β} y = t^k``, ``I^{1-γ} y(0) = ỹ₀``.

    ``y(t) = ỹ₀ t^{γ-1}/Γ(γ) + Γ(k+1)/Γ(k+1+α) t^{k+α}``. ``alpha = 1`` is
    accepted (classical integration).
    """
    t = np.asarray(t, dtype=np.float64)
    if np.any(t <= 0):
        raise DomainError("analytic_poly_solution needs t > 0")
    if alpha == 1.0:
        gamma = 1.0
    else:
        gamma = gamma_param(alpha, beta)
    out = y0_tilde * t ** (gamma - 1.0) / gamma_fn(gamma)
    out = out + gamma_fn(k + 1.0) / gamma_fn(k + 1.0 + alpha) * t ** (k + alpha)
    return float(out) if out.ndim == 0 else out


def ml_solution_linear(alpha, a, x0, t, n_terms=500):
    """``x(t) = x₀ E_α(a t^α)``, the solution of the Caputo problem ``D^α x = a x``."""
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise DomainError("ml_solution_linear needs t >= 0")
    out = x0 * np.asarray(mittag_leffler(alpha, a * t**alpha, n_terms))
    return float(out) if out.ndim == 0 else out


def abm_weights(alpha: float, n: int, h: float):
    """Predictor and corrector weights for the step to ``t_{n+1}``.

    Returns ``(b, a)``, both of length ``n + 1`` and indexed by ``j``. ``b``
    already contains the ``h^α/α`` factor; ``a`` is the bare
    product-trapezoid weight (multiplied by ``h^α/Γ(α+2)`` in the scheme).
    """
    j = np.arange(n + 1, dtype=np.float64)
    b = h**alpha / alpha * ((n + 1 - j) ** alpha - (n - j) ** alpha)
    a = (n - j + 2) ** (alpha + 1) + (n - j) ** (alpha + 1) - 2 * (n - j + 1) ** (alpha + 1)
    a[0] = n ** (alpha + 1) - (n - alpha) * (n + 1) ** alpha
    return b, a


def abm_solve(rhs, alpha: float, x0, T: float, h: float) -> GridSolution:
    """Fractional Adams-Bashforth-Moulton scheme for a Caputo problem.

    Solves ``D^α x = rhs(t, x)``, ``x(0) = x0`` on ``t_n = n h <= T`` with one
    rectangle-rule predictor and one product-trapezoid corrector per step.
    ``rhs`` follows the :class:`~hilfspline.solver.HilferProblem` convention:
    ``t`` of shape ``(1,)`` and ``x`` of shape ``(d, 1)``.
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    if not h > 0 or not T > 0:
        raise DomainError(f"need h > 0 and T > 0 (h={h}, T={T})")
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    d = x0.size
    N = int(math.floor(T / h + 1e-9))
    times = h * np.arange(N + 1, dtype=np.float64)
    X = np.empty((d, N + 1))
    F = np.empty((d, N + 1))

    def f(t, x):
        return np.asarray(rhs(np.array([t]), x[:, None]), dtype=np.float64).reshape(d)

    X[:, 0] = x0
    F[:, 0] = f(0.0, x0)
    g_a = gamma_fn(alpha)
    c_corr = h**alpha / gamma_fn(alpha + 2.0)
    k = np.arange(N + 2, dtype=np.float64)
    pow_a = k**alpha
    pow_a1 = k ** (alpha + 1.0)
    for n in range(N):
        # weights indexed by r = n - j, reversed below to line up with j
        r = slice(0, n + 1)
        b = (h**alpha / alpha) * (pow_a[1 : n + 2] - pow_a[r])
        a = pow_a1[2 : n + 3] + pow_a1[r] - 2.0 * pow_a1[1 : n + 2]
        b, a = b[::-1], a[::-1].copy()
        a[0] = pow_a1[n] - (n - alpha) * pow_a[n + 1]
        hist_f = F[:, : n + 1]
        pred = x0 + (hist_f @ b) / g_a
        f_pred = f(times[n + 1], pred)
        X[:, n + 1] = x0 + c_corr * (f_pred + hist_f @ a)
        if not np.all(np.isfinite(X[:, n + 1])):
            raise NonFiniteError(f"predictor-corrector blew up at t = {times[n + 1]}")
        F[:, n + 1] = f(times[n + 1], X[:, n + 1])
    return GridSolution(times, X, "abm")
