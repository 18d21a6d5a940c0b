"""Knot-local Picard solver for Hilfer fractional initial value problems.

The problem ``D^{α,β} y = f(t, y)``, ``I^{1-γ} y(0) = ỹ₀`` with
``γ = α + β - αβ`` is solved on ``[ε, T]`` in the weighted variable
``v(t) = t^{1-γ} y(t)``, which satisfies

    v(t) = ỹ₀/Γ(γ) + t^{1-γ} I^α_{ε→t} f(s, s^{γ-1} v(s)).

``v`` is an order-``q`` Bernstein spline. Knots are processed left to right;
on each one the contribution of all finished knots (the history term) is
computed once, then the local coefficients are refined by Picard iteration
until the coefficient change drops below ``eps_it``.
"""
from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    ConvergenceError,
    DegenerateKnotsError,
    DomainError,
    NonFiniteError,
)
from .fracint import contract, integration_tensor_array
from .specfun import gamma_fn
from .splines import (
    STABLE_ORDER,
    BernsteinSpline,
    KnotCollection,
    VectorSpline,
    bernstein_basis_matrix,
    elevate_rows,
    node_matrix,
)

__all__ = [
    "HilferProblem",
    "SolverConfig",
    "SolutionApprox",
    "gamma_param",
    "geometric_knots",
    "uniform_knots",
    "contraction_check",
    "estimate_lipschitz",
    "solve",
    "eval_solution",
]

logger = logging.getLogger(__name__)


def gamma_param(alpha: float, beta: float) -> float:
    """``γ = α + β - αβ`` for ``α ∈ (0, 1)``, ``β ∈ [0, 1]``."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if not 0.0 <= beta <= 1.0:
        raise DomainError(f"beta must lie in [0, 1], got {beta}")
    return alpha + beta - alpha * beta


@dataclass(frozen=True, eq=False)
class HilferProblem:
    """A Hilfer fractional initial value problem.

    Attributes
    ----------
    rhs : callable
        ``rhs(t, y) -> f`` with ``t`` of shape ``(n,)`` and ``y``, ``f`` of
        shape ``(d, n)``.
    alpha, beta : float
        Derivative order in ``(0, 1)`` and type in ``[0, 1]``.
    y0_tilde : array_like
        Weighted initial value ``I^{1-γ} y(0)``, length ``d``.
    T : float
        Time horizon.
    epsilon : float
        Left end of the shifted domain. Must be positive unless ``β = 1``.
    spline_rhs : callable, optional
        Exact spline form of an autonomous polynomial rhs. Receives the
        Bernstein coefficients of ``y`` with shape ``(d, m, q+1)`` and returns
        coefficients of ``f(y)`` with shape ``(d, m, r+1)`` for some
        ``r <= q'``. When given, the solver uses it instead of sampling
        ``rhs`` at the order-``q'`` nodes.
    """

    rhs: Callable
    alpha: float
    beta: float
    y0_tilde: np.ndarray
    T: float
    epsilon: float = 0.0
    spline_rhs: Optional[Callable] = None
    name: str = ""

    def __post_init__(self):
        gamma_param(self.alpha, self.beta)
        y0 = np.atleast_1d(np.asarray(self.y0_tilde, dtype=np.float64)).copy()
        if y0.ndim != 1:
            raise DomainError("y0_tilde must be a vector")
        y0.setflags(write=False)
        object.__setattr__(self, "y0_tilde", y0)
        if self.epsilon < 0:
            raise DomainError(f"epsilon must be >= 0, got {self.epsilon}")
        if not self.T > self.epsilon:
            raise DomainError(f"need T > epsilon (T={self.T}, epsilon={self.epsilon})")
        if self.epsilon == 0 and self.gamma < 1:
            raise DomainError("epsilon must be > 0 unless beta = 1 (gamma = 1)")

    @property
    def dim(self) -> int:
        return self.y0_tilde.size

    @property
    def gamma(self) -> float:
        return gamma_param(self.alpha, self.beta)


@dataclass(frozen=True)
class SolverConfig:
    """Numerical parameters of :func:`solve`.

    ``q_prime`` defaults to ``3 * q``. With ``strict=False`` hitting
    ``max_iter`` on a knot is accepted (used for fixed iteration budgets);
    otherwise it raises :class:`ConvergenceError`. ``lipschitz`` is an
    optional bound on ``‖K‖∞`` used only for the contraction diagnostic.
    """

    q: int = 1
    q_prime: Optional[int] = None
    eps_it: float = 1e-12
    max_iter: int = 200
    strict: bool = True
    knot_c: float = 1.5
    h_max: float = 0.05
    lipschitz: Optional[float] = None

    def __post_init__(self):
        if self.q_prime is None:
            object.__setattr__(self, "q_prime", 3 * self.q)
        if self.q < 1:
            raise DomainError(f"q must be >= 1, got {self.q}")
        if self.q_prime < self.q:
            raise DomainError(f"q_prime ({self.q_prime}) must be >= q ({self.q})")
        if not self.eps_it > 0:
            raise DomainError(f"eps_it must be > 0, got {self.eps_it}")
        if self.max_iter < 1:
            raise DomainError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.knot_c > 1:
            raise DomainError(f"knot_c must be > 1, got {self.knot_c}")
        if not self.h_max > 0:
            raise DomainError(f"h_max must be > 0, got {self.h_max}")
        if self.q > STABLE_ORDER:
            warnings.warn(
                f"spline order {self.q} > {STABLE_ORDER} is numerically unstable",
                RuntimeWarning,
                stacklevel=3,
            )


@dataclass(frozen=True, eq=False)
class SolutionApprox:
    """Solver output: the weighted spline ``v`` and the iteration log.

    ``y(t) = t^{γ-1} v(t)``; call the object (or :func:`eval_solution`) to
    evaluate ``y``.
    """

    v: VectorSpline
    gamma: float
    v0_tilde: np.ndarray
    iterations: np.ndarray
    changes: list
    converged: np.ndarray
    integrand_coeffs: np.ndarray
    wall_time: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def knots(self) -> KnotCollection:
        return self.v.knots

    @property
    def epsilon(self) -> float:
        return self.knots.start

    @property
    def T(self) -> float:
        return self.knots.stop

    @property
    def dim(self) -> int:
        return self.v.dim

    @property
    def avg_iterations(self) -> float:
        return float(np.mean(self.iterations))

    @property
    def total_iterations(self) -> int:
        return int(np.sum(self.iterations))

    def __call__(self, t):
        return eval_solution(self, t)

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "epsilon": self.epsilon,
            "order": self.v.order,
            "knots": self.knots.breakpoints.tolist(),
            "coeffs": [c.coeffs.tolist() for c in self.v.components],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SolutionApprox":
        """Rebuild an evaluable solution (without iteration log) from JSON."""
        knots = KnotCollection(np.asarray(data["knots"], dtype=np.float64))
        if abs(knots.start - float(data["epsilon"])) > 1e-12 * max(1.0, knots.stop):
            raise DomainError("first knot does not match epsilon")
        v = VectorSpline.from_coeffs(knots, np.asarray(data["coeffs"], dtype=np.float64))
        if v.order != int(data["order"]):
            raise DomainError("coefficient matrix does not match the stated order")
        coeffs = v.coeffs
        return cls(
            v=v,
            gamma=float(data["gamma"]),
            v0_tilde=coeffs[:, 0, 0],
            iterations=np.zeros(knots.n_intervals, dtype=int),
            changes=[],
            converged=np.ones(knots.n_intervals, dtype=bool),
            integrand_coeffs=np.empty((v.dim, 0, 0)),
        )


def uniform_knots(epsilon: float, T: float, h: float) -> KnotCollection:
    """Equispaced knots of size ``h`` on ``[ε, T]``, last one clipped to ``T``."""
    return KnotCollection.uniform(epsilon, T, h)


def geometric_knots(
    epsilon: float, T: float, gamma: float, c: float, h_max: float
) -> KnotCollection:
    """Knots that grow geometrically away from ``ε`` up to size ``h_max``.

    For ``γ < 1`` the size is ``h_i = min(h_max, (c^{1/(1-γ)} - 1) t_i)``,
    the largest step with ``(1 + h_i/t_i)^{1-γ} <= c``. For ``γ = 1`` all
    knots have size ``h_max``. The last knot is clipped to ``T``.
    """
    if not c > 1:
        raise DomainError(f"c must be > 1, got {c}")
    if not h_max > 0:
        raise DomainError(f"h_max must be > 0, got {h_max}")
    if not T > epsilon >= 0:
        raise DomainError(f"need 0 <= epsilon < T (epsilon={epsilon}, T={T})")
    if gamma >= 1.0:
        return KnotCollection.uniform(epsilon, T, h_max)
    if epsilon == 0:
        raise DegenerateKnotsError("epsilon = 0 with gamma < 1 gives a zero first knot")
    growth = c ** (1.0 / (1.0 - gamma)) - 1.0
    pts = [epsilon]
    t = epsilon
    slack = 1e-9 * h_max
    while True:
        h = min(h_max, growth * t)
        if t + h >= T - slack:
            pts.append(T)
            break
        t = t + h
        pts.append(t)
    return KnotCollection(np.asarray(pts))


def contraction_check(
    K_norm: float, knots: KnotCollection, gamma: float, alpha: float, q: int
):
    """Per-knot contraction factors ``(1 + h_i/t_i)^{1-γ} Ψ_i ‖K‖∞``.

    ``Ψ_i = ((5/2)(h_i/√q)^α + h_i^α) / Γ(α+1)``. Returns ``(factors, ok)``
    where ``ok`` says whether every factor is below one. Diagnostic only.
    """
    h = knots.widths
    t = knots.left
    psi = (2.5 * (h / math.sqrt(q)) ** alpha + h**alpha) / gamma_fn(alpha + 1.0)
    if gamma >= 1.0:
        growth = np.ones_like(h)
    else:
        with np.errstate(divide="ignore"):
            growth = (1.0 + h / t) ** (1.0 - gamma)
    factors = growth * psi * K_norm
    if K_norm == 0:
        factors = np.zeros_like(h)
    return factors, bool(np.all(factors < 1.0))


def estimate_lipschitz(rhs, t, y, rel_step: float = 1e-6) -> float:
    """Finite-difference estimate of ``‖K‖∞`` from samples.

    ``t`` has shape ``(n,)`` and ``y`` shape ``(d, n)``. The Jacobian of
    ``rhs`` in ``y`` is approximated by central differences at every sample;
    ``K`` is the entrywise maximum of its absolute value.
    """
    t = np.asarray(t, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    d = y.shape[0]
    K = np.zeros((d, d))
    for col in range(d):
        step = rel_step * np.maximum(1.0, np.abs(y[col]))
        yp, ym = y.copy(), y.copy()
        yp[col] += step
        ym[col] -= step
        deriv = (np.asarray(rhs(t, yp)) - np.asarray(rhs(t, ym))) / (2 * step)
        K[:, col] = np.max(np.abs(deriv), axis=1)
    return float(np.max(np.sum(K, axis=1)))


def _local_powers(q_from: int, q_to: int) -> np.ndarray:
    """``U[l, j] = (j / q_to)**l``: monomials at the order-``q_to`` nodes."""
    u = np.arange(q_to + 1, dtype=np.float64) / q_to
    return u[None, :] ** np.arange(q_from + 1)[:, None]


def solve(
    problem: HilferProblem,
    config: SolverConfig,
    knots: Optional[KnotCollection] = None,
) -> SolutionApprox:
    """Approximate the solution of ``problem`` on ``knots``.

    Without ``knots`` the geometric rule with ``config.knot_c`` and
    ``config.h_max`` is used.

    Raises
    ------
    ConvergenceError
        ``config.strict`` is set and a knot needs more than ``max_iter``
        Picard iterations.
    NonFiniteError
        A coefficient becomes inf or nan.
    """
    gamma = problem.gamma
    alpha = problem.alpha
    if knots is None:
        knots = geometric_knots(
            problem.epsilon, problem.T, gamma, config.knot_c, config.h_max
        )
    span_tol = 1e-12 * max(1.0, abs(problem.T))
    if abs(knots.start - problem.epsilon) > span_tol or abs(knots.stop - problem.T) > span_tol:
        raise DomainError(
            f"knots span [{knots.start}, {knots.stop}] but the problem lives on "
            f"[{problem.epsilon}, {problem.T}]"
        )
    q, qp = config.q, config.q_prime
    d, n = problem.dim, knots.n_intervals
    left, right = knots.left, knots.right

    factors = None
    if config.lipschitz is not None:
        factors, ok = contraction_check(config.lipschitz, knots, gamma, alpha, q)
        if not ok:
            bad = int(np.argmax(factors))
            warnings.warn(
                f"contraction condition violated on {int(np.sum(factors >= 1))} knots "
                f"(max factor {factors[bad]:.3g} on knot {bad})",
                RuntimeWarning,
                stacklevel=2,
            )

    v0 = problem.y0_tilde / gamma_fn(gamma)
    tau_q = node_matrix(knots, q)
    tau_qp = node_matrix(knots, qp)
    unweighted = gamma == 1.0
    if unweighted:
        w_out = np.ones_like(tau_q)
        w_in_q = np.ones_like(tau_q)
    else:
        w_out = tau_q ** (1.0 - gamma)
        w_in_q = tau_q ** (gamma - 1.0)
    Bq = bernstein_basis_matrix(q)
    Bqp = bernstein_basis_matrix(qp)
    # monomial evaluation at the order-q' nodes, from order-q Bernstein coefficients
    to_qp_nodes = Bq @ _local_powers(q, qp)

    def integrand(i, a_rows):
        g = _integrand(i, a_rows)
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(f"right-hand side is not finite on knot {i}")
        return g

    def _integrand(i, a_rows):
        if problem.spline_rhs is not None:
            y_rows = (w_in_q[i] * a_rows)[:, None, :]
            g = np.asarray(problem.spline_rhs(y_rows), dtype=np.float64)[:, 0, :]
            if g.shape[-1] - 1 > qp:
                raise DomainError(
                    f"spline_rhs returned order {g.shape[-1] - 1} > q_prime={qp}"
                )
            return elevate_rows(g, qp)
        # weight the order-q coefficients, then evaluate that y-spline at the q' nodes
        y_nodes = (w_in_q[i] * a_rows) @ to_qp_nodes
        return np.asarray(problem.rhs(tau_qp[i], y_nodes), dtype=np.float64).reshape(d, qp + 1)

    A = np.zeros((d, n, q + 1))
    G = np.zeros((d, n, qp + 1))  # integrand coefficients of finished knots
    G_mono = np.zeros((d, n, qp + 1))
    iterations = np.zeros(n, dtype=int)
    converged = np.zeros(n, dtype=bool)
    changes = []
    t_start = time.perf_counter()

    for i in range(n):
        A[:, i, :] = v0[:, None] if i == 0 else A[:, i - 1, q][:, None]
        pts = tau_q[i]
        if i > 0:
            J_hist = integration_tensor_array(left[:i], right[:i], qp, alpha, pts)
            hist = contract(G_mono[:, :i, :], J_hist)
        else:
            hist = np.zeros((d, q + 1))
        J_cur = integration_tensor_array(left[i : i + 1], right[i : i + 1], qp, alpha, pts)
        knot_changes = []
        for it in range(1, config.max_iter + 1):
            g = integrand(i, A[:, i, :])
            cur = contract((g @ Bqp)[:, None, :], J_cur)
            new = v0[:, None] + w_out[i] * (hist + cur)
            if i > 0:
                # the left node is fixed by the finished knots; keep it bitwise continuous
                new[:, 0] = A[:, i - 1, q]
            if not np.all(np.isfinite(new)):
                raise NonFiniteError(f"non-finite coefficient on knot {i} at iteration {it}")
            change = float(np.max(np.abs(new - A[:, i, :])))
            A[:, i, :] = new
            knot_changes.append(change)
            if change < config.eps_it:
                converged[i] = True
                break
        iterations[i] = it
        changes.append(np.asarray(knot_changes))
        if not converged[i] and config.strict:
            if factors is not None:
                factor = float(factors[i])
            elif len(knot_changes) > 1 and knot_changes[-2] > 0:
                # observed ratio of successive updates
                factor = knot_changes[-1] / knot_changes[-2]
            else:
                factor = float("nan")
            raise ConvergenceError(i, it, knot_changes[-1], factor)
        G[:, i, :] = integrand(i, A[:, i, :])
        G_mono[:, i, :] = G[:, i, :] @ Bqp

    wall = time.perf_counter() - t_start
    logger.debug(
        "solved %d knots, %d Picard iterations in %.3fs", n, int(iterations.sum()), wall
    )
    v = VectorSpline(tuple(BernsteinSpline(knots, A[m]) for m in range(d)))
    return SolutionApprox(
        v=v,
        gamma=gamma,
        v0_tilde=v0,
        iterations=iterations,
        changes=changes,
        converged=converged,
        integrand_coeffs=G,
        wall_time=wall,
        meta={"q": q, "q_prime": qp, "eps_it": config.eps_it, "alpha": alpha,
              "beta": problem.beta, "problem": problem.name},
    )


def eval_solution(sol: SolutionApprox, t):
    """``y(t) = t^{γ-1} v(t)`` for ``t`` in ``[ε, T]``; shape ``(d,) + t.shape``."""
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any((t_arr < sol.epsilon) | (t_arr > sol.T)):
        raise DomainError(f"t must lie in [{sol.epsilon}, {sol.T}]")
    v = sol.v(t_arr)
    if sol.gamma == 1.0:
        return v
    return t_arr ** (sol.gamma - 1.0) * v
