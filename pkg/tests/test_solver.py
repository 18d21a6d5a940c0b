import json
import math
import warnings

import numpy as np
import pytest

from hilfspline.baselines import analytic_poly_solution, ml_solution_linear
from hilfspline.errors import ConvergenceError, DegenerateKnotsError, DomainError, NonFiniteError
from hilfspline.fracint import frac_int_spline
from hilfspline.solver import (
    HilferProblem,
    SolutionApprox,
    SolverConfig,
    contraction_check,
    estimate_lipschitz,
    eval_solution,
    gamma_param,
    geometric_knots,
    solve,
    uniform_knots,
)
from hilfspline.splines import BernsteinSpline, KnotCollection, node_matrix


def zero_rhs(t, y):
    return np.zeros_like(y)


def linear(a):
    return lambda t, y: a * y


# parameters and validation -------------------------------------------------

@pytest.mark.parametrize("alpha, beta, gamma", [(0.5, 1.0, 1.0), (0.5, 0.0, 0.5), (0.5, 0.5, 0.75)])
def test_gamma_param(alpha, beta, gamma):
    assert gamma_param(alpha, beta) == pytest.approx(gamma, abs=1e-15)


@pytest.mark.parametrize("alpha, beta", [(0.0, 0.5), (1.0, 0.5), (0.5, -0.1), (0.5, 1.1)])
def test_gamma_param_bounds(alpha, beta):
    with pytest.raises(DomainError):
        gamma_param(alpha, beta)


def test_problem_validation():
    with pytest.raises(DomainError, match="epsilon"):
        HilferProblem(zero_rhs, 0.5, 0.5, [1.0], 1.0, 0.0)
    with pytest.raises(DomainError):
        HilferProblem(zero_rhs, 0.5, 1.0, [1.0], 1.0, 2.0)
    with pytest.raises(DomainError):
        HilferProblem(zero_rhs, 1.5, 1.0, [1.0], 1.0)
    p = HilferProblem(zero_rhs, 0.5, 1.0, [1.0, 2.0], 1.0)
    assert p.dim == 2 and p.gamma == 1.0


def test_config_validation():
    assert SolverConfig(q=2).q_prime == 6
    for kw in ({"q": 0}, {"q": 3, "q_prime": 2}, {"eps_it": 0.0}, {"max_iter": 0},
               {"knot_c": 1.0}, {"h_max": 0.0}):
        with pytest.raises(DomainError):
            SolverConfig(**kw)
    with pytest.warns(RuntimeWarning):
        SolverConfig(q=17, q_prime=17)


# knots and contraction -------------------------------------------------------

def test_geometric_knots_caputo_is_uniform():
    k = geometric_knots(0.0, 1.0, 1.0, 1.5, 0.25)
    np.testing.assert_allclose(k.breakpoints, [0, 0.25, 0.5, 0.75, 1.0])


@pytest.mark.parametrize("beta, count", [(0.0, 2010), (0.25, 2007), (0.5, 2005), (0.75, 2002), (1.0, 2000)])
def test_geometric_knot_counts(beta, count):
    # [PAPER] interval counts of the Van der Pol runs
    g = gamma_param(0.5, beta)
    eps = 0.0 if g == 1.0 else 1e-5
    assert geometric_knots(eps, 100.0, g, 1.5, 0.05).n_intervals == count


@pytest.mark.parametrize("gamma", [0.3, 0.5, 0.75, 0.95])
def test_geometric_knots_growth_guarantee(gamma):
    k = geometric_knots(1e-4, 10.0, gamma, 1.5, 0.05)
    growth = (1 + k.widths / k.left) ** (1 - gamma)
    assert np.all(growth <= 1.5 * (1 + 1e-12))
    assert np.all(k.widths <= 0.05 * (1 + 1e-12))
    assert k.stop == 10.0


def test_geometric_knots_degenerate():
    with pytest.raises(DegenerateKnotsError):
        geometric_knots(0.0, 1.0, 0.5, 1.5, 0.05)
    with pytest.raises(DomainError):
        geometric_knots(0.1, 1.0, 0.5, 1.0, 0.05)


def test_contraction_check_examples():
    k = KnotCollection([0.0, 0.5])
    f, ok = contraction_check(0.0, k, 1.0, 0.5, 1)
    assert ok and np.all(f == 0)
    f, ok = contraction_check(1.0, k, 1.0, 0.5, 1)
    # [DERIVED] 3.5 * sqrt(0.5) / Γ(1.5)
    assert f[0] == pytest.approx(3.5 * math.sqrt(0.5) / math.gamma(1.5), rel=1e-13)
    assert f[0] == pytest.approx(2.7927, abs=2e-4)
    assert not ok


def test_contraction_check_gamma_one_ignores_position():
    k = KnotCollection([0.0, 0.1, 0.2])
    f, _ = contraction_check(1.0, k, 1.0, 0.5, 2)
    assert f[0] == pytest.approx(f[1], rel=1e-14)


def test_estimate_lipschitz_linear():
    t = np.linspace(0, 1, 5)
    y = np.vstack([np.linspace(-1, 1, 5), np.ones(5)])
    K = estimate_lipschitz(lambda t, y: np.vstack([-2 * y[0] + y[1], 0.5 * y[1]]), t, y)
    assert K == pytest.approx(3.0, rel=1e-6)


# solver behaviour ------------------------------------------------------------

@pytest.mark.parametrize("beta", [0.0, 0.3, 0.5, 1.0])
def test_homogeneous_exactness(beta):
    eps = 0.0 if beta == 1.0 else 1e-3
    prob = HilferProblem(zero_rhs, 0.5, beta, [1.3, -0.4], 3.0, eps)
    sol = solve(prob, SolverConfig(q=2, q_prime=2), uniform_knots(eps, 3.0, 0.25))
    g = prob.gamma
    np.testing.assert_allclose(sol.v.coeffs, np.broadcast_to((prob.y0_tilde / math.gamma(g))[:, None, None],
                                                            sol.v.coeffs.shape), rtol=1e-15)
    tau = node_matrix(sol.knots, 2).ravel()
    exact = prob.y0_tilde[:, None] * tau ** (g - 1) / math.gamma(g)
    np.testing.assert_allclose(eval_solution(sol, tau), exact, rtol=1e-12)


def test_caputo_initial_value_exact():
    prob = HilferProblem(linear(-1.0), 0.5, 1.0, [0.7], 2.0, 0.0)
    sol = solve(prob, SolverConfig(q=1, q_prime=1), uniform_knots(0.0, 2.0, 0.125))
    assert sol(0.0)[0] == 0.7


def run_linear(h=2.0**-4, beta=0.5, q=2, eps=1e-3):
    prob = HilferProblem(linear(-1.0), 0.5, beta, [1.0], 4.0, eps)
    return prob, solve(prob, SolverConfig(q=q, q_prime=q, eps_it=1e-13), uniform_knots(eps, 4.0, h))


def test_fixed_point_residual():
    prob, sol = run_linear()
    q, qp = sol.v.order, sol.meta["q_prime"]
    g_spline = BernsteinSpline(sol.knots, sol.integrand_coeffs[0])
    tau = node_matrix(sol.knots, q)
    integral = frac_int_spline(g_spline, prob.alpha, tau.ravel()).reshape(tau.shape)
    rhs = sol.v0_tilde[0] + tau ** (1 - prob.gamma) * integral
    assert np.max(np.abs(sol.v.coeffs[0] - rhs)) <= 10 * 1e-13


def test_knot_continuity_exact():
    _, sol = run_linear()
    A = sol.v.coeffs
    np.testing.assert_array_equal(A[:, 1:, 0], A[:, :-1, -1])


def test_monotone_contraction_on_contractive_knots():
    prob, sol = run_linear(h=2.0**-6, beta=1.0, q=1, eps=0.0)
    factors, ok = contraction_check(1.0, sol.knots, prob.gamma, prob.alpha, 1)
    assert ok
    for ch in sol.changes:
        assert np.all(ch[2:] <= 1.01 * ch[1:-1])


def test_linear_caputo_matches_reference():
    # [PAPER] spline mean knot error at h = 2^-4 on the Caputo test problem
    prob = HilferProblem(linear(-1.0), 0.5, 1.0, [1.0], 15.0, 0.0, spline_rhs=lambda Y: -Y)
    knots = uniform_knots(0.0, 15.0, 2.0**-4)
    sol = solve(prob, SolverConfig(q=1, q_prime=1), knots)
    err = np.abs(sol(knots.breakpoints)[0] - ml_solution_linear(0.5, -1.0, 1.0, knots.breakpoints))
    assert err.mean() == pytest.approx(1.884e-4, rel=5e-3)


def test_spline_rhs_and_sampled_rhs_agree_for_linear():
    # with q = q' = 1 node samples and control points coincide
    kw = dict(alpha=0.5, beta=0.5, y0_tilde=[1.0], T=2.0, epsilon=1e-3)
    p1 = HilferProblem(linear(-0.8), **kw)
    p2 = HilferProblem(linear(-0.8), spline_rhs=lambda Y: -0.8 * Y, **kw)
    knots = uniform_knots(1e-3, 2.0, 0.1)
    cfg = SolverConfig(q=1, q_prime=1)
    np.testing.assert_allclose(solve(p1, cfg, knots).v.coeffs, solve(p2, cfg, knots).v.coeffs,
                               rtol=1e-13, atol=1e-13)


def test_sampled_rhs_uses_weighted_coefficients():
    # q' nodes see the order-q spline with coefficients t^{γ-1} a, as in the pseudocode
    seen = []

    def rhs(t, y):
        seen.append((t.copy(), y.copy()))
        return np.zeros_like(y)

    prob = HilferProblem(rhs, 0.5, 0.0, [1.0], 1.0, 0.25)
    solve(prob, SolverConfig(q=1, q_prime=2), KnotCollection([0.25, 1.0]))
    t, y = seen[0]
    w = np.array([0.25, 1.0]) ** -0.5 / math.sqrt(math.pi)
    np.testing.assert_allclose(y[0], [w[0], 0.5 * (w[0] + w[1]), w[1]], rtol=1e-14)


def test_polynomial_problem_converges_to_analytic():
    prob = HilferProblem(lambda t, y: np.broadcast_to(t**0.9, y.shape), 0.5, 0.5, [1.0], 1.0, 1e-10)
    pts = np.linspace(0.05, 1.0, 50)
    errs = []
    for h in (2.0**-3, 2.0**-5):
        sol = solve(prob, SolverConfig(q=1, q_prime=1), uniform_knots(1e-10, 1.0, h))
        exact = analytic_poly_solution(0.5, 0.5, 0.9, 1.0, pts)
        errs.append(np.max(np.abs(pts**0.25 * (sol(pts)[0] - exact))))
    assert errs[1] < errs[0] / 8


def test_default_knots_use_geometric_rule():
    prob = HilferProblem(zero_rhs, 0.5, 0.5, [1.0], 1.0, 1e-3)
    sol = solve(prob, SolverConfig(q=1, h_max=0.1))
    assert sol.knots == geometric_knots(1e-3, 1.0, 0.75, 1.5, 0.1)


def test_knots_must_span_problem():
    prob = HilferProblem(zero_rhs, 0.5, 1.0, [1.0], 1.0)
    with pytest.raises(DomainError):
        solve(prob, SolverConfig(), uniform_knots(0.0, 2.0, 0.5))


def test_strict_nonconvergence_raises_with_diagnostics():
    prob = HilferProblem(linear(-1.0), 0.5, 1.0, [1.0], 2.0)
    with pytest.raises(ConvergenceError) as info:
        solve(prob, SolverConfig(q=1, q_prime=1, max_iter=3), uniform_knots(0.0, 2.0, 0.5))
    err = info.value
    assert err.knot == 0 and err.iterations == 3
    assert "knot 0" in str(err) and "contraction factor" in str(err)
    assert 0 < err.contraction_factor < 1


def test_contraction_factor_from_lipschitz_in_error():
    prob = HilferProblem(linear(-1.0), 0.5, 1.0, [1.0], 2.0)
    with pytest.warns(RuntimeWarning, match="contraction"):
        with pytest.raises(ConvergenceError) as info:
            solve(prob, SolverConfig(q=1, q_prime=1, max_iter=2, lipschitz=1.0),
                  uniform_knots(0.0, 2.0, 0.5))
    assert info.value.contraction_factor == pytest.approx(3.5 * math.sqrt(0.5) / math.gamma(1.5), rel=1e-13)


def test_capped_iterations_non_strict():
    prob = HilferProblem(linear(-1.0), 0.5, 1.0, [1.0], 2.0)
    sol = solve(prob, SolverConfig(q=1, q_prime=1, max_iter=2, strict=False),
                uniform_knots(0.0, 2.0, 0.25))
    assert np.all(sol.iterations == 2) and not sol.converged.any()


def test_nonfinite_rhs():
    prob = HilferProblem(lambda t, y: np.full_like(y, np.inf), 0.5, 1.0, [1.0], 1.0)
    with pytest.raises(NonFiniteError):
        solve(prob, SolverConfig(q=1), uniform_knots(0.0, 1.0, 0.5))


def test_spline_rhs_order_too_high():
    prob = HilferProblem(zero_rhs, 0.5, 1.0, [1.0], 1.0,
                         spline_rhs=lambda Y: np.zeros(Y.shape[:-1] + (5,)))
    with pytest.raises(DomainError):
        solve(prob, SolverConfig(q=1, q_prime=2), uniform_knots(0.0, 1.0, 0.5))


def test_eval_solution_domain():
    _, sol = run_linear(h=0.5)
    with pytest.raises(DomainError):
        eval_solution(sol, 1e-4)


def test_solution_json_roundtrip():
    _, sol = run_linear(h=0.5)
    data = json.loads(json.dumps(sol.to_dict()))
    assert set(data) == {"gamma", "epsilon", "order", "knots", "coeffs"}
    back = SolutionApprox.from_dict(data)
    t = np.linspace(sol.epsilon, sol.T, 13)
    np.testing.assert_array_equal(back(t), sol(t))


def test_iteration_log():
    _, sol = run_linear(h=0.5)
    assert sol.iterations.shape == (sol.knots.n_intervals,)
    assert all(len(c) == n for c, n in zip(sol.changes, sol.iterations))
    assert sol.converged.all()
    assert sol.total_iterations == sol.iterations.sum()
