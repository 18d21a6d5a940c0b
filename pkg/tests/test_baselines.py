import math

import numpy as np
import pytest
from scipy import integrate, special

from hilfspline.baselines import (
    GridSolution,
    abm_solve,
    abm_weights,
    analytic_poly_solution,
    ml_solution_linear,
)
from hilfspline.errors import DomainError, NonFiniteError


def test_analytic_poly_known_value():
    ref = 1 / math.gamma(0.75) + math.gamma(1.9) / math.gamma(2.4)
    assert analytic_poly_solution(0.5, 0.5, 0.9, 1.0, 1.0) == pytest.approx(ref, rel=1e-14)


def test_analytic_poly_integral_part_by_quadrature():
    # [DERIVED] I^α t^k by quadrature plus the homogeneous part
    t, a, k = 1.7, 0.5, 0.9
    integral, _ = integrate.quad(lambda s: s**k, 0, t, weight="alg", wvar=(0.0, a - 1.0), epsabs=1e-14)
    ref = 2.0 * t ** (0.75 - 1) / math.gamma(0.75) + integral / math.gamma(a)
    assert analytic_poly_solution(a, 0.5, k, 2.0, t) == pytest.approx(ref, rel=1e-11)


def test_analytic_poly_classical_alpha_one():
    # α = 1: y' = t^k, y(0) = y0
    assert analytic_poly_solution(1.0, 0.3, 2.0, 1.5, 2.0) == pytest.approx(1.5 + 8.0 / 3.0, rel=1e-14)


def test_analytic_poly_domain():
    with pytest.raises(DomainError):
        analytic_poly_solution(0.5, 0.5, 0.9, 1.0, 0.0)


def test_ml_solution_linear():
    t = np.linspace(0.0, 15.0, 31)
    ref = np.exp(t) * special.erfc(np.sqrt(t))
    # the alternating series loses about e^{t} relative to the result
    got = ml_solution_linear(0.5, -1.0, 1.0, t)
    assert np.all(np.abs(got - ref) <= 1e-13 * np.exp(t) + 1e-14)
    assert ml_solution_linear(0.5, -1.0, 2.0, 0.0) == 2.0
    with pytest.raises(DomainError):
        ml_solution_linear(0.5, -1.0, 1.0, -1.0)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.9])
@pytest.mark.parametrize("n", [0, 1, 5, 40])
def test_abm_weight_identities(alpha, n):
    h = 0.1
    b, a = abm_weights(alpha, n, h)
    assert b.shape == a.shape == (n + 1,)
    # rectangle weights integrate 1 exactly
    assert b.sum() == pytest.approx(h**alpha / alpha * (n + 1) ** alpha, rel=1e-13)
    # trapezoid weights plus the a_{n+1} = 1 weight integrate 1 exactly
    assert a.sum() + 1.0 == pytest.approx((alpha + 1) * (n + 1) ** alpha, rel=1e-12)
    assert np.all(b > 0) and np.all(a > 0)


def test_abm_constant_rhs_exact():
    alpha, c, x0 = 0.6, 2.5, 0.3
    sol = abm_solve(lambda t, x: np.full_like(x, c), alpha, [x0], 3.0, 0.05)
    exact = x0 + c * sol.times**alpha / math.gamma(alpha + 1)
    np.testing.assert_allclose(sol.values[0], exact, atol=1e-10, rtol=0)


def test_abm_linear_in_time_exact():
    # the product trapezoid rule integrates piecewise linear f exactly
    alpha = 0.4
    sol = abm_solve(lambda t, x: np.broadcast_to(t, x.shape), alpha, [1.0], 2.0, 0.1)
    exact = 1.0 + sol.times ** (1 + alpha) / math.gamma(2 + alpha)
    np.testing.assert_allclose(sol.values[0], exact, atol=1e-12)


def test_abm_matches_weights_helper():
    alpha, h = 0.5, 0.25
    sol = abm_solve(lambda t, x: -x, alpha, [1.0], 1.0, h)
    # rebuild the last corrector step from abm_weights
    n = 3
    b, a = abm_weights(alpha, n, h)
    F = -sol.values[0, : n + 1]
    pred = 1.0 + (F @ b) / math.gamma(alpha)
    x = 1.0 + h**alpha / math.gamma(alpha + 2) * (-pred + F @ a)
    assert sol.values[0, n + 1] == pytest.approx(x, rel=1e-14)


def test_abm_convergence_on_linear_problem():
    t_ref = 4.0
    errs = []
    for h in (2.0**-3, 2.0**-5):
        sol = abm_solve(lambda t, x: -x, 0.5, [1.0], t_ref, h)
        errs.append(np.max(np.abs(sol.values[0] - ml_solution_linear(0.5, -1.0, 1.0, sol.times))))
    # roughly first order or better in h
    assert errs[1] < errs[0] / 4


def test_abm_system():
    sol = abm_solve(lambda t, x: np.vstack([-x[0], -2 * x[1]]), 0.5, [1.0, 1.0], 1.0, 2.0**-6)
    assert sol.values.shape == (2, 65)
    ref = ml_solution_linear(0.5, -2.0, 1.0, sol.times)
    assert np.max(np.abs(sol.values[1] - ref)) < 5e-3


def test_abm_validation():
    with pytest.raises(DomainError):
        abm_solve(lambda t, x: x, 1.5, [1.0], 1.0, 0.1)
    with pytest.raises(DomainError):
        abm_solve(lambda t, x: x, 0.5, [1.0], 1.0, 0.0)
    with pytest.raises(NonFiniteError):
        abm_solve(lambda t, x: np.where(t > 1.0, np.inf, x), 0.5, [1.0], 3.0, 0.5)


def test_grid_solution_validation():
    with pytest.raises(DomainError):
        GridSolution(np.array([0.0, 0.0]), np.zeros((1, 2)), "x")
    with pytest.raises(NonFiniteError):
        GridSolution(np.array([0.0, 1.0]), np.array([[0.0, np.nan]]), "x")
