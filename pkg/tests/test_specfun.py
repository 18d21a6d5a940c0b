import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from hilfspline.errors import DomainError, NonFiniteError
from hilfspline.specfun import beta_fn, gamma_fn, inc_beta, log_gamma_fn, mittag_leffler

pos = st.floats(min_value=0.05, max_value=5.0)


@pytest.mark.parametrize("x, expected", [(1.0, 1.0), (5.0, 24.0), (0.5, math.sqrt(math.pi))])
def test_gamma_known_values(x, expected):
    assert gamma_fn(x) == pytest.approx(expected, rel=1e-14)


def test_gamma_relative_error_on_range():
    x = np.linspace(1e-3, 50.0, 4001)
    ref = np.array([math.gamma(v) for v in x])
    assert np.max(np.abs(gamma_fn(x) / ref - 1.0)) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-3, max_value=40.0))
def test_gamma_recurrence(x):
    assert gamma_fn(x + 1.0) == pytest.approx(x * gamma_fn(x), rel=1e-11)


def test_log_gamma_matches_lgamma():
    x = np.concatenate([np.linspace(0.01, 10, 200), [50.0, 171.5, 500.0, 1e4]])
    ref = np.array([math.lgamma(v) for v in x])
    np.testing.assert_allclose(log_gamma_fn(x), ref, rtol=1e-13, atol=1e-13)


def test_gamma_returns_float_for_scalar():
    assert isinstance(gamma_fn(2.5), float)
    assert gamma_fn(np.array([1.0, 2.0])).shape == (2,)


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_gamma_domain(bad):
    with pytest.raises(DomainError):
        gamma_fn(bad)


def test_beta_known_values():
    assert beta_fn(2.0, 1.0) == pytest.approx(0.5, rel=1e-15)
    assert beta_fn(0.5, 0.5) == pytest.approx(math.pi, rel=1e-14)


def test_beta_quadrature_oracle():
    # [DERIVED] quadrature of the defining integral
    ref, _ = integrate.quad(lambda t: 1.0, 0, 1, weight="alg", wvar=(-0.25, -0.5),
                            epsabs=1e-15, epsrel=1e-14)
    assert beta_fn(0.75, 0.5) == pytest.approx(ref, rel=1e-12)


def test_beta_large_arguments_use_log_path():
    assert beta_fn(100.0, 80.0) == pytest.approx(special.beta(100.0, 80.0), rel=1e-11)


def test_beta_domain():
    with pytest.raises(DomainError):
        beta_fn(0.0, 1.0)
    with pytest.raises(DomainError):
        beta_fn(1.0, -2.0)


def test_inc_beta_endpoints():
    assert inc_beta(0.0, 3.0, 0.5) == 0.0
    assert inc_beta(1.0, 2.0, 1.0) == pytest.approx(0.5, rel=1e-15)


def test_inc_beta_quadrature_oracle(backend):
    ref, _ = integrate.quad(lambda t: t * (1 - t) ** -0.5, 0, 0.3, epsabs=1e-15, epsrel=1e-13)
    assert inc_beta(0.3, 2.0, 0.5) == pytest.approx(ref, rel=1e-12)


def test_inc_beta_matches_regularized_oracle(backend, rng):
    a = rng.uniform(0.05, 8.0, 500)
    b = rng.uniform(0.05, 8.0, 500)
    z = rng.uniform(0.0, 1.0, 500)
    ref = special.betainc(a, b, z) * special.beta(a, b)
    np.testing.assert_allclose(inc_beta(z, a, b), ref, rtol=1e-11, atol=1e-300)


@settings(max_examples=200, deadline=None)
@given(pos, pos)
def test_inc_beta_at_one_is_complete_beta(a, b):
    assert inc_beta(1.0, a, b) == pytest.approx(beta_fn(a, b), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.0, max_value=1.0), pos, pos)
def test_inc_beta_symmetry(z, a, b):
    # use a z whose complement is exact, so both sides see the same point
    z = 1.0 - (1.0 - z)
    lhs = inc_beta(z, a, b)
    rhs = beta_fn(a, b) - inc_beta(1.0 - z, b, a)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(pos, pos)
def test_inc_beta_monotone_in_z(a, b):
    z = np.linspace(0.0, 1.0, 101)
    vals = inc_beta(z, a, b)
    assert np.all(np.diff(vals) >= -1e-14 * np.max(vals))


@pytest.mark.parametrize("z", [-0.1, 1.5])
def test_inc_beta_domain(z):
    with pytest.raises(DomainError):
        inc_beta(z, 1.0, 1.0)


def test_inc_beta_parameter_domain():
    with pytest.raises(DomainError):
        inc_beta(0.5, 0.0, 1.0)


def test_mittag_leffler_known_values():
    assert mittag_leffler(0.5, 0.0) == 1.0
    assert mittag_leffler(1.0, 1.0) == pytest.approx(math.e, rel=1e-15)


def test_mittag_leffler_half_erfc_identity():
    # [DERIVED] E_{1/2}(z) = exp(z^2) erfc(-z)
    z = np.linspace(-4.0, 2.0, 61)
    ref = np.exp(z**2) * special.erfc(-z)
    # rounding of the alternating sum scales with the sum of |terms|
    scale = np.exp(z**2) * special.erfc(-np.abs(z))
    assert np.all(np.abs(mittag_leffler(0.5, z) - ref) <= 1e-13 * scale)
    assert mittag_leffler(0.5, -1.0) == pytest.approx(0.42758357615580700, rel=1e-14)


def test_mittag_leffler_one_is_exp():
    z = np.linspace(-20.0, 20.0, 81)
    np.testing.assert_allclose(mittag_leffler(1.0, z), np.exp(z), rtol=1e-10, atol=1e-10)


def test_mittag_leffler_one_short_series_is_truncated():
    # 30 terms do not reach exp(20), so the series value is returned
    partial = sum(20.0**j / math.factorial(j) for j in range(30))
    assert mittag_leffler(1.0, 20.0, n_terms=30) == pytest.approx(partial, rel=1e-13)


def test_mittag_leffler_truncation_parameter():
    assert mittag_leffler(1.0, 1.0, n_terms=1) == 1.0
    assert mittag_leffler(1.0, 1.0, n_terms=3) == pytest.approx(2.5)


def test_mittag_leffler_errors():
    with pytest.raises(DomainError):
        mittag_leffler(1.5, 1.0)
    with pytest.raises(DomainError):
        mittag_leffler(0.5, 1.0, n_terms=0)
    with pytest.raises(NonFiniteError):
        mittag_leffler(0.1, 1e4)
