"""Exact Riemann-Liouville integrals of monomials and Bernstein splines.

The spline integral is a contraction of the monomial coefficients ``A @ B``
with a tensor ``J[i, l, m]`` holding the integral of the ``l``-th local
monomial of interval ``i`` evaluated at point ``m``; each entry is a closed
form in the incomplete beta function.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DomainError, NonFiniteError
from .specfun import beta_fn, gamma_fn, inc_beta
from .splines import BernsteinSpline, KnotCollection

__all__ = [
    "IntegrationTensor",
    "frac_int_monomial_left",
    "frac_int_monomial_right",
    "integration_tensor",
    "integration_tensor_array",
    "contract",
    "frac_int_spline",
]


def _check_monomial_args(alpha, k, b, t):
    if alpha <= 0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    if k <= -1:
        raise DomainError(f"monomial degree must be > -1, got {k}")
    if t <= 0 or not 0 <= b <= t:
        raise DomainError(f"need 0 <= b <= t and t > 0 (b={b}, t={t})")


def frac_int_monomial_left(alpha: float, k: float, b: float, t: float) -> float:
    """``(1/Γ(α)) ∫_0^b (t - s)^(α-1) s^k ds`` for ``0 <= b <= t``."""
    _check_monomial_args(alpha, k, b, t)
    if b == 0:
        return 0.0
    return t ** (alpha + k) / gamma_fn(alpha) * inc_beta(b / t, k + 1.0, alpha)


def frac_int_monomial_right(alpha: float, k: float, b: float, t: float) -> float:
    """``(1/Γ(α)) ∫_b^t (t - s)^(α-1) s^k ds`` for ``0 <= b <= t``."""
    _check_monomial_args(alpha, k, b, t)
    if b == t:
        return 0.0
    return t ** (alpha + k) / gamma_fn(alpha) * inc_beta(1.0 - b / t, alpha, k + 1.0)


@dataclass(frozen=True, eq=False)
class IntegrationTensor:
    """``J`` of shape ``(k+1, q+1, p+1)`` plus the data it was built from."""

    J: np.ndarray
    alpha: float
    knots: KnotCollection
    eval_points: np.ndarray

    @property
    def order(self) -> int:
        return self.J.shape[1] - 1


def integration_tensor_array(left, right, q, alpha, eval_points) -> np.ndarray:
    """Raw ``J`` array for intervals ``[left[i], right[i]]``.

    Entries vanish where the evaluation point does not lie past the interval's
    left end.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    cbeta = np.asarray(beta_fn(np.arange(1, q + 2, dtype=np.float64), alpha))
    J = kernels.integration_tensor(
        np.ascontiguousarray(left, dtype=np.float64),
        np.ascontiguousarray(right, dtype=np.float64),
        int(q),
        float(alpha),
        np.ascontiguousarray(eval_points, dtype=np.float64),
        cbeta,
        gamma_fn(alpha),
    )
    if not np.all(np.isfinite(J)):
        raise NonFiniteError("integration tensor has non-finite entries")
    return J


def integration_tensor(
    knots: KnotCollection, q: int, alpha: float, eval_points
) -> IntegrationTensor:
    """Integration tensor of the order-``q`` local monomials of ``knots``."""
    pts = np.asarray(eval_points, dtype=np.float64).reshape(-1)
    if np.any((pts < knots.start) | (pts > knots.stop)):
        raise DomainError(
            f"evaluation points must lie in [{knots.start}, {knots.stop}]"
        )
    J = integration_tensor_array(knots.left, knots.right, q, alpha, pts)
    return IntegrationTensor(J, float(alpha), knots, pts)


def contract(mono, J) -> np.ndarray:
    """Sum ``mono[..., i, l] * J[i, l, m]`` over ``(i, l)``.

    ``mono`` has shape ``(..., n, q+1)``. The reduction runs along a
    contiguous axis so numpy applies pairwise summation, which fixes the
    summation order.
    """
    mono = np.asarray(mono, dtype=np.float64)
    n, ql = J.shape[0], J.shape[1]
    lead = mono.shape[:-2]
    terms = mono.reshape(lead + (n * ql, 1)) * J.reshape(n * ql, -1)
    terms = np.ascontiguousarray(np.swapaxes(terms, -1, -2))
    return terms.sum(axis=-1)


def frac_int_spline(s: BernsteinSpline, alpha: float, eval_points) -> np.ndarray:
    """Exact ``I^alpha`` of ``s`` from its left end, at each evaluation point."""
    tensor = integration_tensor(s.knots, s.order, alpha, eval_points)
    return contract(s.monomial_coeffs, tensor.J)
