"""Knot collections and Bernstein splines.

A spline of order ``q`` over a knot collection with ``k + 1`` intervals is
stored as a ``(k + 1, q + 1)`` coefficient matrix. Row ``i`` holds the
Bernstein coefficients of the piece on ``[t_i, t_{i+1}]``::

    s(t) = sum_j a[i, j] * C(q, j) * u**j * (1 - u)**(q - j),   u = (t - t_i) / h_i

When the spline comes from :func:`interpolate` the coefficients are the
samples ``f(t_i + j h_i / q)`` (the Bernstein operator); products and degree
elevation keep the same form, so the representation stays uniform.
Evaluation goes through the monomial form ``(A @ B) @ u**l``, with ``B`` from
:func:`bernstein_basis_matrix`.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, KnotMismatchError

__all__ = [
    "KnotCollection",
    "BernsteinSpline",
    "VectorSpline",
    "bernstein_basis_matrix",
    "node_matrix",
    "interpolate",
    "eval_spline",
    "spline_product",
    "resample",
    "bernstein_product_rows",
    "elevate_rows",
    "MAX_ORDER",
    "STABLE_ORDER",
]

#: binomial products exceed 2**53 beyond this order
MAX_ORDER = 60
#: above this order Bernstein-to-monomial conversion loses most digits
STABLE_ORDER = 16


def _readonly(arr):
    arr = np.array(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class KnotCollection:
    """Strictly increasing breakpoints ``t_0 < ... < t_{k+1}``.

    Interval ``i`` is ``[t_i, t_{i+1})`` except the last, which is closed.
    """

    breakpoints: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=np.float64).reshape(-1)
        if bp.size < 2:
            raise DomainError("a knot collection needs at least two breakpoints")
        if not np.all(np.isfinite(bp)):
            raise DomainError("breakpoints must be finite")
        if np.any(np.diff(bp) <= 0):
            raise DomainError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", _readonly(bp))

    @classmethod
    def uniform(cls, start: float, stop: float, h: float) -> "KnotCollection":
        """Knots ``start, start + h, ...`` with the last one clipped to ``stop``."""
        if h <= 0 or stop <= start:
            raise DomainError(f"need h > 0 and stop > start (h={h}, [{start}, {stop}])")
        n = max(1, math.ceil((stop - start) / h - 1e-9))
        bp = start + h * np.arange(n + 1, dtype=np.float64)
        bp[-1] = stop
        return cls(bp)

    @property
    def n_intervals(self) -> int:
        return self.breakpoints.size - 1

    @property
    def left(self) -> np.ndarray:
        return self.breakpoints[:-1]

    @property
    def right(self) -> np.ndarray:
        return self.breakpoints[1:]

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def start(self) -> float:
        return float(self.breakpoints[0])

    @property
    def stop(self) -> float:
        return float(self.breakpoints[-1])

    def locate(self, t) -> np.ndarray:
        """Index of the interval containing each ``t``.

        A point exactly on an interior breakpoint belongs to the interval on
        its right; ``t_{k+1}`` belongs to the last interval.
        """
        t = np.asarray(t, dtype=np.float64)
        if np.any((t < self.breakpoints[0]) | (t > self.breakpoints[-1])) or np.any(
            np.isnan(t)
        ):
            raise DomainError(
                f"evaluation point outside knot span [{self.start}, {self.stop}]"
            )
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        return np.minimum(idx, self.n_intervals - 1)

    def subset(self, stop_index: int) -> "KnotCollection":
        """Knot collection made of the first ``stop_index`` intervals."""
        return KnotCollection(self.breakpoints[: stop_index + 1])

    def __eq__(self, other):
        if not isinstance(other, KnotCollection):
            return NotImplemented
        return self.breakpoints.shape == other.breakpoints.shape and bool(
            np.all(self.breakpoints == other.breakpoints)
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"KnotCollection(n_intervals={self.n_intervals}, "
            f"span=[{self.start:g}, {self.stop:g}])"
        )


@functools.lru_cache(maxsize=None)
def _basis_matrix_cached(q: int) -> np.ndarray:
    B = np.zeros((q + 1, q + 1))
    for j in range(q + 1):
        for ell in range(j, q + 1):
            B[j, ell] = math.comb(q, ell) * math.comb(ell, j) * (-1) ** (ell - j)
    B.setflags(write=False)
    return B


def bernstein_basis_matrix(q: int) -> np.ndarray:
    """Upper-triangular map from Bernstein coefficients to monomial coefficients.

    ``B[j, l] = C(q, l) C(l, j) (-1)**(l - j)`` for ``l >= j``. The returned
    array is read-only and shared between calls.
    """
    if q < 0:
        raise DomainError(f"order must be >= 0, got {q}")
    if q > MAX_ORDER:
        raise OverflowError(
            f"order {q} exceeds {MAX_ORDER}; binomial coefficients lose exactness"
        )
    return _basis_matrix_cached(int(q))


def node_matrix(knots: KnotCollection, q: int) -> np.ndarray:
    """Sampling nodes ``tau[i, j] = t_i + j h_i / q`` (shape ``(k+1, q+1)``)."""
    if q < 0:
        raise DomainError(f"order must be >= 0, got {q}")
    left = knots.left[:, None]
    if q == 0:
        return left.copy()
    j = np.arange(q + 1, dtype=np.float64)[None, :]
    tau = left + j * knots.widths[:, None] / q
    tau[:, -1] = knots.right  # exact endpoints, no rounding drift
    return tau


@dataclass(frozen=True, eq=False)
class BernsteinSpline:
    """Piecewise polynomial in Bernstein form over a knot collection."""

    knots: KnotCollection
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] != self.knots.n_intervals or c.shape[1] < 1:
            raise DomainError(
                f"coefficient shape {c.shape} does not match "
                f"{self.knots.n_intervals} intervals"
            )
        object.__setattr__(self, "coeffs", _readonly(c))

    @property
    def order(self) -> int:
        return self.coeffs.shape[1] - 1

    @functools.cached_property
    def monomial_coeffs(self) -> np.ndarray:
        """Per-interval coefficients in powers of the local coordinate."""
        return self.coeffs @ bernstein_basis_matrix(self.order)

    def __call__(self, t):
        return eval_spline(self, t)

    def to_dict(self) -> dict:
        return {
            "breakpoints": self.knots.breakpoints.tolist(),
            "order": self.order,
            "coeffs": self.coeffs.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BernsteinSpline":
        knots = KnotCollection(np.asarray(data["breakpoints"], dtype=np.float64))
        coeffs = np.asarray(data["coeffs"], dtype=np.float64)
        if coeffs.ndim != 2 or coeffs.shape[1] != int(data["order"]) + 1:
            raise DomainError("coefficient matrix does not match the stated order")
        return cls(knots, coeffs)


@dataclass(frozen=True, eq=False)
class VectorSpline:
    """``d`` Bernstein splines sharing one knot collection and order."""

    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise DomainError("a vector spline needs at least one component")
        k0, q0 = comps[0].knots, comps[0].order
        for c in comps[1:]:
            if c.knots != k0:
                raise KnotMismatchError("vector spline components use different knots")
            if c.order != q0:
                raise DomainError("vector spline components use different orders")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_coeffs(cls, knots: KnotCollection, coeffs) -> "VectorSpline":
        """Build from a ``(d, k+1, q+1)`` coefficient array."""
        return cls(tuple(BernsteinSpline(knots, c) for c in np.asarray(coeffs)))

    @property
    def knots(self) -> KnotCollection:
        return self.components[0].knots

    @property
    def order(self) -> int:
        return self.components[0].order

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def coeffs(self) -> np.ndarray:
        return np.stack([c.coeffs for c in self.components])

    def __call__(self, t):
        return np.stack([c(t) for c in self.components])


def interpolate(f, knots: KnotCollection, q: int) -> BernsteinSpline:
    """Bernstein spline operator: coefficients are ``f`` sampled at the nodes.

    ``f`` is called once with the full ``(k+1, q+1)`` node array and must be
    vectorized (a numpy ufunc-style callable).
    """
    if q < 1:
        raise DomainError(f"order must be >= 1, got {q}")
    if q > STABLE_ORDER:
        warnings.warn(
            f"spline order {q} > {STABLE_ORDER}; expect loss of accuracy",
            RuntimeWarning,
            stacklevel=2,
        )
    tau = node_matrix(knots, q)
    vals = np.broadcast_to(np.asarray(f(tau), dtype=np.float64), tau.shape)
    return BernsteinSpline(knots, vals)


def _horner(mono, u):
    out = mono[..., -1].copy()
    for ell in range(mono.shape[-1] - 2, -1, -1):
        out = out * u + mono[..., ell]
    return out


def eval_spline(s: BernsteinSpline, t):
    """Evaluate ``s`` at ``t`` (scalar or array) within the knot span."""
    t_arr = np.asarray(t, dtype=np.float64)
    idx = s.knots.locate(t_arr)
    u = (t_arr - s.knots.left[idx]) / s.knots.widths[idx]
    out = _horner(s.monomial_coeffs[idx], u)
    return float(out) if out.ndim == 0 else out


@functools.lru_cache(maxsize=256)
def _product_weights(q1: int, q2: int) -> np.ndarray:
    W = np.empty((q1 + 1, q2 + 1))
    for i in range(q1 + 1):
        for j in range(q2 + 1):
            W[i, j] = math.comb(q1, i) * math.comb(q2, j) / math.comb(q1 + q2, i + j)
    W.setflags(write=False)
    return W


def bernstein_product_rows(a, b) -> np.ndarray:
    """Exact product of Bernstein coefficient rows.

    ``a`` has shape ``(..., q1+1)`` and ``b`` shape ``(..., q2+1)``; the result
    has shape ``(..., q1+q2+1)`` and represents the pointwise product.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    q1, q2 = a.shape[-1] - 1, b.shape[-1] - 1
    W = _product_weights(q1, q2)
    shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1]) + (q1 + q2 + 1,)
    out = np.zeros(shape)
    for i in range(q1 + 1):
        out[..., i : i + q2 + 1] += W[i] * a[..., i : i + 1] * b
    return out


def elevate_rows(a, q_new: int) -> np.ndarray:
    """Degree-elevate Bernstein coefficient rows to order ``q_new`` (exact)."""
    a = np.asarray(a, dtype=np.float64)
    q = a.shape[-1] - 1
    if q_new < q:
        raise DomainError(f"cannot elevate order {q} down to {q_new}")
    if q_new == q:
        return a.copy()
    return bernstein_product_rows(a, np.ones(q_new - q + 1))


def spline_product(s1: BernsteinSpline, s2: BernsteinSpline) -> BernsteinSpline:
    """Exact product of two splines on the same knots (order ``q1 + q2``)."""
    if s1.knots != s2.knots:
        raise KnotMismatchError("spline_product needs identical knot collections")
    return BernsteinSpline(s1.knots, bernstein_product_rows(s1.coeffs, s2.coeffs))


def resample(s: BernsteinSpline, q_new: int) -> BernsteinSpline:
    """Re-apply the Bernstein operator of order ``q_new`` to ``s``.

    Endpoint values are kept; the result equals ``s`` only when ``s`` is
    affine on every interval.
    """
    if q_new < 1:
        raise DomainError(f"order must be >= 1, got {q_new}")
    tau = node_matrix(s.knots, q_new)
    u = (tau - s.knots.left[:, None]) / s.knots.widths[:, None]
    vals = _horner(s.monomial_coeffs[:, None, :], u)
    return BernsteinSpline(s.knots, vals)
