"""Pure numpy implementations of the hot kernels.

Same call signatures as the compiled ``_ckernels`` module. Used when the
extension is not built or when ``HILFSPLINE_PURE_PYTHON`` is set.
"""
import numpy as np

NAME = "python"

_TINY = 1e-300
_EPS = 4e-16
_MAXIT = 500


def _betacf(a, b, x):
    """Continued fraction for the regularized incomplete beta (modified Lentz).

    All arguments are 1-d float arrays of equal length. Elements that fail to
    converge in ``_MAXIT`` terms come back as ``nan``.
    """
    out = np.full(x.shape, np.nan)
    idx = np.arange(x.size)
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d[np.abs(d) < _TINY] = _TINY
    d = 1.0 / d
    h = d.copy()
    for m in range(1, _MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d[np.abs(d) < _TINY] = _TINY
        c = 1.0 + aa / c
        c[np.abs(c) < _TINY] = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d[np.abs(d) < _TINY] = _TINY
        c = 1.0 + aa / c
        c[np.abs(c) < _TINY] = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        done = np.abs(delta - 1.0) < _EPS
        if done.any():
            out[idx[done]] = h[done]
            keep = ~done
            if not keep.any():
                break
            idx, a, b, x = idx[keep], a[keep], b[keep], x[keep]
            qab, qap, qam = qab[keep], qap[keep], qam[keep]
            c, d, h = c[keep], d[keep], h[keep]
    return out


def inc_beta_vec(z, zc, a, b, beta_ab):
    """Unregularized incomplete beta ``B_z(a, b)`` elementwise.

    ``zc`` must equal ``1 - z``; passing it separately lets callers supply it
    without cancellation. ``beta_ab`` is the complete beta ``B(a, b)``.
    """
    z, zc, a, b, beta_ab = np.broadcast_arrays(
        *(np.asarray(v, dtype=np.float64) for v in (z, zc, a, b, beta_ab))
    )
    z, zc, a, b, beta_ab = (np.ravel(v) for v in (z, zc, a, b, beta_ab))
    out = np.zeros(z.shape)
    full = zc <= 0.0
    out[full] = beta_ab[full]
    mid = (z > 0.0) & ~full
    if mid.any():
        zm, zcm, am, bm = z[mid], zc[mid], a[mid], b[mid]
        front = zm**am * zcm**bm
        direct = zm < (am + 1.0) / (am + bm + 2.0)
        res = np.empty(zm.shape)
        if direct.any():
            res[direct] = (
                front[direct]
                * _betacf(am[direct], bm[direct], zm[direct])
                / am[direct]
            )
        swap = ~direct
        if swap.any():
            res[swap] = (
                beta_ab[mid][swap]
                - front[swap] * _betacf(bm[swap], am[swap], zcm[swap]) / bm[swap]
            )
        out[mid] = res
    return out


def integration_tensor(left, right, q, alpha, eval_points, cbeta, gamma_alpha):
    """Tensor ``J[i, l, m]`` of fractional integrals of local monomials.

    ``J[i, l, m]`` is the order-``alpha`` Riemann-Liouville integral, evaluated
    at ``eval_points[m]``, of ``((t - left[i]) / width[i])**l`` restricted to
    ``[left[i], right[i]]``. ``cbeta[l]`` holds ``B(l + 1, alpha)``.
    """
    left = np.asarray(left, dtype=np.float64)
    right = np.asarray(right, dtype=np.float64)
    tm = np.asarray(eval_points, dtype=np.float64)
    width = right - left
    n, p = left.size, tm.size
    J = np.zeros((n, q + 1, p))
    dist = tm[None, :] - left[:, None]
    pos = dist > 0.0
    if not pos.any():
        return J
    ii, mm = np.nonzero(pos)
    dd = dist[ii, mm]
    w = width[ii]
    beyond = dd > w
    z = np.ones(dd.shape)
    zc = np.zeros(dd.shape)
    z[beyond] = w[beyond] / dd[beyond]
    zc[beyond] = (tm[mm][beyond] - right[ii][beyond]) / dd[beyond]
    base = dd**alpha / gamma_alpha
    ratio = dd / w
    for ell in range(q + 1):
        vals = np.full(dd.shape, cbeta[ell])
        if beyond.any():
            vals[beyond] = inc_beta_vec(
                z[beyond], zc[beyond], ell + 1.0, alpha, cbeta[ell]
            )
        J[ii, ell, mm] = base * ratio**ell * vals
    return J
