# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_pykernels``.

Call signatures and results match the numpy fallback; see there for the
argument conventions.
"""
import numpy as np

from libc.math cimport fabs, pow, NAN

NAME = "cython"

cdef double _TINY = 1e-300
cdef double _EPS = 4e-16
cdef int _MAXIT = 500


cdef inline double _clamp_tiny(double v) noexcept nogil:
    if fabs(v) < _TINY:
        return _TINY
    return v


cdef double _betacf(double a, double b, double x) noexcept nogil:
    cdef double qab = a + b
    cdef double qap = a + 1.0
    cdef double qam = a - 1.0
    cdef double c = 1.0
    cdef double d = 1.0 / _clamp_tiny(1.0 - qab * x / qap)
    cdef double h = d
    cdef double aa, delta
    cdef int m, m2
    for m in range(1, _MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 / _clamp_tiny(1.0 + aa * d)
        c = _clamp_tiny(1.0 + aa / c)
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 / _clamp_tiny(1.0 + aa * d)
        c = _clamp_tiny(1.0 + aa / c)
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < _EPS:
            return h
    return NAN


cdef double _inc_beta(double z, double zc, double a, double b,
                      double beta_ab) noexcept nogil:
    cdef double front
    if zc <= 0.0:
        return beta_ab
    if z <= 0.0:
        return 0.0
    front = pow(z, a) * pow(zc, b)
    if z < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, z) / a
    return beta_ab - front * _betacf(b, a, zc) / b


def inc_beta_vec(z, zc, a, b, beta_ab):
    z, zc, a, b, beta_ab = np.broadcast_arrays(
        *(np.asarray(v, dtype=np.float64) for v in (z, zc, a, b, beta_ab))
    )
    cdef const double[::1] zv = np.ascontiguousarray(z.ravel())
    cdef const double[::1] zcv = np.ascontiguousarray(zc.ravel())
    cdef const double[::1] av = np.ascontiguousarray(a.ravel())
    cdef const double[::1] bv = np.ascontiguousarray(b.ravel())
    cdef const double[::1] betav = np.ascontiguousarray(beta_ab.ravel())
    cdef Py_ssize_t n = zv.shape[0]
    out = np.empty(n)
    cdef double[::1] ov = out
    cdef Py_ssize_t k
    with nogil:
        for k in range(n):
            ov[k] = _inc_beta(zv[k], zcv[k], av[k], bv[k], betav[k])
    return out


def integration_tensor(left, right, int q, double alpha, eval_points, cbeta,
                       double gamma_alpha):
    cdef const double[::1] lv = np.ascontiguousarray(left, dtype=np.float64)
    cdef const double[::1] rv = np.ascontiguousarray(right, dtype=np.float64)
    cdef const double[::1] tv = np.ascontiguousarray(eval_points, dtype=np.float64)
    cdef const double[::1] cb = np.ascontiguousarray(cbeta, dtype=np.float64)
    cdef Py_ssize_t n = lv.shape[0]
    cdef Py_ssize_t p = tv.shape[0]
    J = np.zeros((n, q + 1, p))
    cdef double[:, :, ::1] Jv = J
    cdef Py_ssize_t i, m
    cdef int ell
    cdef double dd, w, z, zc, base, ratio, rpow
    with nogil:
        for i in range(n):
            w = rv[i] - lv[i]
            for m in range(p):
                dd = tv[m] - lv[i]
                if dd <= 0.0:
                    continue
                base = pow(dd, alpha) / gamma_alpha
                ratio = dd / w
                rpow = 1.0
                if dd > w:
                    z = w / dd
                    zc = (tv[m] - rv[i]) / dd
                    for ell in range(q + 1):
                        Jv[i, ell, m] = base * rpow * _inc_beta(
                            z, zc, ell + 1.0, alpha, cb[ell])
                        rpow *= ratio
                else:
                    for ell in range(q + 1):
                        Jv[i, ell, m] = base * rpow * cb[ell]
                        rpow *= ratio
    return J
