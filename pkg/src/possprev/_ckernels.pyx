# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for the effort solver.

Utility codes: 0 log, 1 CRRA(eta), 2 CARA(alpha), 3 quadratic(b).
Loss codes: 0 p0*exp(-k e), 1 p0/(1+e)**k.
"""

from libc.math cimport exp, log, pow


cdef inline double _u(int code, double prm, int order, double x) noexcept nogil:
    cdef double ex
    if code == 0:
        if order == 0:
            return log(x)
        elif order == 1:
            return 1.0 / x
        elif order == 2:
            return -1.0 / (x * x)
        return 2.0 / (x * x * x)
    elif code == 1:
        if order == 0:
            return pow(x, 1.0 - prm) / (1.0 - prm)
        elif order == 1:
            return pow(x, -prm)
        elif order == 2:
            return -prm * pow(x, -prm - 1.0)
        return prm * (prm + 1.0) * pow(x, -prm - 2.0)
    elif code == 2:
        ex = exp(-prm * x)
        if order == 0:
            return -ex / prm
        elif order == 1:
            return ex
        elif order == 2:
            return -prm * ex
        return prm * prm * ex
    if order == 0:
        return x - prm * x * x
    elif order == 1:
        return 1.0 - 2.0 * prm * x
    elif order == 2:
        return -2.0 * prm
    return 0.0


cdef inline double _p(int code, double p0, double k, int order, double e) noexcept nogil:
    if code == 0:
        if order == 0:
            return p0 * exp(-k * e)
        elif order == 1:
            return -k * p0 * exp(-k * e)
        return k * k * p0 * exp(-k * e)
    if order == 0:
        return p0 * pow(1.0 + e, -k)
    elif order == 1:
        return -k * p0 * pow(1.0 + e, -k - 1.0)
    return k * (k + 1.0) * p0 * pow(1.0 + e, -k - 2.0)


cdef inline double _wsum(int code, double prm, int order, double base,
                         const double[::1] xs, const double[::1] ws) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(xs.shape[0]):
        acc += ws[i] * _u(code, prm, order, base + xs[i])
    return acc


cdef inline double _marginal(int ucode, double uprm, const double[::1] xs,
                             const double[::1] ws, double w1, int pcode, double p0,
                             double k, double delta2, double e) noexcept nogil:
    return -_wsum(ucode, uprm, 1, w1 - e, xs, ws) + _p(pcode, p0, k, 1, e) * delta2


def utility(int code, double prm, int order, double x):
    return _u(code, prm, order, x)


def loss_probability(int code, double p0, double k, int order, double e):
    return _p(code, p0, k, order, e)


def weighted_sum(int code, double prm, int order, double base,
                 const double[::1] xs, const double[::1] ws):
    """sum_i ws[i] * u^(order)(base + xs[i])"""
    return _wsum(code, prm, order, base, xs, ws)


def marginal(int ucode, double uprm, const double[::1] xs, const double[::1] ws,
             double w1, int pcode, double p0, double k, double delta2, double e):
    return _marginal(ucode, uprm, xs, ws, w1, pcode, p0, k, delta2, e)


def bisect_effort(int ucode, double uprm, const double[::1] xs, const double[::1] ws,
                  double w1, int pcode, double p0, double k, double delta2,
                  double lo, double hi, double xtol, int maxiter):
    """Bisection for the root of the decreasing marginal utility on [lo, hi]."""
    cdef double mid = lo, fm
    cdef int it = 0
    with nogil:
        while hi - lo > xtol and it < maxiter:
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            fm = _marginal(ucode, uprm, xs, ws, w1, pcode, p0, k, delta2, mid)
            it += 1
            if fm == 0.0:
                lo = mid
                hi = mid
                break
            if fm > 0.0:
                lo = mid
            else:
                hi = mid
    return 0.5 * (lo + hi), it
