"""Pure-Python twin of the compiled solver kernels (same signatures)."""

import math

import numpy as np


def _u_array(code, prm, order, x):
    if code == 0:
        if order == 0:
            return np.log(x)
        return (-1.0) ** (order - 1) * math.factorial(order - 1) / x ** order
    if code == 1:
        if order == 0:
            return x ** (1.0 - prm) / (1.0 - prm)
        if order == 1:
            return x ** -prm
        if order == 2:
            return -prm * x ** (-prm - 1.0)
        return prm * (prm + 1.0) * x ** (-prm - 2.0)
    if code == 2:
        ex = np.exp(-prm * x)
        return (-ex / prm, ex, -prm * ex, prm * prm * ex)[order]
    if order == 0:
        return x - prm * x * x
    if order == 1:
        return 1.0 - 2.0 * prm * x
    return np.full_like(x, -2.0 * prm) if order == 2 else np.zeros_like(x)


def utility(code, prm, order, x):
    return float(_u_array(code, prm, order, np.float64(x)))


def loss_probability(code, p0, k, order, e):
    if code == 0:
        return p0 * (-k) ** order * math.exp(-k * e)
    return p0 * (1.0, -k, k * (k + 1.0))[order] * (1.0 + e) ** (-k - order)


def weighted_sum(code, prm, order, base, xs, ws):
    return float(np.dot(ws, _u_array(code, prm, order, base + np.asarray(xs))))


def marginal(ucode, uprm, xs, ws, w1, pcode, p0, k, delta2, e):
    return (-weighted_sum(ucode, uprm, 1, w1 - e, xs, ws)
            + loss_probability(pcode, p0, k, 1, e) * delta2)


def bisect_effort(ucode, uprm, xs, ws, w1, pcode, p0, k, delta2, lo, hi, xtol, maxiter):
    xs = np.asarray(xs)
    it = 0
    while hi - lo > xtol and it < maxiter:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fm = marginal(ucode, uprm, xs, ws, w1, pcode, p0, k, delta2, mid)
        it += 1
        if fm == 0.0:
            lo = hi = mid
            break
        if fm > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), it
