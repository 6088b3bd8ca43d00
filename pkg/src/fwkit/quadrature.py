"""Adaptive Simpson quadrature for scalar integrands.

Simpson's rule is exact on cubics, so polynomial drift integrals common in
this toolkit come out at machine precision.
"""

import math

from .errors import QuadratureError

_MAX_DEPTH = 60


def _simpson(a, fa, b, fb, fm):
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _adapt(f, a, fa, b, fb, m, fm, whole, tol, depth):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = _simpson(a, fa, m, fm, flm)
    right = _simpson(m, fm, b, fb, frm)
    err = left + right - whole
    if abs(err) <= 15.0 * tol:
        return left + right + err / 15.0
    if depth >= _MAX_DEPTH:
        raise QuadratureError(f"adaptive Simpson hit max depth on [{a}, {b}]")
    half = 0.5 * tol
    return (_adapt(f, a, fa, m, fm, lm, flm, left, half, depth + 1)
            + _adapt(f, m, fm, b, fb, rm, frm, right, half, depth + 1))


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-10) -> float:
    """Oriented integral of f over [a, b]; a > b flips the sign."""
    if a == b:
        return 0.0
    sign = 1.0
    if a > b:
        a, b = b, a
        sign = -1.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    if not (math.isfinite(fa) and math.isfinite(fb) and math.isfinite(fm)):
        raise QuadratureError("non-finite integrand")
    whole = _simpson(a, fa, b, fb, fm)
    return sign * _adapt(f, a, fa, b, fb, m, fm, whole, tol, 0)
