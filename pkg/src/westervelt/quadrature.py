"""Adaptive Simpson quadrature with interval bisection."""

from __future__ import annotations

import math


class QuadratureError(ArithmeticError):
    pass


def adaptive_simpson(func, a: float, b: float, tol: float = 1e-10, max_depth: int = 60) -> float:
    """Integral of ``func`` over [a, b] to absolute tolerance ``tol``.

    Uses the classical error estimate |S2 - S1| / 15 with Richardson
    correction, splitting the tolerance evenly between halves.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    fa, fb = func(a), func(b)
    m = 0.5 * (a + b)
    fm = func(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return sign * _recurse(func, a, b, fa, fm, fb, whole, tol, max_depth)


def _recurse(func, a, b, fa, fm, fb, whole, tol, depth):
    # explicit stack instead of Python recursion keeps deep bisection cheap
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, depth)]
    while stack:
        a, b, fa, fm, fb, whole, tol, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = func(lm), func(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        if not math.isfinite(delta):
            raise QuadratureError(f"non-finite integrand near [{a}, {b}]")
        if abs(delta) <= 15.0 * tol or depth <= 0:
            if depth <= 0 and abs(delta) > 15.0 * tol:
                raise QuadratureError(f"tolerance not reached on [{a}, {b}]")
            total += left + right + delta / 15.0
        else:
            stack.append((a, m, fa, flm, fm, left, tol / 2.0, depth - 1))
            stack.append((m, b, fm, frm, fb, right, tol / 2.0, depth - 1))
    return total
