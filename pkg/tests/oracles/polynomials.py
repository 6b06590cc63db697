"""Symbolic reference for the scaling-function polynomials (test oracle)."""
from __future__ import annotations

import sympy as sp

s, gm, gp, a10, a11, a12 = sp.symbols("s gamma_m gamma_p a10 a11 a12")


def rho_minus_expr():
    g = gm - 1
    return 1 + 126 * g * s**5 - 420 * g * s**6 + 540 * g * s**7 - 315 * g * s**8 + 70 * g * s**9


def rho_plus_expr():
    """Twelfth-order polynomial with the free coefficients compensated in s^5..s^9."""
    g = gp - 1
    return (
        1
        + (126 * g - a10 - 5 * a11 - 15 * a12) * s**5
        + (-420 * g + 5 * a10 + 24 * a11 + 70 * a12) * s**6
        + (540 * g - 10 * a10 - 45 * a11 - 126 * a12) * s**7
        + (-315 * g + 10 * a10 + 40 * a11 + 105 * a12) * s**8
        + (70 * g - 5 * a10 - 15 * a11 - 35 * a12) * s**9
        + a10 * s**10
        + a11 * s**11
        + a12 * s**12
    )


def evaluate(expr, values: dict, point: float, order: int = 0) -> float:
    e = sp.diff(expr, s, order) if order else expr
    return float(e.subs({**values, s: sp.Rational(point).limit_denominator(10**12) if isinstance(point, float) else point}))
