"""Polynomial scaling functions rho_-(s) and rho_+(s) on s = t / t_f.

``rho_-`` is the fixed 9th-order minimal polynomial.  ``rho_+`` adds the free
coefficients ``a10, a11, a12`` on s**10..s**12 and compensates them in the
s**5..s**9 terms so that every boundary condition

    rho(0) = 1, rho(1) = gamma, rho', rho'', rho''', rho'''' = 0 at s in {0, 1}

holds for any value of the free coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import DomainError

# s**5 .. s**9 coefficients of the minimal polynomial, per unit (gamma - 1)
_MINIMAL = np.array([126.0, -420.0, 540.0, -315.0, 70.0])
# s**5 .. s**9 compensation per unit of a10, a11, a12 (columns)
_COMPENSATION = np.array(
    [
        [-1.0, -5.0, -15.0],
        [5.0, 24.0, 70.0],
        [-10.0, -45.0, -126.0],
        [10.0, 40.0, 105.0],
        [-5.0, -15.0, -35.0],
    ]
)
N_COEF = 13


@dataclass(frozen=True)
class AnsatzParams:
    a10: float = 0.0
    a11: float = 0.0
    a12: float = 0.0
    gamma_minus: float = 1.0
    gamma_plus: float = 1.0

    @property
    def free(self) -> np.ndarray:
        return np.array([self.a10, self.a11, self.a12])

    def with_free(self, free) -> "AnsatzParams":
        free = np.asarray(free, dtype=float)
        a12 = float(free[2]) if free.size > 2 else 0.0
        return AnsatzParams(float(free[0]), float(free[1]), a12, self.gamma_minus, self.gamma_plus)

    @classmethod
    def from_endpoints(cls, endpoints, free=(0.0, 0.0, 0.0)) -> "AnsatzParams":
        base = cls(gamma_minus=endpoints.gamma_minus, gamma_plus=endpoints.gamma_plus)
        return base.with_free(free)


@dataclass(frozen=True)
class PolyEval:
    """Value and s-derivatives 1..4 of a scaling function (scalars or arrays)."""

    value: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    d4: np.ndarray

    def derivatives(self):
        return (self.value, self.d1, self.d2, self.d3, self.d4)


def minus_coefficients(gamma_minus: float) -> np.ndarray:
    """Monomial coefficients (ascending powers, length 13) of rho_-."""
    c = np.zeros(N_COEF)
    c[0] = 1.0
    c[5:10] = (gamma_minus - 1.0) * _MINIMAL
    return c


def plus_coefficients(params: AnsatzParams) -> np.ndarray:
    """Monomial coefficients (ascending powers, length 13) of rho_+."""
    c = minus_coefficients(params.gamma_plus)
    free = params.free
    c[5:10] += _COMPENSATION @ free
    c[10:13] = free
    return c


def derivative_coefficients(coef: np.ndarray, order: int = 4) -> np.ndarray:
    """Stack of coefficient vectors for the polynomial and its first ``order`` derivatives."""
    out = np.zeros((order + 1, coef.size))
    out[0] = coef
    powers = np.arange(coef.size, dtype=float)
    for k in range(1, order + 1):
        prev = out[k - 1]
        out[k, :-1] = prev[1:] * powers[1:]
    return out


def evaluate(coef: np.ndarray, s) -> PolyEval:
    """Horner evaluation of a monomial polynomial and four derivatives."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0) or np.any(s > 1.0):
        raise DomainError("s must lie in [0, 1]")
    stack = derivative_coefficients(coef)
    vals = []
    for row in stack:
        acc = np.zeros_like(s)
        for c in row[::-1]:
            acc = acc * s + c
        vals.append(acc)
    return PolyEval(*vals)


def _smoothstep(s: np.ndarray):
    """Minimal polynomial S(s) (S(0) = 0, S(1) = 1) and derivatives 1..4."""
    out = []
    for row in _SMOOTHSTEP_STACK:
        acc = np.zeros_like(s)
        for c in row[::-1]:
            acc = acc * s + c
        out.append(acc)
    return out


_SMOOTHSTEP_STACK = derivative_coefficients(np.concatenate([np.zeros(5), _MINIMAL]))


def _falling(n: int, k: int) -> float:
    return float(np.prod(np.arange(n - k + 1, n + 1))) if k else 1.0


def _bump(s: np.ndarray, free) -> list:
    """w(s) = -s^5 (1-s)^5 q(s) and derivatives 1..4.

    Leibniz products keep the boundary derivatives exactly zero regardless of
    the size of the free coefficients.
    """
    a10, a11, a12 = free
    u = [_falling(5, k) * s ** (5 - k) for k in range(5)]
    v = [(-1.0) ** k * _falling(5, k) * (1.0 - s) ** (5 - k) for k in range(5)]
    q = [
        a10 + a11 * (5.0 + s) + a12 * (15.0 + 5.0 * s + s * s),
        a11 + a12 * (5.0 + 2.0 * s),
        2.0 * a12 + 0.0 * s,
        0.0 * s,
        0.0 * s,
    ]
    uv = [sum(comb(n, k) * u[k] * v[n - k] for k in range(n + 1)) for n in range(5)]
    return [-sum(comb(n, k) * uv[k] * q[n - k] for k in range(n + 1)) for n in range(5)]


def _check_domain(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0) or np.any(s > 1.0):
        raise DomainError("s must lie in [0, 1]")
    return s


def rho_minus(gamma_minus: float, s) -> PolyEval:
    s = _check_domain(s)
    sm = _smoothstep(s)
    vals = [(gamma_minus - 1.0) * x for x in sm]
    vals[0] = vals[0] + 1.0
    return PolyEval(*vals)


def rho_plus(params: AnsatzParams, s) -> PolyEval:
    s = _check_domain(s)
    sm = _smoothstep(s)
    w = _bump(s, (params.a10, params.a11, params.a12))
    vals = [(params.gamma_plus - 1.0) * x + y for x, y in zip(sm, w)]
    vals[0] = vals[0] + 1.0
    return PolyEval(*vals)


@dataclass(frozen=True)
class BoundaryReport:
    violations: dict
    tol: float

    @property
    def max_violation(self) -> float:
        return max(self.violations.values())

    @property
    def passed(self) -> bool:
        return self.max_violation < self.tol


def boundary_violations(coef: np.ndarray, gamma: float) -> dict:
    """Absolute violation of each rho boundary condition for one polynomial."""
    return _violations(evaluate(coef, 0.0).derivatives(), evaluate(coef, 1.0).derivatives(), gamma)


def _violations(start, end, gamma) -> dict:
    out = {"value@0": abs(float(start[0]) - 1.0), "value@1": abs(float(end[0]) - gamma)}
    for k in range(1, 5):
        out[f"d{k}@0"] = abs(float(start[k]))
        out[f"d{k}@1"] = abs(float(end[k]))
    return out


def check_boundaries(params: AnsatzParams, tol: float = 1e-9) -> BoundaryReport:
    """Check the value/derivative boundary conditions of both scaling functions.

    Conditions on the forced-oscillator solution are dynamic and live in
    :mod:`sta_separation.cost`.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    violations = {}
    for name, fn, gamma in (
        ("minus", lambda s: rho_minus(params.gamma_minus, s), params.gamma_minus),
        ("plus", lambda s: rho_plus(params, s), params.gamma_plus),
    ):
        for key, v in _violations(fn(0.0).derivatives(), fn(1.0).derivatives(), gamma).items():
            violations[f"{name}.{key}"] = v
    return BoundaryReport(violations, tol)
