"""Simulated annealing with a two-phase schedule.

Before the first improvement on the seed, trial points sit at distance ``T``
in a random direction and the temperature cools exponentially,
``T = T0 * 0.95**k``.  From the first improvement on, the step length becomes
``sqrt(T)`` and cooling becomes hyperbolic, ``T = T0 / (1 + k)``.  Every
``reanneal_interval`` accepted points the annealing parameter is reset to
``k = log(T0 / T)``, which raises the temperature again.
"""
from __future__ import annotations

import math

import numpy as np

SA_DEFAULTS = {
    "t0": 200.0,
    "reanneal_interval": 10,
    "cooling_rate": 0.95,
    "stall_iterations_per_dim": 500,
    "tol": 1e-6,
    "min_temperature": 1e-12,
}


def _temperature(t0, k, phase, rate):
    return t0 * rate**k if phase == 0 else t0 / (1.0 + k)


def accept_probability(delta: float, temperature: float) -> float:
    """Acceptance probability ``1 / (1 + exp(delta / T))`` for an uphill move."""
    if delta <= 0:
        return 1.0
    z = delta / temperature
    return 0.0 if z > 700 else 1.0 / (1.0 + math.exp(z))


def simulated_annealing(fun, x0, rng, params: dict | None = None):
    """Returns ``(x_best, f_best, converged, n_iterations)``."""
    p = {**SA_DEFAULTS, **(params or {})}
    t0, rate = p["t0"], p["cooling_rate"]
    x = np.asarray(x0, dtype=float).copy()
    fx = fun(x)
    f_seed = fx
    best_x, best_f = x.copy(), fx
    phase, k, accepted = 0, 0.0, 0
    stall_window = int(p["stall_iterations_per_dim"]) * x.size
    trace = [best_f]
    it = 0
    while True:
        it += 1
        temp = max(_temperature(t0, k, phase, rate), p["min_temperature"])
        step = temp if phase == 0 else math.sqrt(temp)
        direction = rng.normal(size=x.size)
        direction /= np.linalg.norm(direction)
        trial = x + step * direction
        ft = fun(trial)
        if rng.random() < accept_probability(ft - fx, temp):
            x, fx = trial, ft
            accepted += 1
            if accepted % int(p["reanneal_interval"]) == 0:
                temp_now = max(_temperature(t0, k, phase, rate), p["min_temperature"])
                k = max(math.log(t0 / temp_now), 0.0)
        if fx < best_f:
            best_x, best_f = x.copy(), fx
            if phase == 0 and best_f < f_seed:
                phase, k = 1, 0.0
        k += 1.0
        trace.append(best_f)
        if len(trace) > stall_window:
            old = trace[-stall_window - 1]
            if abs(old - best_f) / stall_window <= p["tol"] * max(abs(best_f), 1.0):
                return best_x, float(best_f), True, it
