"""Particle swarm with adaptive inertia and random neighbourhoods.

Each particle follows the best member of a random neighbourhood.  The
neighbourhood grows while the swarm stalls and collapses to its minimum after
an improvement; inertia doubles after quick successes and halves after long
stalls, always clipped to ``inertia_range``.
"""
from __future__ import annotations

import numpy as np

PS_DEFAULTS = {
    "population": 50,
    "init_range": 100.0,
    "warm_spread": 30.0,
    "inertia_range": (0.01, 1.40),
    "self_weight": 1.49,
    "social_weight": 1.49,
    "min_neighbors_fraction": 0.25,
    "max_iterations": 600,
    "stall_iterations": 20,
    "tol": 1e-6,
}


def particle_swarm(fun, center, spread, rng, params: dict | None = None):
    """Returns ``(x_best, f_best, converged, n_iterations)``."""
    p = {**PS_DEFAULTS, **(params or {})}
    n, dims = int(p["population"]), len(center)
    w_lo, w_hi = p["inertia_range"]
    center = np.asarray(center, dtype=float)
    vmax = 2.0 * spread

    x = center + rng.uniform(-spread, spread, size=(n, dims))
    v = rng.uniform(-spread, spread, size=(n, dims))
    f = np.array([fun(xi) for xi in x])
    pbest, fbest = x.copy(), f.copy()
    min_nb = max(2, int(np.floor(n * p["min_neighbors_fraction"])))
    nb_size, inertia, stall_counter = min_nb, w_hi, 0
    best_trace = [fbest.min()]

    for it in range(1, int(p["max_iterations"]) + 1):
        for i in range(n):
            nb = rng.choice(n, size=min(nb_size, n), replace=False)
            g = nb[np.argmin(fbest[nb])]
            u1, u2 = rng.random(dims), rng.random(dims)
            v[i] = inertia * v[i] + p["self_weight"] * u1 * (pbest[i] - x[i]) + p["social_weight"] * u2 * (pbest[g] - x[i])
        np.clip(v, -vmax, vmax, out=v)
        x = x + v
        f = np.array([fun(xi) for xi in x])
        better = f < fbest
        pbest[better], fbest[better] = x[better], f[better]

        new_best = fbest.min()
        if new_best < best_trace[-1]:
            stall_counter = max(0, stall_counter - 1)
            nb_size = min_nb
        else:
            stall_counter += 1
            nb_size = min(nb_size + min_nb, n)
        # applied every iteration, so a long stall keeps shrinking the inertia
        if stall_counter < 2:
            inertia *= 2.0
        elif stall_counter > 5:
            inertia /= 2.0
        inertia = float(np.clip(inertia, w_lo, w_hi))
        best_trace.append(new_best)

        window = int(p["stall_iterations"])
        if len(best_trace) > window:
            old = best_trace[-window - 1]
            if abs(old - new_best) <= p["tol"] * max(abs(new_best), 1.0):
                i = int(np.argmin(fbest))
                return pbest[i].copy(), float(fbest[i]), True, it

    i = int(np.argmin(fbest))
    return pbest[i].copy(), float(fbest[i]), False, int(p["max_iterations"])
