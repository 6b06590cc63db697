"""Real-coded genetic algorithm.

Tournament selection, heuristic crossover (the child lies on the line through
both parents, a step ``crossover_ratio`` from the worse parent towards and past
the better one), Gaussian mutation with a linearly shrinking scale and
a small elite carried over unchanged.
"""
from __future__ import annotations

import numpy as np

GA_DEFAULTS = {
    "population": 50,
    "init_range": 60.0,
    "warm_spread": 5.0,
    "tournament": 5,
    "elite": 3,
    "crossover_ratio": 1.2,
    "mutation_rate": 0.1,
    "mutation_scale": 1.0,
    "max_generations": 300,
    "stall_generations": 50,
    "tol": 1e-6,
}


def _rank_scores(fvals: np.ndarray) -> np.ndarray:
    ranks = np.empty(fvals.size)
    ranks[np.argsort(fvals, kind="stable")] = np.arange(1, fvals.size + 1)
    return 1.0 / np.sqrt(ranks)


def _tournament(scores, size, rng) -> int:
    members = rng.choice(scores.size, size=size, replace=False)
    return int(members[np.argmax(scores[members])])


def _stalled(best_trace, window, tol) -> bool:
    if len(best_trace) <= window:
        return False
    old, new = best_trace[-window - 1], best_trace[-1]
    return abs(old - new) / window <= tol * max(abs(new), 1.0)


def genetic_algorithm(fun, center, spread, rng, params: dict | None = None, trace=None):
    """Returns ``(x_best, f_best, converged, n_generations)``.

    ``trace`` (a list) if given receives the best value of every generation,
    starting with the initial population.
    """
    p = {**GA_DEFAULTS, **(params or {})}
    n_pop, dims = int(p["population"]), len(center)
    center = np.asarray(center, dtype=float)
    pop = center + rng.uniform(-spread, spread, size=(n_pop, dims))
    fvals = np.array([fun(x) for x in pop])
    width = 2.0 * spread
    best_trace = [] if trace is None else trace
    best_trace.append(fvals.min())

    n_gen = int(p["max_generations"])
    for gen in range(1, n_gen + 1):
        scores = _rank_scores(fvals)
        order = np.argsort(fvals, kind="stable")
        n_elite = min(int(p["elite"]), n_pop)
        children = [pop[i].copy() for i in order[:n_elite]]
        sigma = p["mutation_scale"] * width * (1.0 - (gen - 1) / n_gen)
        while len(children) < n_pop:
            i = _tournament(scores, int(p["tournament"]), rng)
            j = _tournament(scores, int(p["tournament"]), rng)
            good, bad = (i, j) if fvals[i] <= fvals[j] else (j, i)
            child = pop[bad] + p["crossover_ratio"] * (pop[good] - pop[bad])
            mask = rng.random(dims) < p["mutation_rate"]
            child = child + mask * rng.normal(0.0, sigma, size=dims)
            children.append(child)
        pop = np.array(children)
        fvals = np.concatenate([fvals[order[:n_elite]], [fun(x) for x in pop[n_elite:]]])
        best_trace.append(fvals.min())
        if _stalled(best_trace, int(p["stall_generations"]), p["tol"]):
            i = int(np.argmin(fvals))
            return pop[i].copy(), float(fvals[i]), True, gen

    i = int(np.argmin(fvals))
    return pop[i].copy(), float(fvals[i]), False, n_gen
