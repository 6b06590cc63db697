"""Covariance matrix adaptation evolution strategy.

Standard (mu/mu_w, lambda) scheme with cumulative step-size adaptation,
rank-one and rank-mu covariance updates and log-linear recombination weights.
Two deliberate additions: the step size is capped at ``sigma_max`` and the
first generation is clipped to ``mean +- init_bound``.
"""
from __future__ import annotations

import math

import numpy as np

CMA_DEFAULTS = {
    "population": 70,
    "sigma0": 12.0,
    "init_bound": 20.0,
    "sigma_max": 1e3,
    "max_generations": 5000,
    "tol_x": 1e-12,
    "tol_fun": 1e-12,
    "stall_generations": None,
}


def cma_es(fun, mean, rng, params: dict | None = None):
    """Returns ``(x_best, f_best, converged, n_generations)``."""
    p = {**CMA_DEFAULTS, **(params or {})}
    m = np.asarray(mean, dtype=float).copy()
    n = m.size
    lam = int(p["population"])
    mu = lam // 2
    w = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    w /= w.sum()
    mu_eff = 1.0 / np.sum(w**2)

    cs = (mu_eff + 2.0) / (n + mu_eff + 5.0)
    ds = 1.0 + cs + 2.0 * max(math.sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0, 0.0)
    chi_n = math.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))
    cc = (4.0 + mu_eff / n) / (4.0 + n + 2.0 * mu_eff / n)
    c1 = 2.0 / ((n + 1.3) ** 2 + mu_eff)
    cmu = min(1.0 - c1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0) ** 2 + mu_eff))

    sigma = float(p["sigma0"])
    C = np.eye(n)
    B, D = np.eye(n), np.ones(n)
    ps, pc = np.zeros(n), np.zeros(n)
    best_x, best_f = m.copy(), math.inf
    stall = p["stall_generations"] or int(10 + math.ceil(30.0 * n / lam))
    gen_best = []

    for g in range(1, int(p["max_generations"]) + 1):
        z = rng.standard_normal((lam, n))
        y = (z * D) @ B.T
        x = m + sigma * y
        if g == 1:
            x = np.clip(x, m - p["init_bound"], m + p["init_bound"])
            y = (x - m) / sigma
        f = np.array([fun(xi) for xi in x])
        order = np.argsort(f, kind="stable")
        if f[order[0]] < best_f:
            best_f, best_x = float(f[order[0]]), x[order[0]].copy()
        gen_best.append(f[order[0]])

        y_sel = y[order[:mu]]
        y_w = w @ y_sel
        m = m + sigma * y_w
        inv_sqrt_c = B @ np.diag(1.0 / D) @ B.T
        ps = (1.0 - cs) * ps + math.sqrt(cs * (2.0 - cs) * mu_eff) * (inv_sqrt_c @ y_w)
        h_sig = np.linalg.norm(ps) / math.sqrt(1.0 - (1.0 - cs) ** (2 * g)) < (1.4 + 2.0 / (n + 1.0)) * chi_n
        pc = (1.0 - cc) * pc + h_sig * math.sqrt(cc * (2.0 - cc) * mu_eff) * y_w
        rank_mu = (y_sel.T * w) @ y_sel
        C = (
            (1.0 - c1 - cmu) * C
            + c1 * (np.outer(pc, pc) + (1.0 - h_sig) * cc * (2.0 - cc) * C)
            + cmu * rank_mu
        )
        # growth per generation limited to a factor e, as in common reference codes
        sigma = min(sigma * math.exp(min(1.0, cs / ds * (np.linalg.norm(ps) / chi_n - 1.0))), p["sigma_max"])

        C = 0.5 * (C + C.T)
        evals, B = np.linalg.eigh(C)
        D = np.sqrt(np.maximum(evals, 1e-20 * evals.max()))

        if sigma * D.max() < p["tol_x"] * max(1.0, np.abs(m).max()):
            return best_x, best_f, True, g
        if len(gen_best) > stall:
            recent = gen_best[-stall:]
            if max(recent) - min(recent) <= p["tol_fun"] * max(abs(best_f), 1.0):
                return best_x, best_f, True, g

    return best_x, best_f, False, int(p["max_generations"])
