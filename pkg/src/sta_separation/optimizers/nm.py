"""Nelder-Mead simplex search with relative stopping tolerances.

The initial simplex follows the usual fminsearch recipe: each vertex moves
one coordinate of the seed by 5 % (or by 0.00025 when that coordinate is 0).
"""
from __future__ import annotations

import numpy as np

NM_DEFAULTS = {
    "tol": 1e-7,
    "max_iter": 5000,
    "reflection": 1.0,
    "expansion": 2.0,
    "contraction": 0.5,
    "shrink": 0.5,
    "initial_step": 0.05,
    "zero_step": 0.00025,
}


def initial_simplex(x0, step=0.05, zero_step=0.00025) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    simplex = np.tile(x0, (x0.size + 1, 1))
    for i in range(x0.size):
        simplex[i + 1, i] = x0[i] * (1.0 + step) if x0[i] != 0 else zero_step
    return simplex


def simplex_diameter(simplex: np.ndarray) -> float:
    diffs = simplex[:, None, :] - simplex[None, :, :]
    return float(np.sqrt((diffs**2).sum(axis=-1)).max())


def _converged(simplex, fvals, tol) -> bool:
    f_spread = abs(fvals[-1] - fvals[0])
    x_spread = np.abs(simplex[1:] - simplex[0]).max()
    f_ok = f_spread <= tol * max(abs(fvals[0]), 1e-300) or f_spread == 0.0
    x_ok = x_spread <= tol * max(np.abs(simplex[0]).max(), 1.0)
    return f_ok and x_ok


def nelder_mead(fun, x0, params: dict | None = None, simplex=None, trace=None):
    """Minimize ``fun`` from ``x0``.

    Returns ``(x_best, f_best, converged, n_iter)``.  ``trace`` (a list) if
    given receives the simplex diameter after every iteration.
    """
    p = {**NM_DEFAULTS, **(params or {})}
    rho, chi, gam, sig = p["reflection"], p["expansion"], p["contraction"], p["shrink"]
    if simplex is None:
        simplex = initial_simplex(x0, p["initial_step"], p["zero_step"])
    simplex = np.array(simplex, dtype=float)
    fvals = np.array([fun(v) for v in simplex])

    for it in range(1, int(p["max_iter"]) + 1):
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        if _converged(simplex, fvals, p["tol"]):
            return simplex[0].copy(), float(fvals[0]), True, it - 1

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + rho * (centroid - worst)
        fr = fun(xr)
        if fr < fvals[0]:
            xe = centroid + rho * chi * (centroid - worst)
            fe = fun(xe)
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
        else:
            if fr < fvals[-1]:
                xc = centroid + gam * rho * (centroid - worst)
                fc = fun(xc)
                accept = fc <= fr
            else:
                xc = centroid - gam * (centroid - worst)
                fc = fun(xc)
                accept = fc < fvals[-1]
            if accept:
                simplex[-1], fvals[-1] = xc, fc
            else:
                simplex[1:] = simplex[0] + sig * (simplex[1:] - simplex[0])
                fvals[1:] = [fun(v) for v in simplex[1:]]
        if trace is not None:
            trace.append(simplex_diameter(simplex))

    order = np.argsort(fvals, kind="stable")
    simplex, fvals = simplex[order], fvals[order]
    return simplex[0].copy(), float(fvals[0]), _converged(simplex, fvals, p["tol"]), int(p["max_iter"])
