"""Derivative-free optimizers for the ansatz coefficients and the warm-start sweep."""
from __future__ import annotations

import math

import numpy as np

from ..ansatz import AnsatzParams
from ..errors import BudgetExhausted
from .base import (
    DEFAULT_BUDGET,
    METHODS,
    CloudEntry,
    Evaluator,
    OptimizerRun,
    OptimizerSpec,
    SolutionCloud,
)
from .cma import CMA_DEFAULTS, cma_es
from .ga import GA_DEFAULTS, genetic_algorithm
from .nm import NM_DEFAULTS, nelder_mead
from .pso import PS_DEFAULTS, particle_swarm
from .sa import SA_DEFAULTS, simulated_annealing

DEFAULTS = {"NM": NM_DEFAULTS, "GA": GA_DEFAULTS, "PS": PS_DEFAULTS, "SA": SA_DEFAULTS, "CMA": CMA_DEFAULTS}

__all__ = [
    "DEFAULTS",
    "DEFAULT_BUDGET",
    "METHODS",
    "CloudEntry",
    "Evaluator",
    "OptimizerRun",
    "OptimizerSpec",
    "SolutionCloud",
    "cma_es",
    "genetic_algorithm",
    "nelder_mead",
    "particle_swarm",
    "run",
    "simulated_annealing",
    "sweep_times",
]


def _scale_and_time(context):
    config = getattr(context, "config", None)
    if config is None:
        return 1.0, math.nan
    return config.energy_unit, config.t_final


def _params_for(context, x) -> AnsatzParams:
    if hasattr(context, "params"):
        return context.params(x)
    return AnsatzParams().with_free(x)


def run(spec: OptimizerSpec, seed_point=None, context=None, *, warm: bool = False, stream: int = 0) -> OptimizerRun:
    """Minimize ``context`` (a callable on the free coefficients) with ``spec.method``.

    ``seed_point`` is the start (NM, SA), the population center (GA, PS) or
    the initial mean (CMA).  ``warm`` selects the narrower population spread
    used after the first final time.  Objects with a ``config`` attribute
    (such as :class:`~sta_separation.cost.CostContext`) are minimized in
    units of ``hbar * omega0``.
    """
    if context is None:
        raise ValueError("an objective context is required")
    dims = spec.dims
    seed = np.zeros(dims) if seed_point is None else np.asarray(seed_point, dtype=float)[:dims]
    if seed.size != dims or not np.all(np.isfinite(seed)):
        raise ValueError(f"seed point must hold {dims} finite values")
    params = {**DEFAULTS[spec.method], **spec.method_params}
    scale, t_final = _scale_and_time(context)
    ev = Evaluator(context, dims, spec.budget, scale)
    rng = np.random.default_rng([spec.rng_seed, stream])

    converged, message = False, ""
    try:
        if spec.method == "NM":
            _, _, converged, it = nelder_mead(ev, seed, params)
        elif spec.method == "GA":
            spread = params["warm_spread"] if warm else params["init_range"]
            _, _, converged, it = genetic_algorithm(ev, seed, spread, rng, params)
        elif spec.method == "PS":
            spread = params["warm_spread"] if warm else params["init_range"]
            _, _, converged, it = particle_swarm(ev, seed, spread, rng, params)
        elif spec.method == "SA":
            _, _, converged, it = simulated_annealing(ev, seed, rng, params)
        else:
            _, _, converged, it = cma_es(ev, seed, rng, params)
        message = f"stopped after {it} iterations"
    except BudgetExhausted as exc:
        message = str(exc)

    best = ev.best_x if ev.best_x is not None else seed
    return OptimizerRun(
        method=spec.method,
        t_final=t_final,
        best_params=_params_for(context, best),
        best_value=ev.best_raw,
        n_evals=ev.count,
        history=tuple(ev.history),
        converged=bool(converged),
        rng_seed=spec.rng_seed,
        stream=stream,
        dims=dims,
        message=message,
        method_params={k: (list(v) if isinstance(v, tuple) else v) for k, v in params.items()},
    )


def sweep_times(spec: OptimizerSpec, t_grid, context, seed_point=None) -> list:
    """Run ``spec`` at every final time, each run warm-started from the previous best.

    ``context`` must provide ``with_t_final``.  A run that raises is recorded
    as a non-converged run at its seed and the sweep moves on.
    """
    t_grid = [float(t) for t in t_grid]
    if any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise ValueError("t_grid must be strictly ascending")
    runs = []
    seed = np.zeros(spec.dims) if seed_point is None else np.asarray(seed_point, dtype=float)[: spec.dims]
    for k, t_f in enumerate(t_grid):
        ctx = context.with_t_final(t_f)
        try:
            r = run(spec, seed, ctx, warm=k > 0, stream=k)
        except Exception as exc:  # recorded, sweep continues
            r = OptimizerRun(
                spec.method, t_f, _params_for(ctx, seed), math.inf, 0, (), False,
                spec.rng_seed, k, spec.dims, f"failed: {exc}",
            )
        runs.append(r)
        if math.isfinite(r.best_value):
            seed = r.free
    return runs
