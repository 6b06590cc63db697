"""
The line of minima and the 1-D search
=====================================

In cubic mode every method finds a different point, but the points fall
close to one straight line in (a10, a11, a12).  Fitting that line and
refining seeds placed along it turns the 3-D search into a 1-D scan.

A coarse scan keeps the runtime short; the acceptance suite uses the
full 161-sample grid.
"""

import math

import numpy as np

from sta_separation import (
    CostContext,
    ObjectiveSpec,
    OptimizerSpec,
    PhysicalConfig,
    SolutionCloud,
    fit_line,
    nu_sweep,
    sweep_times,
    verify_params,
)
from sta_separation.io import DEFAULT_T_GRID
from sta_separation.line import default_nu_grid

config = PhysicalConfig()
ctx = CostContext(config, ObjectiveSpec(mode="cubic"))
unit = config.energy_unit

# %%
# Build a solution cloud
# ----------------------
cloud = SolutionCloud()
cma_at_start = None
for method in ("NM", "SA", "CMA"):
    for run in sweep_times(OptimizerSpec(method, dims=3, rng_seed=0), DEFAULT_T_GRID, ctx):
        e = verify_params(run.best_params, config.with_t_final(run.t_final), ctx.endpoints).e_exc
        cloud.add(run, e)
        if method == "CMA" and run.t_final == DEFAULT_T_GRID[0]:
            cma_at_start = e
print(f"{len(cloud)} solutions")

# %%
# Fit the line
# ------------
fit = fit_line(cloud)
print("centroid", np.round(fit.centroid, 2), "direction", np.round(fit.direction, 3), f"rms {fit.residual_rms:.3g}")

# %%
# Scan along it at the shortest final time
# ----------------------------------------
grid = default_nu_grid(fit, cloud, n=21)
result = nu_sweep(fit, grid, DEFAULT_T_GRID[0], ctx)
for s in result.samples:
    flag = "" if s.converged else "  (not converged)"
    print(f"nu = {s.nu:8.2f}  E_exc = {s.e_exc / unit:10.4g} hbar w0{flag}")
best = result.best_sample()
print(f"smooth region {result.smooth_boundary}")
print(f"best {best.e_exc / unit:.4g} at nu = {best.nu:.1f}; CMA {cma_at_start / unit:.4g}; "
      f"ratio {cma_at_start / best.e_exc if best.e_exc > 0 else math.nan:.3g}")
