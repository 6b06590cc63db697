"""
Robustness to multiplicative control noise
==========================================

Every noisy realization multiplies the whole alpha(t) trace by one N(1, sigma)
factor and the beta(t) trace by another, re-solves the ion separation and
propagates the full Hamiltonian again.
"""

from sta_separation import CostContext, ObjectiveSpec, OptimizerSpec, PhysicalConfig, noise_study, run

config = PhysicalConfig()
ctx = CostContext(config, ObjectiveSpec(mode="cubic"))
unit = config.energy_unit

protocol = run(OptimizerSpec("CMA", dims=3, rng_seed=0), None, ctx).best_params
print("protocol", [round(float(v), 3) for v in protocol.free])

# %%
# Sweep the noise level
# ---------------------
# Twenty draws per level is enough to see the trend.
for sigma in (0.0, 0.001, 0.002, 0.004, 0.008):
    st = noise_study(protocol, sigma, 20, rng_seed=1, config=config, endpoints=ctx.endpoints)
    print(f"sigma = {sigma:5.3f}: mean {st.mean / unit:8.4g}  median {st.median / unit:8.4g}  "
          f"max {st.max / unit:8.4g} hbar w0  ({st.n_failed} failed)")
