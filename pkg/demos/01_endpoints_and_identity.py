"""
Trap endpoints and the do-nothing protocol
==========================================

Two 9Be ions start in a 2 MHz harmonic well and end ten times further apart
in a double well with a negative quadratic and a positive quartic term.
This script derives the endpoint quantities and checks the two simplest
protocols: the identity (nothing moves) and the plain polynomial seed a = 0.
"""

import numpy as np

from sta_separation import (
    AnsatzParams,
    CostContext,
    ObjectiveSpec,
    PhysicalConfig,
    derive_endpoints,
    ground_energy,
    verify_params,
)
from sta_separation.inverse import controls_for

config = PhysicalConfig()
ends = derive_endpoints(config)
unit = config.energy_unit

# %%
# Endpoint quantities
# -------------------
# The initial separation follows from balancing Coulomb repulsion against the
# harmonic trap; the final quartic coefficient is fixed by the quintic
# equilibrium condition at ten times that distance.
print(f"d0 = {ends.d0 * 1e6:.3f} um, d_f = {ends.d_final * 1e6:.3f} um")
print(f"beta_f = {ends.beta_final:.4e} J/m^4")
for name, w0, wf in (("-", ends.omega_minus_0, ends.omega_minus_f), ("+", ends.omega_plus_0, ends.omega_plus_f)):
    print(f"mode {name}: {w0 / (2 * np.pi) / 1e6:.4f} MHz -> {wf / (2 * np.pi) / 1e6:.4f} MHz")
print(f"gamma- = {ends.gamma_minus:.6f}, gamma+ = {ends.gamma_plus:.6f}")

# %%
# The identity protocol
# ---------------------
# With gamma = 1 and no polynomial correction every scaling function stays at
# one, so the cost is exactly the zero-point energy of the initial trap.
harmonic = CostContext(config, ObjectiveSpec(mode="harmonic"), ends)
identity = harmonic.report(AnsatzParams(0.0, 0.0, 0.0, 1.0, 1.0))
print(f"identity: F = {identity.f_harmonic / unit:.6f} hbar w0 "
      f"(zero point {0.5 * (ends.omega_minus_0 + ends.omega_plus_0) / config.omega0:.6f})")

# %%
# The polynomial seed
# -------------------
# a = 0 already reaches the target scaling functions exactly, but the forced
# stretch coordinate is left oscillating.  Its harmonic cost and the
# full-Hamiltonian excitation should agree in order of magnitude.
seed = harmonic.params((0.0, 0.0, 0.0))
report = harmonic.report(seed)
e_exc = verify_params(seed, config, ends).e_exc
print(f"a = 0: F - E0 = {(report.f_harmonic - ground_energy(ends)) / unit:.4g} hbar w0, "
      f"verified E_exc = {e_exc / unit:.4g} hbar w0")

wf = controls_for(config, ends, seed, 2001)
print(f"alpha: {wf.alpha_series[0]:.4e} -> {wf.alpha_series[-1]:.4e} J/m^2, beta max {wf.beta_max():.4e} J/m^4")
