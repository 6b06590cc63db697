"""Final-time excitation energy of the normal-mode model and its cubic correction."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .ansatz import AnsatzParams
from .core import HBAR, Endpoints, PhysicalConfig
from .errors import NonPhysical
from .inverse import DEFAULT_SAMPLES, ModeTrajectory, final_state

HARMONIC = "harmonic"
CUBIC = "cubic"

# 1e15 hbar * (2e6 rad/s): far above any physical value on the default configuration
DEFAULT_SENTINEL = 1e15 * HBAR * 2.0e6


@dataclass(frozen=True)
class ObjectiveSpec:
    mode: str = HARMONIC
    epsilon: float = 1e-8
    n_quantum: int = 0
    sentinel: float = DEFAULT_SENTINEL

    def __post_init__(self):
        if self.mode not in (HARMONIC, CUBIC):
            raise ValueError(f"unknown objective mode {self.mode!r}")
        if not (math.isfinite(self.sentinel) and self.sentinel > 0):
            raise ValueError("sentinel must be finite and positive")
        if self.n_quantum < 0:
            raise ValueError("n_quantum must be non-negative")


@dataclass(frozen=True)
class CostReport:
    f_harmonic: float
    e_minus: float
    e_plus: float
    e_forced: float
    delta_e_cubic: float
    f_total: float
    physical: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def unphysical(cls, sentinel: float) -> "CostReport":
        nan = float("nan")
        return cls(nan, nan, nan, nan, nan, sentinel, False)


def mode_energy(rho, rho_dot, omega2, omega0, n_quantum=0):
    """Invariant-based energy of one mode: (2n+1) hbar / (4 W0) (rho'^2 + W^2 rho^2 + W0^2 / rho^2)."""
    bracket = rho_dot**2 + omega2 * rho**2 + omega0**2 / rho**2
    return (2 * n_quantum + 1) * HBAR / (4.0 * omega0) * bracket


def forced_energy(x, x_dot, omega2_plus, d_ddot, mass):
    shift = math.sqrt(mass) * d_ddot / (math.sqrt(2.0) * omega2_plus)
    return 0.5 * x_dot**2 + 0.5 * omega2_plus * (x - shift) ** 2


def cubic_moment(center: float, variance: float) -> float:
    """<q^3> for a Gaussian with the given center and variance."""
    return center**3 + 3.0 * center * variance


def _cubic_from(config, d, x, rho_plus, omega_plus_0):
    variance = HBAR * rho_plus**2 / (2.0 * omega_plus_0)
    prefactor = config.coulomb_const / d**4 * (2.0 / config.ion_mass) ** 1.5
    return prefactor * cubic_moment(x, variance)


def _report(rm, rp, w2m, w2p, d, dd, x, xd, t_f, config, endpoints, spec):
    e_minus = mode_energy(rm[0], rm[1] / t_f, w2m, endpoints.omega_minus_0, spec.n_quantum)
    e_plus = mode_energy(rp[0], rp[1] / t_f, w2p, endpoints.omega_plus_0, spec.n_quantum)
    e_forced = forced_energy(x, xd, w2p, dd, config.ion_mass)
    f_h = e_minus + e_plus + e_forced
    delta = _cubic_from(config, d, x, rp[0], endpoints.omega_plus_0)
    total = f_h + spec.epsilon * abs(delta) if spec.mode == CUBIC else f_h
    return CostReport(f_h, e_minus, e_plus, e_forced, delta, total, True)


def harmonic_cost(traj: ModeTrajectory | None, endpoints: Endpoints, spec: ObjectiveSpec) -> CostReport:
    """Cost report from a built trajectory (``None`` -> sentinel report)."""
    if traj is None:
        return CostReport.unphysical(spec.sentinel)
    config = traj.config
    k = -1
    rm = [v[k] for v in traj.rho_minus_series.derivatives()]
    rp = [v[k] for v in traj.rho_plus_series.derivatives()]
    return _report(
        rm, rp, traj.omega2_minus[k], traj.omega2_plus[k], traj.d_series[k], traj.d_ddot_series[k],
        traj.x_plus[k], traj.x_plus_dot[k], traj.t_final, config, endpoints, spec,
    )


def cubic_correction(traj: ModeTrajectory, config: PhysicalConfig, spec: ObjectiveSpec | None = None) -> float:
    """Signed cubic anharmonic energy <dV3> at t_f for the transported Gaussian of the + mode."""
    w0p = math.sqrt(traj.omega2_plus[0])
    return _cubic_from(config, traj.d_series[-1], traj.x_plus[-1], traj.rho_plus_series.value[-1], w0p)


def ground_energy(endpoints: Endpoints, n_quantum: int = 0) -> float:
    """Lower bound of the harmonic cost: zero-point energy of the final normal modes."""
    return (2 * n_quantum + 1) * endpoints.ground_energy_final()


@dataclass
class CostContext:
    """Everything the objective needs besides the free parameters.

    Calling the context with a free-parameter vector (length 2 or 3) returns
    ``f_total`` in joules; unphysical points return the sentinel.
    """

    config: PhysicalConfig
    spec: ObjectiveSpec = field(default_factory=ObjectiveSpec)
    endpoints: Endpoints | None = None
    n_samples: int = DEFAULT_SAMPLES

    def __post_init__(self):
        if self.endpoints is None:
            from .core import derive_endpoints

            self.endpoints = derive_endpoints(self.config)

    def params(self, free) -> AnsatzParams:
        return AnsatzParams.from_endpoints(self.endpoints, free)

    def report(self, params: AnsatzParams) -> CostReport:
        try:
            state = final_state(self.config, self.endpoints, params, self.n_samples)
        except NonPhysical:
            return CostReport.unphysical(self.spec.sentinel)
        with np.errstate(over="ignore", invalid="ignore"):
            report = _report(*state, self.config.t_final, self.config, self.endpoints, self.spec)
        if not np.isfinite(report.f_total):
            return CostReport.unphysical(self.spec.sentinel)
        return report

    def __call__(self, free) -> float:
        return self.report(self.params(free)).f_total

    def with_t_final(self, t_final: float) -> "CostContext":
        return CostContext(self.config.with_t_final(t_final), self.spec, self.endpoints, self.n_samples)


def objective(params: AnsatzParams, context: CostContext) -> float:
    return context.report(params).f_total
