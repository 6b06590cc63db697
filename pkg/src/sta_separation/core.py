"""Physical constants and trap endpoint quantities for two-ion separation.

The external potential per ion is ``alpha(t) q**2 + beta(t) q**4`` and the two
ions repel through ``C_c / (q1 - q2)``.  Everything here is SI.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import scipy.constants as const

from .errors import NonPhysicalEndpoint

HBAR = const.hbar
AMU = const.atomic_mass
DEFAULT_OMEGA0 = 2.0 * math.pi * 2.0e6


def coulomb_constant() -> float:
    """Return ``e**2 / (4 pi eps0)`` in J m."""
    return const.e**2 / (4.0 * math.pi * const.epsilon_0)


@dataclass(frozen=True)
class PhysicalConfig:
    """Experiment configuration.

    Defaults describe two 9Be ions in a 2 MHz trap (``omega0 = 2 pi x 2e6
    rad/s``), a final quadratic coefficient of ``-alpha0 / 2`` and a tenfold
    separation.  ``omega0`` is always an angular frequency; pass ``2e6`` to
    read "2 MHz" as rad/s instead.
    """

    ion_mass: float = 9.0 * AMU
    omega0: float = DEFAULT_OMEGA0
    t_final: float = 3.2e-6
    distance_ratio: float = 10.0
    alpha_final_ratio: float = -0.5
    coulomb_const: float = field(default_factory=coulomb_constant)

    def __post_init__(self):
        if not (self.ion_mass > 0 and self.omega0 > 0 and self.t_final > 0 and self.coulomb_const > 0):
            raise ValueError("ion_mass, omega0, t_final and coulomb_const must be positive")
        if not self.distance_ratio > 1:
            raise ValueError("distance_ratio must exceed 1 (separation, not merging)")

    @property
    def alpha0(self) -> float:
        return 0.5 * self.ion_mass * self.omega0**2

    @property
    def alpha_final(self) -> float:
        return self.alpha_final_ratio * self.alpha0

    @property
    def energy_unit(self) -> float:
        """hbar * omega0, the energy scale used in reports."""
        return HBAR * self.omega0

    def with_t_final(self, t_final: float) -> "PhysicalConfig":
        return PhysicalConfig(
            ion_mass=self.ion_mass,
            omega0=self.omega0,
            t_final=t_final,
            distance_ratio=self.distance_ratio,
            alpha_final_ratio=self.alpha_final_ratio,
            coulomb_const=self.coulomb_const,
        )

    def to_dict(self) -> dict:
        return {
            "ion_mass": self.ion_mass,
            "omega0": self.omega0,
            "t_final": self.t_final,
            "distance_ratio": self.distance_ratio,
            "alpha_final_ratio": self.alpha_final_ratio,
            "coulomb_const": self.coulomb_const,
        }


@dataclass(frozen=True)
class Endpoints:
    d0: float
    d_final: float
    alpha_initial: float
    alpha_final: float
    beta_final: float
    omega_minus_0: float
    omega_plus_0: float
    omega_minus_f: float
    omega_plus_f: float
    beta_initial: float = 0.0

    @property
    def gamma_minus(self) -> float:
        return math.sqrt(self.omega_minus_0 / self.omega_minus_f)

    @property
    def gamma_plus(self) -> float:
        return math.sqrt(self.omega_plus_0 / self.omega_plus_f)

    def ground_energy_final(self) -> float:
        """Normal-mode zero-point energy of the final trap."""
        return 0.5 * HBAR * (self.omega_minus_f + self.omega_plus_f)


def mode_frequencies_squared(alpha, beta, d, mass, coulomb):
    """Squared normal-mode frequencies ``(Omega_-^2, Omega_+^2)`` around the equilibrium ``+-d/2``."""
    w2_minus = (2.0 * alpha + 3.0 * beta * d**2) / mass
    w2_plus = w2_minus + 4.0 * coulomb / (mass * d**3)
    return w2_minus, w2_plus


def quintic_residual(alpha, beta, d, coulomb):
    """Relative residual of the equilibrium condition ``beta d^5 + 2 alpha d^3 - 2 C_c = 0``."""
    return (beta * d**5 + 2.0 * alpha * d**3 - 2.0 * coulomb) / (2.0 * coulomb)


def derive_endpoints(config: PhysicalConfig) -> Endpoints:
    m, cc = config.ion_mass, config.coulomb_const
    a0, af = config.alpha0, config.alpha_final
    d0 = (cc / a0) ** (1.0 / 3.0)
    df = config.distance_ratio * d0
    beta_f = (2.0 * cc - 2.0 * af * df**3) / df**5
    if beta_f <= 0:
        raise NonPhysicalEndpoint(f"final quartic coefficient {beta_f:g} is not positive")

    wm0, wp0 = mode_frequencies_squared(a0, 0.0, d0, m, cc)
    wmf, wpf = mode_frequencies_squared(af, beta_f, df, m, cc)
    if min(wm0, wp0, wmf, wpf) <= 0:
        raise NonPhysicalEndpoint("a squared mode frequency at the endpoints is not positive")

    return Endpoints(
        d0=d0,
        d_final=df,
        alpha_initial=a0,
        alpha_final=af,
        beta_final=beta_f,
        omega_minus_0=math.sqrt(wm0),
        omega_plus_0=math.sqrt(wp0),
        omega_minus_f=math.sqrt(wmf),
        omega_plus_f=math.sqrt(wpf),
    )
