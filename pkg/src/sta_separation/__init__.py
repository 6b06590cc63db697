"""Shortcut-to-adiabaticity control design for fast two-ion separation.

Polynomial scaling functions are inverse-engineered into trap waveforms, their
free coefficients are fixed by derivative-free optimizers, and the resulting
protocols are checked against the full anharmonic two-ion Hamiltonian.
"""
from .ansatz import AnsatzParams, PolyEval, check_boundaries, rho_minus, rho_plus
from .core import AMU, HBAR, Endpoints, PhysicalConfig, coulomb_constant, derive_endpoints
from .cost import CostContext, CostReport, ObjectiveSpec, cubic_correction, ground_energy, harmonic_cost, objective
from .errors import (
    BudgetExhausted,
    ConfigError,
    DegenerateCloud,
    DomainError,
    IonCollision,
    NonPhysical,
    NonPhysicalEndpoint,
    NoSmoothRegion,
    StaError,
)
from .inverse import ControlWaveforms, ModeTrajectory, build_trajectory, ermakov_invert, reconstruct_controls
from .line import LineFit, NuSweepResult, classify_regions, fit_line, nu_sweep
from .optimizers import OptimizerRun, OptimizerSpec, SolutionCloud, run, sweep_times
from .verifier import (
    ExcitationReport,
    GaussianState2D,
    NoiseStudy,
    excitation,
    initial_state,
    noise_study,
    perturb_controls,
    propagate,
    verify_params,
)

__version__ = "0.1.0"

__all__ = [
    "AMU", "HBAR", "AnsatzParams", "BudgetExhausted", "ConfigError", "ControlWaveforms", "CostContext",
    "CostReport", "DegenerateCloud", "DomainError", "Endpoints", "ExcitationReport", "GaussianState2D",
    "IonCollision", "LineFit", "ModeTrajectory", "NoSmoothRegion", "NoiseStudy", "NonPhysical",
    "NonPhysicalEndpoint", "NuSweepResult", "ObjectiveSpec", "OptimizerRun", "OptimizerSpec",
    "PhysicalConfig", "PolyEval", "SolutionCloud", "StaError", "build_trajectory", "check_boundaries",
    "classify_regions", "coulomb_constant", "cubic_correction", "derive_endpoints", "ermakov_invert",
    "excitation", "fit_line", "ground_energy", "harmonic_cost", "initial_state", "noise_study", "nu_sweep",
    "objective", "perturb_controls", "propagate", "reconstruct_controls", "rho_minus", "rho_plus", "run",
    "sweep_times", "verify_params",
]
