"""Excitation energy under the full two-ion Hamiltonian.

The state is a thawed Gaussian: the center follows the classical equations of
motion of

    H = (p1^2 + p2^2) / 2m + alpha (q1^2 + q2^2) + beta (q1^4 + q2^4) + C_c / (q1 - q2)

and the covariance is carried by the symplectic matrix of the linearized flow
along that center.  Energies are taken with a second-order moment expansion
around the center.

Internally lengths are in units of the initial separation d0, time in 1/omega0
and mass in m, so the numbers the integrator sees are O(1).
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numba
import numpy as np
from scipy.interpolate import CubicSpline

from .ansatz import AnsatzParams
from .core import HBAR, Endpoints, PhysicalConfig, derive_endpoints, mode_frequencies_squared
from .errors import IonCollision, NonPhysical
from .inverse import DEFAULT_SAMPLES, ControlWaveforms, controls_for

GAUSSIAN = "gaussian"
FULL = "full"
HARMONIC = "harmonic"


@dataclass(frozen=True)
class GaussianState2D:
    """Center (q1, q2, p1, p2) in SI and the 4x4 phase-space covariance in SI."""

    center: np.ndarray
    covariance: np.ndarray

    def symplectic_eigenvalues(self) -> np.ndarray:
        omega = _symplectic_form()
        ev = np.linalg.eigvals(1j * omega @ self.covariance)
        return np.sort(np.abs(ev.real))[::2]


@dataclass(frozen=True)
class ExcitationReport:
    e_final: float
    e_ground_ref: float
    e_exc: float
    method: str = GAUSSIAN
    e_classical: float = 0.0
    e_quantum: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class _Units:
    length: float
    time: float
    mass: float

    @property
    def energy(self) -> float:
        return self.mass * self.length**2 / self.time**2

    @property
    def momentum(self) -> float:
        return self.mass * self.length / self.time

    @property
    def hbar(self) -> float:
        return HBAR / (self.energy * self.time)

    @classmethod
    def of(cls, config: PhysicalConfig) -> "_Units":
        d0 = (config.coulomb_const / config.alpha0) ** (1.0 / 3.0)
        return cls(d0, 1.0 / config.omega0, config.ion_mass)


def _symplectic_form(n: int = 2) -> np.ndarray:
    return np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])


def _mode_hessian(a, b, k, d):
    # dimensionless Hessian of U at the symmetric equilibrium +-d/2
    diag = 2.0 * a + 3.0 * b * d * d + 2.0 * k / d**3
    off = -2.0 * k / d**3
    return np.array([[diag, off], [off, diag]])


@numba.njit(cache=True)
def _accel(x1, x2, a, b, k, full, e1, e2, h11, h12):
    # returns forces and Hessian entries (h11, h22, h12)
    if full:
        r = x1 - x2
        ir2 = 1.0 / (r * r)
        ir3 = ir2 / r
        f1 = -2.0 * a * x1 - 4.0 * b * x1**3 + k * ir2
        f2 = -2.0 * a * x2 - 4.0 * b * x2**3 - k * ir2
        g11 = 2.0 * a + 12.0 * b * x1 * x1 + 2.0 * k * ir3
        g22 = 2.0 * a + 12.0 * b * x2 * x2 + 2.0 * k * ir3
        g12 = -2.0 * k * ir3
        return f1, f2, g11, g22, g12
    f1 = -h11 * (x1 - e1) - h12 * (x2 - e2)
    f2 = -h12 * (x1 - e1) - h11 * (x2 - e2)
    return f1, f2, h11, h11, h12


@numba.njit(cache=True)
def _deriv(y, a, b, k, full, e1, e2, h11, h12, out):
    f1, f2, g11, g22, g12 = _accel(y[0], y[1], a, b, k, full, e1, e2, h11, h12)
    out[0] = y[2]
    out[1] = y[3]
    out[2] = f1
    out[3] = f2
    # S is stored row-major in y[4:20]; dS/dt = [[0, I], [-G, 0]] S
    for j in range(4):
        s0 = y[4 + j]
        s1 = y[8 + j]
        s2 = y[12 + j]
        s3 = y[16 + j]
        out[4 + j] = s2
        out[8 + j] = s3
        out[12 + j] = -(g11 * s0 + g12 * s1)
        out[16 + j] = -(g12 * s0 + g22 * s1)


@numba.njit(cache=True)
def _propagate_kernel(y0, a_arr, b_arr, d_arr, k, h, full):
    """RK4 over triples (2j, 2j+1, 2j+2) of the refined control arrays.

    Returns (status, y_final, min_separation).  status 1 flags a collision.
    """
    y = y0.copy()
    nsteps = (a_arr.size - 1) // 2
    k1 = np.empty(20)
    k2 = np.empty(20)
    k3 = np.empty(20)
    k4 = np.empty(20)
    tmp = np.empty(20)
    min_sep = y[0] - y[1]
    for j in range(nsteps):
        i0 = 2 * j
        a0, a1, a2 = a_arr[i0], a_arr[i0 + 1], a_arr[i0 + 2]
        b0, b1, b2 = b_arr[i0], b_arr[i0 + 1], b_arr[i0 + 2]
        dd0, dd1, dd2 = d_arr[i0], d_arr[i0 + 1], d_arr[i0 + 2]
        h0 = 2.0 * a0 + 3.0 * b0 * dd0 * dd0 + 2.0 * k / dd0**3
        o0 = -2.0 * k / dd0**3
        hm = 2.0 * a1 + 3.0 * b1 * dd1 * dd1 + 2.0 * k / dd1**3
        om = -2.0 * k / dd1**3
        h2 = 2.0 * a2 + 3.0 * b2 * dd2 * dd2 + 2.0 * k / dd2**3
        o2 = -2.0 * k / dd2**3
        _deriv(y, a0, b0, k, full, 0.5 * dd0, -0.5 * dd0, h0, o0, k1)
        for i in range(20):
            tmp[i] = y[i] + 0.5 * h * k1[i]
        _deriv(tmp, a1, b1, k, full, 0.5 * dd1, -0.5 * dd1, hm, om, k2)
        for i in range(20):
            tmp[i] = y[i] + 0.5 * h * k2[i]
        _deriv(tmp, a1, b1, k, full, 0.5 * dd1, -0.5 * dd1, hm, om, k3)
        for i in range(20):
            tmp[i] = y[i] + h * k3[i]
        _deriv(tmp, a2, b2, k, full, 0.5 * dd2, -0.5 * dd2, h2, o2, k4)
        for i in range(20):
            y[i] += h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0
        sep = y[0] - y[1]
        if sep < min_sep:
            min_sep = sep
        if not sep > 0.0:
            return 1, y, min_sep
    return 0, y, min_sep


# RK4 steps per control sample; 2 keeps the symplectic defect below 1e-8
RK4_STEPS_PER_SAMPLE = 2


def _refined(waveforms: ControlWaveforms, steps_per_sample: int = RK4_STEPS_PER_SAMPLE):
    """Control arrays on the RK4 grid (steps plus midpoints) and the RK4 step.

    The controls are interpolated with a cubic spline; the sample values
    themselves are kept exactly.
    """
    t = waveforms.grid
    series = (waveforms.alpha_series, waveforms.beta_series, waveforms.d_series)
    n_fine = 2 * steps_per_sample * (t.size - 1) + 1
    fine = np.linspace(t[0], t[-1], n_fine)
    out = []
    for s in series:
        s = np.asarray(s, dtype=float)
        if np.all(s == s[0]):
            out.append(np.full(n_fine, s[0]))
        else:
            out.append(CubicSpline(t, s)(fine))
    return tuple(out), 2.0 * (fine[1] - fine[0])


def trap_endpoints(waveforms: ControlWaveforms, config: PhysicalConfig) -> Endpoints:
    """Endpoint quantities of the trap actually described by ``waveforms``."""
    m, cc = config.ion_mass, config.coulomb_const
    a, b, d = waveforms.alpha_series, waveforms.beta_series, waveforms.d_series
    wm0, wp0 = mode_frequencies_squared(a[0], b[0], d[0], m, cc)
    wmf, wpf = mode_frequencies_squared(a[-1], b[-1], d[-1], m, cc)
    if min(wm0, wp0, wmf, wpf) <= 0:
        raise NonPhysical("trap endpoints have imaginary mode frequencies")
    return Endpoints(
        d0=float(d[0]),
        d_final=float(d[-1]),
        alpha_initial=float(a[0]),
        alpha_final=float(a[-1]),
        beta_final=float(b[-1]),
        omega_minus_0=math.sqrt(wm0),
        omega_plus_0=math.sqrt(wp0),
        omega_minus_f=math.sqrt(wmf),
        omega_plus_f=math.sqrt(wpf),
        beta_initial=float(b[0]),
    )


def _ground_covariance(hess: np.ndarray, hbar: float) -> np.ndarray:
    w2, vecs = np.linalg.eigh(hess)
    if np.any(w2 <= 0):
        raise NonPhysical("Hessian is not positive definite")
    w = np.sqrt(w2)
    cov = np.zeros((4, 4))
    cov[:2, :2] = vecs @ np.diag(0.5 * hbar / w) @ vecs.T
    cov[2:, 2:] = vecs @ np.diag(0.5 * hbar * w) @ vecs.T
    return cov


def _scale_vector(u: _Units) -> np.ndarray:
    return np.array([u.length, u.length, u.momentum, u.momentum])


def initial_state(config: PhysicalConfig, endpoints: Endpoints | None = None) -> GaussianState2D:
    """Ground state of the initial trap around the equilibrium +-d0/2 (SI)."""
    endpoints = endpoints or derive_endpoints(config)
    u = _Units.of(config)
    d = endpoints.d0 / u.length
    a, b, k = _dimensionless(endpoints.alpha_initial, endpoints.beta_initial, config, u)
    cov = _ground_covariance(_mode_hessian(a, b, k, d), u.hbar)
    scale = _scale_vector(u)
    center = np.array([0.5 * endpoints.d0, -0.5 * endpoints.d0, 0.0, 0.0])
    return GaussianState2D(center, cov * np.outer(scale, scale))


def _dimensionless(alpha, beta, config, u: _Units):
    e = u.mass / u.time**2
    return alpha / e, beta * u.length**2 / e, config.coulomb_const / (e * u.length**3)


@dataclass(frozen=True)
class Propagation:
    final_state: GaussianState2D
    symplectic_matrix: np.ndarray  # dimensionless
    symplectic_error: float
    min_separation: float


def propagate(
    state: GaussianState2D,
    waveforms: ControlWaveforms,
    config: PhysicalConfig,
    potential: str = FULL,
) -> Propagation:
    """Carry a Gaussian state through the control waveforms.

    ``potential="harmonic"`` replaces the Hamiltonian by its quadratic
    expansion around the instantaneous equilibrium +-d(t)/2.
    """
    if potential not in (FULL, HARMONIC):
        raise ValueError(f"unknown potential {potential!r}")
    u = _Units.of(config)
    (a_s, b_s, d_s), step = _refined(waveforms)
    a, b, k = _dimensionless(np.asarray(a_s), np.asarray(b_s), config, u)
    d = np.asarray(d_s) / u.length
    scale = _scale_vector(u)
    y0 = np.zeros(20)
    y0[:4] = state.center / scale
    y0[4:] = np.eye(4).ravel()
    status, y, min_sep = _propagate_kernel(y0, a, b, d, float(k), step / u.time, potential == FULL)
    if status:
        raise IonCollision("ions crossed during propagation")
    s_mat = y[4:].reshape(4, 4)
    omega = _symplectic_form()
    err = float(np.max(np.abs(s_mat.T @ omega @ s_mat - omega)))
    cov0 = state.covariance / np.outer(scale, scale)
    cov = s_mat @ cov0 @ s_mat.T
    final = GaussianState2D(y[:4] * scale, cov * np.outer(scale, scale))
    return Propagation(final, s_mat, err, float(min_sep) * u.length)


def _potential_difference(x, e, a, b, k):
    """U(e + delta) - U(e) for the symmetric equilibrium e = (D/2, -D/2), cancellation free."""
    delta = x - e
    dv = a * delta * (2 * e + delta) + b * delta * (2 * e + delta) * (2 * e * e + 2 * e * delta + delta * delta)
    big_r = e[0] - e[1]
    dr = delta[0] - delta[1]
    return float(np.sum(dv) - k * dr / (big_r * (big_r + dr)))


def _potential(x, a, b, k):
    return float(a * np.sum(x**2) + b * np.sum(x**4) + k / (x[0] - x[1]))


def excitation(
    final_state: GaussianState2D,
    waveforms: ControlWaveforms,
    config: PhysicalConfig,
    potential: str = FULL,
) -> ExcitationReport:
    u = _Units.of(config)
    scale = _scale_vector(u)
    y = final_state.center / scale
    cov = final_state.covariance / np.outer(scale, scale)
    a, b, k = _dimensionless(waveforms.alpha_series[-1], waveforms.beta_series[-1], config, u)
    d = waveforms.d_series[-1] / u.length
    eq = np.array([0.5 * d, -0.5 * d])
    x = y[:2]
    h_eq = _mode_hessian(a, b, k, d)
    if potential == FULL:
        r = x[0] - x[1]
        hess = np.array(
            [
                [2 * a + 12 * b * x[0] ** 2 + 2 * k / r**3, -2 * k / r**3],
                [-2 * k / r**3, 2 * a + 12 * b * x[1] ** 2 + 2 * k / r**3],
            ]
        )
        dv = _potential_difference(x, eq, a, b, k)
    else:
        hess = h_eq
        delta = x - eq
        dv = 0.5 * float(delta @ h_eq @ delta)
    e_cl = 0.5 * float(y[2] ** 2 + y[3] ** 2) + dv
    zero_point = 0.5 * u.hbar * float(np.sum(np.sqrt(np.linalg.eigvalsh(h_eq))))
    e_q = 0.5 * float(np.trace(cov[2:, 2:])) + 0.5 * float(np.trace(hess @ cov[:2, :2]))
    e_exc = e_cl + (e_q - zero_point)
    v_eq = _potential(eq, a, b, k) if potential == FULL else 0.0
    e_final = e_cl + e_q + v_eq
    e_ref = zero_point + v_eq
    en = u.energy
    return ExcitationReport(e_final * en, e_ref * en, e_exc * en, GAUSSIAN, e_cl * en, (e_q - zero_point) * en)


def verify_waveforms(waveforms: ControlWaveforms, config: PhysicalConfig, potential: str = FULL) -> ExcitationReport:
    """Prepare the ground state of the waveform's initial trap, propagate, report E_exc."""
    ends = trap_endpoints(waveforms, config)
    state = initial_state(config, ends)
    prop = propagate(state, waveforms, config, potential)
    return excitation(prop.final_state, waveforms, config, potential)


def verify_params(
    params: AnsatzParams,
    config: PhysicalConfig,
    endpoints: Endpoints | None = None,
    n_samples: int = DEFAULT_SAMPLES,
    potential: str = FULL,
) -> ExcitationReport:
    endpoints = endpoints or derive_endpoints(config)
    return verify_waveforms(controls_for(config, endpoints, params, n_samples), config, potential)


# --- control noise -----------------------------------------------------------------


def solve_separation(alpha, beta, coulomb_const, guess, iterations: int = 60):
    """Positive root of beta d^5 + 2 alpha d^3 - 2 C_c = 0 by safeguarded Newton per sample."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    d = np.asarray(guess, dtype=float).copy()
    for _ in range(iterations):
        f = beta * d**5 + 2 * alpha * d**3 - 2 * coulomb_const
        fp = 5 * beta * d**4 + 6 * alpha * d**2
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / fp
        d_new = d - step
        d_new = np.where(d_new <= 0, 0.5 * d, d_new)
        if np.all(np.abs(d_new - d) <= 1e-15 * np.abs(d)):
            d = d_new
            break
        d = d_new
    res = (beta * d**5 + 2 * alpha * d**3 - 2 * coulomb_const) / (2 * coulomb_const)
    fp = 5 * beta * d**4 + 6 * alpha * d**2
    if not (np.all(np.isfinite(d)) and np.all(d > 0) and np.all(np.abs(res) < 1e-9) and np.all(fp > 0)):
        raise NonPhysical("perturbed trap has no stable positive equilibrium separation")
    return d


def perturb_controls(
    waveforms: ControlWaveforms,
    sigma: float,
    rng: np.random.Generator,
    coulomb_const: float,
    per_sample: bool = False,
) -> ControlWaveforms:
    """Multiply alpha(t) and beta(t) by independent N(1, sigma) factors.

    By default one factor per trace; ``per_sample=True`` draws one per sample.
    The separation is re-solved from the perturbed trap.
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return waveforms
    size = waveforms.grid.size if per_sample else 1
    fa = rng.normal(1.0, sigma, size)
    fb = rng.normal(1.0, sigma, size)
    alpha = waveforms.alpha_series * fa
    beta = waveforms.beta_series * fb
    d = solve_separation(alpha, beta, coulomb_const, waveforms.d_series)
    return ControlWaveforms(waveforms.grid.copy(), alpha, beta, d)


def draw_rng(rng_seed: int, draw: int) -> np.random.Generator:
    """Independent stream for one noise draw: the draw index is mixed into the seed."""
    return np.random.default_rng([int(rng_seed), int(draw)])


@dataclass
class NoiseStudy:
    sigma: float
    n_draws: int
    rng_seed: int
    e_exc_samples: list = field(default_factory=list)
    n_failed: int = 0
    nominal: float = float("nan")

    @property
    def mean(self) -> float:
        return float(np.mean(self.e_exc_samples)) if self.e_exc_samples else float("nan")

    @property
    def median(self) -> float:
        return float(np.median(self.e_exc_samples)) if self.e_exc_samples else float("nan")

    @property
    def max(self) -> float:
        return float(np.max(self.e_exc_samples)) if self.e_exc_samples else float("nan")

    def to_dict(self) -> dict:
        out = asdict(self)
        out.update(mean=self.mean, median=self.median, max=self.max)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def noise_study(
    params: AnsatzParams,
    sigma: float,
    n_draws: int,
    rng_seed: int,
    config: PhysicalConfig,
    endpoints: Endpoints | None = None,
    n_samples: int = DEFAULT_SAMPLES,
    per_sample: bool = False,
) -> NoiseStudy:
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")
    endpoints = endpoints or derive_endpoints(config)
    nominal = controls_for(config, endpoints, params, n_samples)
    study = NoiseStudy(sigma, n_draws, rng_seed, nominal=verify_waveforms(nominal, config).e_exc)
    for i in range(n_draws):
        try:
            noisy = perturb_controls(nominal, sigma, draw_rng(rng_seed, i), config.coulomb_const, per_sample)
            study.e_exc_samples.append(verify_waveforms(noisy, config).e_exc)
        except (NonPhysical, IonCollision):
            study.n_failed += 1
    return study
