"""Inverse engineering: scaling functions -> mode frequencies -> trap controls.

Given rho_+- the Ermakov equation is solved algebraically for Omega_+-^2, the
separation follows from ``Omega_+^2 - Omega_-^2 = 4 C_c / (m d^3)`` and the
trap coefficients from the normal-mode relations.  The only differential
equation left is the forced stretch oscillator

    x'' + Omega_+^2 x = -sqrt(m/2) d''

integrated with classical RK4.  Midpoint values are evaluated analytically
from the polynomials, so any ``n_samples >= 2`` works.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numba
import numpy as np

from .ansatz import AnsatzParams, PolyEval
from .core import Endpoints, PhysicalConfig, quintic_residual
from .errors import NonPhysical

DEFAULT_SAMPLES = 2001


@numba.njit(cache=True)
def _rho_scalar(s, gamma, a10, a11, a12, out):
    # rho = 1 + (gamma - 1) S(s) - s^5 (1-s)^5 q(s), derivatives 0..4 into out
    r = 1.0 - s
    s2 = s * s
    r2 = r * r
    u0, u1, u2, u3, u4 = s2 * s2 * s, 5.0 * s2 * s2, 20.0 * s2 * s, 60.0 * s2, 120.0 * s
    v0, v1, v2, v3, v4 = r2 * r2 * r, -5.0 * r2 * r2, 20.0 * r2 * r, -60.0 * r2, 120.0 * r
    w0 = u0 * v0
    w1 = u1 * v0 + u0 * v1
    w2 = u2 * v0 + 2.0 * u1 * v1 + u0 * v2
    w3 = u3 * v0 + 3.0 * u2 * v1 + 3.0 * u1 * v2 + u0 * v3
    w4 = u4 * v0 + 4.0 * u3 * v1 + 6.0 * u2 * v2 + 4.0 * u1 * v3 + u0 * v4
    q0 = a10 + a11 * (5.0 + s) + a12 * (15.0 + 5.0 * s + s2)
    q1 = a11 + a12 * (5.0 + 2.0 * s)
    q2 = 2.0 * a12
    b0 = w0 * q0
    b1 = w1 * q0 + w0 * q1
    b2 = w2 * q0 + 2.0 * w1 * q1 + w0 * q2
    b3 = w3 * q0 + 3.0 * w2 * q1 + 3.0 * w1 * q2
    b4 = w4 * q0 + 4.0 * w3 * q1 + 6.0 * w2 * q2
    g = gamma - 1.0
    # S' = 630 s^4 (1-s)^4 and its derivatives
    p0 = s2 * s2 * r2 * r2
    p1 = 4.0 * s2 * s * r2 * r2 - 4.0 * s2 * s2 * r2 * r
    p2 = 12.0 * s2 * r2 * r2 - 32.0 * s2 * s * r2 * r + 12.0 * s2 * s2 * r2
    p3 = (24.0 * s * r2 * r2 - 144.0 * s2 * r2 * r + 144.0 * s2 * s * r2 - 24.0 * s2 * s2 * r)
    sm = s2 * s2 * s * (126.0 + s * (-420.0 + s * (540.0 + s * (-315.0 + 70.0 * s))))
    out[0] = 1.0 + g * sm - b0
    out[1] = g * 630.0 * p0 - b1
    out[2] = g * 630.0 * p1 - b2
    out[3] = g * 630.0 * p2 - b3
    out[4] = g * 630.0 * p3 - b4


@numba.njit(cache=True)
def _omega2_and_derivs(r, w02, tf2):
    # Omega^2 = w0^2 / r^4 - r''/(r tf^2) and its first two s-derivatives
    r0, r1, r2, r3, r4 = r[0], r[1], r[2], r[3], r[4]
    iv = 1.0 / r0
    iv2 = iv * iv
    iv4 = iv2 * iv2
    h = r2 * iv
    h1 = (r3 - r2 * r1 * iv) * iv
    h2 = (r4 - (2.0 * r3 * r1 + r2 * r2) * iv + 2.0 * r2 * r1 * r1 * iv2) * iv
    w = w02 * iv4 - h / tf2
    w1 = -4.0 * w02 * r1 * iv4 * iv - h1 / tf2
    w2 = w02 * iv4 * iv * (20.0 * r1 * r1 * iv - 4.0 * r2) - h2 / tf2
    return w, w1, w2


@numba.njit(cache=True)
def _minus_kernel(gm, w0m2, tf, m):
    rho_m = np.empty((m, 5))
    om = np.empty((m, 3))
    tf2 = tf * tf
    for i in range(m):
        s = i / (m - 1.0)
        _rho_scalar(s, gm, 0.0, 0.0, 0.0, rho_m[i])
        om[i, 0], om[i, 1], om[i, 2] = _omega2_and_derivs(rho_m[i], w0m2, tf2)
    return rho_m, om


@numba.njit(cache=True)
def _kernel(om, gp, a10, a11, a12, w0p2, tf, kd, fscale, n):
    """Plus-mode series on the refined grid (2n - 1 points) and RK4 for the stretch mode.

    ``om`` holds Omega_-^2 and its two s-derivatives on the refined grid.
    Returns (status, rho_p, w2p, d, dddot, x, xdot); x and xdot live on the
    n-point grid.  status: 0 ok, 1 rho_+ <= 0, 2 separation undefined.
    """
    m = 2 * n - 1
    rho_p = np.empty((m, 5))
    w2p = np.empty(m)
    d = np.empty(m)
    dddot = np.empty(m)
    x = np.zeros(n)
    xd = np.zeros(n)
    tf2 = tf * tf
    for i in range(m):
        s = i / (m - 1.0)
        _rho_scalar(s, gp, a10, a11, a12, rho_p[i])
        if not rho_p[i, 0] > 0.0:
            return 1, rho_p, w2p, d, dddot, x, xd
        ap, ap1, ap2 = _omega2_and_derivs(rho_p[i], w0p2, tf2)
        g = ap - om[i, 0]
        if not g > 0.0:
            return 2, rho_p, w2p, d, dddot, x, xd
        g1 = ap1 - om[i, 1]
        g2 = ap2 - om[i, 2]
        w2p[i] = ap
        cb = 1.0 / np.cbrt(g)
        d[i] = kd * cb
        dddot[i] = kd * cb / g * ((4.0 / 9.0) * g1 * g1 / g - (1.0 / 3.0) * g2) / tf2
    h = tf / (n - 1.0)
    xx = 0.0
    vv = 0.0
    for k in range(n - 1):
        i0 = 2 * k
        f0 = -fscale * dddot[i0]
        f1 = -fscale * dddot[i0 + 1]
        f2 = -fscale * dddot[i0 + 2]
        k1x = vv
        k1v = -w2p[i0] * xx + f0
        k2x = vv + 0.5 * h * k1v
        k2v = -w2p[i0 + 1] * (xx + 0.5 * h * k1x) + f1
        k3x = vv + 0.5 * h * k2v
        k3v = -w2p[i0 + 1] * (xx + 0.5 * h * k2x) + f1
        k4x = vv + h * k3v
        k4v = -w2p[i0 + 2] * (xx + h * k3x) + f2
        xx += h * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
        vv += h * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0
        x[k + 1] = xx
        xd[k + 1] = vv
    return 0, rho_p, w2p, d, dddot, x, xd


@functools.lru_cache(maxsize=64)
def _minus_branch(gm: float, w0m2: float, tf: float, n: int):
    rho_m, om = _minus_kernel(gm, w0m2, tf, 2 * n - 1)
    if np.any(rho_m[:, 0] <= 0):
        raise NonPhysical("rho_- reaches zero")
    rho_m.setflags(write=False)
    om.setflags(write=False)
    return rho_m, om


def ermakov_invert(rho: PolyEval, omega0: float, t_f: float):
    """Solve the Ermakov equation for the squared frequency.

    ``rho`` carries s-derivatives; the second time derivative is ``rho.d2 / t_f**2``.
    """
    value = np.asarray(rho.value, dtype=float)
    if np.any(value <= 0):
        raise NonPhysical("scaling function must stay positive")
    return omega0**2 / value**4 - np.asarray(rho.d2) / (t_f**2 * value)


@dataclass(frozen=True)
class ModeTrajectory:
    grid: np.ndarray
    rho_minus_series: PolyEval
    rho_plus_series: PolyEval
    omega2_minus: np.ndarray
    omega2_plus: np.ndarray
    d_series: np.ndarray
    d_ddot_series: np.ndarray
    x_plus: np.ndarray
    x_plus_dot: np.ndarray
    config: PhysicalConfig

    @property
    def t_final(self) -> float:
        return self.config.t_final

    @property
    def n_samples(self) -> int:
        return self.grid.size


def _run_kernel(config: PhysicalConfig, endpoints: Endpoints, params: AnsatzParams, n_samples: int):
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    m, cc = config.ion_mass, config.coulomb_const
    tf = float(config.t_final)
    rho_m, om = _minus_branch(float(params.gamma_minus), endpoints.omega_minus_0**2, tf, int(n_samples))
    status, rho_p, w2p, d, dd, x, xd = _kernel(
        om,
        float(params.gamma_plus),
        float(params.a10),
        float(params.a11),
        float(params.a12),
        endpoints.omega_plus_0**2,
        tf,
        (4.0 * cc / m) ** (1.0 / 3.0),
        math.sqrt(m / 2.0),
        int(n_samples),
    )
    if status:
        raise NonPhysical(_STATUS[status])
    return rho_m, om[:, 0], rho_p, w2p, d, dd, x, xd


_STATUS = {1: "scaling function rho_+ reaches zero", 2: "Omega_+^2 <= Omega_-^2: separation undefined"}


def final_state(config, endpoints, params, n_samples=DEFAULT_SAMPLES):
    """Cheap path for cost evaluation: (rho_m(1), rho_p(1), w2m, w2p, d, dddot, x, xdot) at t_f.

    Raises NonPhysical like :func:`build_trajectory`.
    """
    rm, w2m, rp, w2p, d, dd, x, xd = _run_kernel(config, endpoints, params, n_samples)
    return rm[-1], rp[-1], w2m[-1], w2p[-1], d[-1], dd[-1], x[-1], xd[-1]


def build_trajectory(
    config: PhysicalConfig,
    endpoints: Endpoints,
    params: AnsatzParams,
    n_samples: int = DEFAULT_SAMPLES,
) -> ModeTrajectory:
    rm, w2m, rp, w2p, d, dd, x, xd = _run_kernel(config, endpoints, params, n_samples)
    sl = slice(None, None, 2)
    return ModeTrajectory(
        grid=np.linspace(0.0, config.t_final, n_samples),
        rho_minus_series=PolyEval(*rm[sl].T.copy()),
        rho_plus_series=PolyEval(*rp[sl].T.copy()),
        omega2_minus=w2m[sl].copy(),
        omega2_plus=w2p[sl].copy(),
        d_series=d[sl].copy(),
        d_ddot_series=dd[sl].copy(),
        x_plus=x,
        x_plus_dot=xd,
        config=config,
    )


@dataclass(frozen=True)
class ControlWaveforms:
    grid: np.ndarray
    alpha_series: np.ndarray
    beta_series: np.ndarray
    d_series: np.ndarray

    @property
    def t_final(self) -> float:
        return float(self.grid[-1])

    def quintic_residuals(self, coulomb_const: float) -> np.ndarray:
        return quintic_residual(self.alpha_series, self.beta_series, self.d_series, coulomb_const)

    def beta_max(self) -> float:
        return float(np.max(self.beta_series))


def reconstruct_controls(traj: ModeTrajectory, config: PhysicalConfig) -> ControlWaveforms:
    m, cc = config.ion_mass, config.coulomb_const
    d = traj.d_series
    alpha = m / 8.0 * (3.0 * traj.omega2_plus - 5.0 * traj.omega2_minus)
    beta = 2.0 * cc / d**5 - 2.0 * alpha / d**2
    return ControlWaveforms(traj.grid.copy(), alpha, beta, d.copy())


def controls_for(config, endpoints, params, n_samples=DEFAULT_SAMPLES) -> ControlWaveforms:
    return reconstruct_controls(build_trajectory(config, endpoints, params, n_samples), config)
