"""Line of minima through a cloud of optimized coefficients.

Optimized (a10, a11, a12) triples from all methods and final times lie close
to a straight line.  Fitting it, seeding Nelder-Mead along the line and
ranking the refined points by their full-Hamiltonian excitation energy turns
the three-dimensional search into a one-dimensional one.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .ansatz import AnsatzParams
from .errors import DegenerateCloud, IonCollision, NonPhysical, NoSmoothRegion
from .optimizers import OptimizerSpec, SolutionCloud, run
from .verifier import verify_params

DEFAULT_NU_SAMPLES = 161
DEFAULT_EXTENSION = 0.5
DEFAULT_JUMP_FACTOR = 10.0


@dataclass(frozen=True)
class LineFit:
    centroid: np.ndarray
    direction: np.ndarray
    residual_rms: float

    def point(self, nu: float) -> np.ndarray:
        return self.centroid + nu * self.direction

    def project(self, points) -> np.ndarray:
        """Line coordinate nu of each point."""
        return (np.asarray(points, dtype=float) - self.centroid) @ self.direction

    def to_dict(self) -> dict:
        return {
            "centroid": self.centroid.tolist(),
            "direction": self.direction.tolist(),
            "residual_rms": self.residual_rms,
        }


def _as_points(cloud) -> np.ndarray:
    pts = cloud.points() if isinstance(cloud, SolutionCloud) else np.asarray(cloud, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("cloud must be an (n, 3) array of coefficient triples")
    if not np.all(np.isfinite(pts)):
        raise ValueError("cloud contains non-finite coefficients")
    return pts


def _principal_axis(pts: np.ndarray):
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    scale = max(np.abs(pts).max(), 1.0)
    if len(pts) < 2 or np.abs(centered).max() <= 1e-14 * scale:
        raise DegenerateCloud("cloud points coincide; no direction defined")
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    direction = vt[0]
    # sign convention: largest component positive
    if direction[np.argmax(np.abs(direction))] < 0:
        direction = -direction
    orth = centered - np.outer(centered @ direction, direction)
    return centroid, direction, np.sum(orth**2, axis=1)


def fit_line(cloud, trim: float = 0.0) -> LineFit:
    """Total-least-squares line through the cloud.

    ``trim`` discards that fraction of points with the largest orthogonal
    distance and refits once (default: no rejection).
    """
    pts = _as_points(cloud)
    if not 0.0 <= trim < 1.0:
        raise ValueError("trim must lie in [0, 1)")
    centroid, direction, dist2 = _principal_axis(pts)
    if trim > 0:
        keep = np.argsort(dist2, kind="stable")[: max(2, int(round(len(pts) * (1.0 - trim))))]
        centroid, direction, dist2 = _principal_axis(pts[np.sort(keep)])
    return LineFit(centroid, direction / np.linalg.norm(direction), float(np.sqrt(dist2.mean())))


def default_nu_grid(fit: LineFit, cloud, n: int = DEFAULT_NU_SAMPLES, extension: float = DEFAULT_EXTENSION) -> np.ndarray:
    """Uniform nu grid over the cloud's projected range, widened by ``extension`` on each side.

    The grid is shifted to contain nu = 0 exactly (the centroid).
    """
    nu = fit.project(_as_points(cloud))
    lo, hi = nu.min(), nu.max()
    width = hi - lo
    lo, hi = lo - extension * width, hi + extension * width
    if n < 2 or width <= 0:
        return np.zeros(1)
    h = (hi - lo) / (n - 1)
    start = math.floor(lo / h)
    return h * np.arange(start, start + n, dtype=float)


@dataclass(frozen=True)
class NuSample:
    nu: float
    seed: tuple
    refined: AnsatzParams
    e_exc: float
    converged: bool
    f_total: float = math.nan
    n_evals: int = 0


@dataclass
class NuSweepResult:
    t_final: float
    samples: list = field(default_factory=list)
    best: int | None = None
    local_best: int | None = None
    smooth_boundary: tuple | None = None
    jump_factor: float = DEFAULT_JUMP_FACTOR

    @property
    def nu(self) -> np.ndarray:
        return np.array([s.nu for s in self.samples])

    @property
    def e_exc(self) -> np.ndarray:
        return np.array([s.e_exc for s in self.samples])

    @property
    def converged(self) -> np.ndarray:
        return np.array([s.converged for s in self.samples], dtype=bool)

    def best_sample(self) -> NuSample | None:
        return None if self.best is None else self.samples[self.best]

    def local_sample(self) -> NuSample | None:
        return None if self.local_best is None else self.samples[self.local_best]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["smooth_boundary"] = list(self.smooth_boundary) if self.smooth_boundary else None
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _update_indices(result: NuSweepResult, jump_factor: float) -> NuSweepResult:
    ok = [i for i, s in enumerate(result.samples) if s.converged and math.isfinite(s.e_exc)]
    result.best = min(ok, key=lambda i: result.samples[i].e_exc) if ok else None
    result.jump_factor = jump_factor
    try:
        lo, hi = classify_regions(result, jump_factor)
    except (NoSmoothRegion, ValueError):
        result.smooth_boundary, result.local_best = None, None
        return result
    result.smooth_boundary = (lo, hi)
    inside = [i for i in ok if lo <= result.samples[i].nu <= hi]
    result.local_best = min(inside, key=lambda i: result.samples[i].e_exc) if inside else None
    return result


def refine_point(seed, context, nm_params: dict | None = None, budget: int = 20_000):
    """Nelder-Mead refinement of one seed, then the full-Hamiltonian E_exc of the result.

    Returns ``(run, e_exc, converged)``; unphysical refinements give
    ``e_exc = nan`` and ``converged = False``.
    """
    spec = OptimizerSpec("NM", dims=3, method_params=dict(nm_params or {}), budget=budget)
    r = run(spec, seed, context)
    physical = math.isfinite(r.best_value) and r.best_value < context.spec.sentinel
    e_exc = math.nan
    if physical:
        try:
            e_exc = verify_params(r.best_params, context.config, context.endpoints, context.n_samples).e_exc
        except (NonPhysical, IonCollision):
            physical = False
    return r, e_exc, bool(r.converged and physical and math.isfinite(e_exc))


def nu_sweep(
    fit: LineFit,
    nu_grid,
    t_final: float,
    context,
    jump_factor: float = DEFAULT_JUMP_FACTOR,
    nm_params: dict | None = None,
    budget: int = 20_000,
) -> NuSweepResult:
    """Refine ``centroid + nu * direction`` with Nelder-Mead for every nu and rank by E_exc.

    ``context`` is a :class:`~sta_separation.cost.CostContext`; its final time
    is replaced by ``t_final``.
    """
    nu_grid = np.atleast_1d(np.asarray(nu_grid, dtype=float))
    if nu_grid.size == 0:
        raise ValueError("nu_grid must not be empty")
    ctx = context.with_t_final(t_final)
    result = NuSweepResult(t_final)
    for nu in np.sort(nu_grid):
        seed = fit.point(nu)
        r, e_exc, ok = refine_point(seed, ctx, nm_params, budget)
        result.samples.append(
            NuSample(float(nu), tuple(seed.tolist()), r.best_params, float(e_exc), ok, r.best_value, r.n_evals)
        )
    return _update_indices(result, jump_factor)


def classify_regions(result: NuSweepResult, jump_factor: float = DEFAULT_JUMP_FACTOR) -> tuple:
    """Widest contiguous nu interval around nu = 0 in which E_exc varies smoothly.

    Neighbouring samples must both be converged and differ by less than
    ``jump_factor`` in E_exc.  The sample closest to nu = 0 anchors the
    interval.
    """
    if not jump_factor > 1.0:
        raise ValueError("jump_factor must exceed 1")
    samples = sorted(result.samples, key=lambda s: s.nu)
    good = [s for s in samples if s.converged and math.isfinite(s.e_exc)]
    if len(good) < 3:
        raise ValueError("at least three converged samples are needed")
    limit = math.log(jump_factor)
    i0 = min(range(len(samples)), key=lambda i: abs(samples[i].nu))
    if not (samples[i0].converged and math.isfinite(samples[i0].e_exc)):
        raise NoSmoothRegion("the nu = 0 sample did not converge")

    def smooth(a: NuSample, b: NuSample) -> bool:
        if not (b.converged and math.isfinite(b.e_exc)):
            return False
        if a.e_exc <= 0 or b.e_exc <= 0:
            return abs(a.e_exc - b.e_exc) <= (jump_factor - 1.0) * max(abs(a.e_exc), abs(b.e_exc), 1e-300)
        return abs(math.log(b.e_exc) - math.log(a.e_exc)) < limit

    lo = i0
    while lo > 0 and smooth(samples[lo], samples[lo - 1]):
        lo -= 1
    hi = i0
    while hi < len(samples) - 1 and smooth(samples[hi], samples[hi + 1]):
        hi += 1
    return samples[lo].nu, samples[hi].nu
