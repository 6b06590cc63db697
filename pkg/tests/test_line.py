import math

import numpy as np
import pytest

from sta_separation import AnsatzParams, DegenerateCloud, NoSmoothRegion, classify_regions, fit_line, nu_sweep
from sta_separation.line import NuSample, NuSweepResult, default_nu_grid

U = np.array([0.6, -0.48, 0.64])


def _line_points(n=40, seed=0):
    rng = np.random.default_rng(seed)
    p = np.array([-80.0, -90.0, 25.0])
    return p + np.outer(rng.uniform(-150, 150, n), U)


def _sweep(nu, e_exc, converged=None):
    converged = [True] * len(nu) if converged is None else converged
    samples = [NuSample(float(v), (0.0, 0.0, 0.0), AnsatzParams(), float(e), bool(c)) for v, e, c in zip(nu, e_exc, converged)]
    return NuSweepResult(3.2e-6, samples)


def test_collinear_cloud_is_fitted_exactly():
    fit = fit_line(_line_points())
    assert abs(abs(fit.direction @ U) - 1.0) < 1e-12
    assert fit.residual_rms < 1e-10
    assert np.linalg.norm(fit.direction) == pytest.approx(1.0, abs=1e-15)


def test_repeated_point_is_degenerate():
    with pytest.raises(DegenerateCloud):
        fit_line(np.tile([1.0, 2.0, 3.0], (5, 1)))
    with pytest.raises(DegenerateCloud):
        fit_line(np.array([[1.0, 2.0, 3.0]]))


def test_perturbed_cloud_against_scatter_eigenvectors():
    rng = np.random.default_rng(7)
    delta = 2.0
    base = _line_points(4000, seed=1)
    kicks = rng.normal(size=base.shape)
    # fixed-length kicks in uniformly random directions
    kicks *= delta / np.linalg.norm(kicks, axis=1, keepdims=True)
    pts = base + kicks
    fit = fit_line(pts)

    centered = pts - pts.mean(axis=0)
    w, v = np.linalg.eigh(centered.T @ centered)
    oracle = v[:, np.argmax(w)]
    assert abs(abs(fit.direction @ oracle) - 1.0) < 1e-12
    assert np.allclose(fit.centroid, pts.mean(axis=0), rtol=0, atol=1e-12)
    assert fit.residual_rms == pytest.approx(delta * math.sqrt(2.0 / 3.0), rel=0.03)
    assert math.acos(min(1.0, abs(fit.direction @ U))) < delta / 50


def test_fit_is_permutation_invariant_and_translation_equivariant():
    rng = np.random.default_rng(3)
    pts = _line_points(60) + rng.normal(scale=3.0, size=(60, 3))
    fit = fit_line(pts)
    shuffled = fit_line(pts[rng.permutation(60)])
    shift = np.array([10.0, -20.0, 5.0])
    moved = fit_line(pts + shift)
    assert np.allclose(shuffled.direction, fit.direction, atol=1e-12)
    assert np.allclose(shuffled.centroid, fit.centroid, atol=1e-12)
    assert np.allclose(moved.direction, fit.direction, atol=1e-12)
    assert np.allclose(moved.centroid, fit.centroid + shift, atol=1e-12)
    assert moved.residual_rms == pytest.approx(fit.residual_rms, rel=1e-9)


def test_trim_discards_outliers():
    pts = _line_points(50)
    outliers = np.array([[300.0, 300.0, 300.0], [-300.0, 250.0, -280.0]])
    fit = fit_line(np.vstack([pts, outliers]), trim=0.05)
    assert abs(abs(fit.direction @ U) - 1.0) < 1e-10
    with pytest.raises(ValueError):
        fit_line(pts, trim=1.0)


def test_default_grid_contains_zero_and_extends_cloud():
    pts = _line_points()
    fit = fit_line(pts)
    grid = default_nu_grid(fit, pts)
    nu = fit.project(pts)
    assert grid.size == 161
    assert np.any(grid == 0.0)
    assert grid.min() < nu.min() and grid.max() > nu.max()
    assert np.allclose(np.diff(grid), grid[1] - grid[0])


def test_smooth_profile_is_all_smooth():
    nu = np.linspace(-5, 5, 41)
    lo, hi = classify_regions(_sweep(nu, 1.0 + 0.1 * (nu + 5)))
    assert (lo, hi) == (nu[0], nu[-1])


def test_hundredfold_jump_sets_the_boundary():
    nu = np.linspace(-5, 5, 41)
    e = 1.0 + 0.01 * nu**2
    star = 2.5
    e = np.where(nu > star, 100.0 * e, e)
    lo, hi = classify_regions(_sweep(nu, e))
    assert lo == nu[0]
    assert hi == nu[nu <= star].max()


def test_failed_sample_ends_the_smooth_region():
    nu = np.linspace(-5, 5, 41)
    conv = [True] * 41
    conv[5] = False
    lo, hi = classify_regions(_sweep(nu, np.ones(41), conv))
    assert lo == nu[6] and hi == nu[-1]


def test_infinite_jump_factor_disables_threshold():
    nu = np.linspace(-5, 5, 41)
    e = np.where(np.arange(41) % 2 == 0, 1.0, 1e6)
    lo, hi = classify_regions(_sweep(nu, e), jump_factor=math.inf)
    assert (lo, hi) == (nu[0], nu[-1])
    assert classify_regions(_sweep(nu, e)) == (0.0, 0.0)


def test_classify_errors():
    nu = np.linspace(-1, 1, 5)
    conv = [True, True, False, True, True]
    with pytest.raises(NoSmoothRegion):
        classify_regions(_sweep(nu, np.ones(5), conv))
    with pytest.raises(ValueError):
        classify_regions(_sweep(nu[:2], np.ones(2)))
    with pytest.raises(ValueError):
        classify_regions(_sweep(nu, np.ones(5)), jump_factor=1.0)


def test_single_nu_sweep_is_one_refinement(cubic_ctx):
    fit = fit_line(np.array([[-90.0, -80.0, 25.0], [-80.0, -90.0, 27.0], [-70.0, -100.0, 29.0]]))
    result = nu_sweep(fit, [0.0], 3.2e-6, cubic_ctx, budget=400)
    assert len(result.samples) == 1
    sample = result.samples[0]
    assert sample.seed == tuple(fit.centroid.tolist())
    assert sample.n_evals <= 400
    assert math.isfinite(sample.f_total)
    assert math.isfinite(sample.e_exc) or not sample.converged
    assert sample.converged == (result.best == 0)
