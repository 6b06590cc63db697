import json
import math

import numpy as np
import pytest

from sta_separation import BudgetExhausted, OptimizerRun, OptimizerSpec, SolutionCloud, run, sweep_times
from sta_separation.optimizers import DEFAULTS, METHODS, Evaluator, genetic_algorithm, nelder_mead
from sta_separation.optimizers.sa import accept_probability


def sphere(x):
    return float(np.sum(np.asarray(x) ** 2))


def rosenbrock(x):
    return float((1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2)


def test_nm_on_quadratic():
    r = run(OptimizerSpec("NM", dims=3), (1.0, 1.0, 1.0), sphere)
    assert np.max(np.abs(r.free)) < 1e-6
    assert r.converged


def test_cma_on_rosenbrock():
    r = run(OptimizerSpec("CMA", dims=2, rng_seed=3), (0.0, 0.0), rosenbrock)
    assert np.max(np.abs(r.free - 1.0)) < 1e-3
    assert rosenbrock(r.free) == pytest.approx(r.best_value, abs=0)


@pytest.mark.parametrize("method", METHODS)
def test_methods_reduce_a_shifted_quadratic(method):
    target = np.array([3.0, -2.0, 1.0])
    r = run(OptimizerSpec(method, dims=3, budget=20000), None, lambda x: sphere(np.asarray(x) - target))
    assert r.best_value < sphere(target)
    assert np.linalg.norm(r.free - target) < 1.0


@pytest.mark.parametrize("method", METHODS)
def test_runs_are_bit_identical(method):
    spec = OptimizerSpec(method, dims=2, rng_seed=11, budget=3000)
    a = run(spec, (0.5, -0.5), rosenbrock)
    b = run(spec, (0.5, -0.5), rosenbrock)
    assert a.to_json() == b.to_json()


@pytest.mark.parametrize("method", METHODS)
def test_budget_is_respected_exactly(method):
    calls = []

    def counted(x):
        calls.append(1)
        return rosenbrock(x)

    spec = OptimizerSpec(method, dims=2, budget=137, method_params={"tol": 0.0} if method != "CMA" else {})
    r = run(spec, (0.0, 0.0), counted)
    assert len(calls) == r.n_evals <= 137
    if not r.converged:
        assert r.n_evals == 137


def test_budget_exhausted_is_reported_not_raised():
    r = run(OptimizerSpec("NM", dims=2, budget=10), (0.0, 0.0), rosenbrock)
    assert not r.converged
    assert r.n_evals == 10
    assert "budget" in r.message


def test_evaluator_raises_past_budget():
    ev = Evaluator(sphere, 2, budget=2)
    ev((1.0, 1.0))
    ev((0.5, 0.0))
    with pytest.raises(BudgetExhausted):
        ev((0.0, 0.0))
    assert ev.best_raw == 0.25


@pytest.mark.parametrize("method", METHODS)
def test_history_is_monotone_and_reproducible(method):
    r = run(OptimizerSpec(method, dims=2, rng_seed=5, budget=4000), (0.0, 0.0), rosenbrock)
    values = [v for _, v in r.history]
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert values[-1] == r.best_value
    assert rosenbrock(r.free) == r.best_value


@pytest.mark.parametrize("method", METHODS)
def test_sentinel_regions_do_not_crash(method):
    sentinel = 1e30

    def walled(x):
        # half of the plane is unphysical
        return sentinel if x[0] > 0.3 else sphere(np.asarray(x) + 1.0)

    r = run(OptimizerSpec(method, dims=2, rng_seed=2, budget=5000), (0.0, 0.0), walled)
    assert r.best_value < sentinel
    assert r.free[0] <= 0.3


def test_nm_diameter_contracts_after_reflection_phase():
    trace = []
    nelder_mead(lambda x: float(x[0] ** 2 + 4 * x[1] ** 2 + x[0] * x[1]), np.array([4.0, -3.0]), trace=trace)
    trace = np.array(trace)
    start = int(np.argmax(trace < trace[0]))
    tail = trace[start:]
    assert np.all(np.diff(tail) <= 1e-15 * tail[:-1])
    assert tail[-1] < 1e-6 * trace[0]


def test_ga_elitism():
    trace = []
    rng = np.random.default_rng(0)
    genetic_algorithm(rosenbrock, np.zeros(2), 5.0, rng, {"max_generations": 80}, trace=trace)
    assert len(trace) > 1
    assert all(b <= a for a, b in zip(trace, trace[1:]))


def test_sa_acceptance_probability():
    assert accept_probability(-1.0, 1.0) == 1.0
    assert accept_probability(0.0, 1.0) == 1.0
    assert accept_probability(1e-12, 1.0) == pytest.approx(0.5)
    assert accept_probability(1e6, 1.0) == pytest.approx(0.0, abs=1e-300)
    assert accept_probability(1.0, 2.0) > accept_probability(1.0, 1.0)


def test_warm_and_cold_spreads_differ():
    spec = OptimizerSpec("GA", dims=2, budget=50)
    cold = run(spec, (0.0, 0.0), sphere)
    warm = run(spec, (0.0, 0.0), sphere, warm=True)
    assert cold.to_json() != warm.to_json()


def test_single_element_sweep_matches_cold_run(harmonic_ctx):
    spec = OptimizerSpec("NM", dims=2, budget=400)
    swept = sweep_times(spec, [3.2e-6], harmonic_ctx)
    direct = run(spec, None, harmonic_ctx.with_t_final(3.2e-6))
    assert len(swept) == 1
    assert swept[0].to_json() == direct.to_json()


def test_sweep_warm_starts_from_previous_best(harmonic_ctx):
    spec = OptimizerSpec("NM", dims=2, budget=300)
    runs = sweep_times(spec, [3.2e-6, 3.5e-6], harmonic_ctx)
    direct = run(spec, runs[0].free, harmonic_ctx.with_t_final(3.5e-6), warm=True, stream=1)
    assert runs[1].to_json() == direct.to_json()
    assert [r.t_final for r in runs] == [3.2e-6, 3.5e-6]


def test_sweep_rejects_unsorted_grid(harmonic_ctx):
    with pytest.raises(ValueError):
        sweep_times(OptimizerSpec("NM"), [4e-6, 3e-6], harmonic_ctx)


def test_sweep_records_failures_and_continues():
    class Flaky:
        def __init__(self, t_final=1.0):
            self.t_final = t_final

        def with_t_final(self, t):
            return Flaky(t)

        def __call__(self, x):
            if self.t_final == 2.0:
                raise RuntimeError("boom")
            return sphere(x)

    runs = sweep_times(OptimizerSpec("NM", dims=2, budget=200), [1.0, 2.0, 3.0], Flaky())
    assert len(runs) == 3
    assert not runs[1].converged and "boom" in runs[1].message
    assert math.isfinite(runs[2].best_value)


def test_harmonic_run_reports_reproducible_value(harmonic_ctx):
    r = run(OptimizerSpec("NM", dims=2, budget=300), None, harmonic_ctx)
    assert harmonic_ctx(r.free) == r.best_value
    assert r.best_params.a12 == 0.0
    assert r.t_final == harmonic_ctx.config.t_final


def test_run_and_cloud_roundtrip(harmonic_ctx):
    r = run(OptimizerSpec("CMA", dims=3, budget=200), None, harmonic_ctx)
    assert OptimizerRun.from_dict(r.to_dict()).to_json() == r.to_json()
    cloud = SolutionCloud()
    cloud.add(r, e_exc=1.5)
    again = SolutionCloud.from_records([json.loads(line) for line in cloud.to_jsonl().splitlines()])
    assert len(again) == 1
    assert np.array_equal(again.points(), cloud.points())


def test_spec_validation_and_defaults():
    with pytest.raises(ValueError):
        OptimizerSpec("BFGS")
    with pytest.raises(ValueError):
        OptimizerSpec("NM", dims=4)
    with pytest.raises(ValueError):
        OptimizerSpec("NM", budget=0)
    assert OptimizerSpec.from_dict({"method": "cma", "dims": 2}).method == "CMA"
    assert DEFAULTS["CMA"]["population"] == 70 and DEFAULTS["CMA"]["sigma0"] == 12
    assert DEFAULTS["GA"]["population"] == 50 and DEFAULTS["GA"]["init_range"] == 60
    assert DEFAULTS["PS"]["inertia_range"] == (0.01, 1.40)
    assert DEFAULTS["SA"]["t0"] == 200
    assert DEFAULTS["NM"]["tol"] == 1e-7
