import dataclasses
import math

import numpy as np
import pytest
from scipy.stats import ks_2samp

from sta_separation import (
    HBAR,
    GaussianState2D,
    IonCollision,
    NonPhysical,
    excitation,
    ground_energy,
    initial_state,
    noise_study,
    perturb_controls,
    propagate,
    verify_params,
)
from sta_separation.inverse import ControlWaveforms, controls_for
from sta_separation.verifier import draw_rng, solve_separation, trap_endpoints, verify_waveforms

A_TEST = (-47.1, -125.0, 36.66)


def _static(config, endpoints, duration, n=2001, final=False):
    t = np.linspace(0.0, duration, n)
    if final:
        a, b, d = endpoints.alpha_final, endpoints.beta_final, endpoints.d_final
    else:
        a, b, d = endpoints.alpha_initial, 0.0, endpoints.d0
    return ControlWaveforms(t, np.full(n, a), np.full(n, b), np.full(n, d))


def _mode_variances(state, mass):
    # unit-mass coordinates of the centre-of-mass and stretch modes
    v = np.sqrt(mass / 2.0) * np.array([[1.0, 1.0], [1.0, -1.0]])
    cov = v @ state.covariance[:2, :2] @ v.T
    return cov[0, 0], cov[1, 1], cov[0, 1]


def test_initial_state(config, endpoints):
    state = initial_state(config, endpoints)
    assert np.allclose(state.center, [endpoints.d0 / 2, -endpoints.d0 / 2, 0.0, 0.0], rtol=0, atol=1e-20)
    com, stretch, cross = _mode_variances(state, config.ion_mass)
    assert com == pytest.approx(HBAR / (2 * endpoints.omega_minus_0), rel=1e-10)
    assert stretch == pytest.approx(HBAR / (2 * endpoints.omega_plus_0), rel=1e-10)
    assert abs(cross) < 1e-10 * com
    assert np.allclose(state.symplectic_eigenvalues(), HBAR / 2, rtol=1e-8)
    assert np.allclose(state.covariance, state.covariance.T)


def test_identity_protocol_is_stationary(config, endpoints):
    wf = _static(config, endpoints, config.t_final)
    state = initial_state(config, endpoints)
    prop = propagate(state, wf, config)
    report = excitation(prop.final_state, wf, config)
    assert abs(report.e_exc) < 1e-6 * config.energy_unit
    assert np.allclose(prop.final_state.center[:2], state.center[:2], rtol=0, atol=1e-9 * endpoints.d0)
    assert report.e_exc == pytest.approx(report.e_final - report.e_ground_ref, abs=1e-9 * config.energy_unit)


def test_final_trap_ground_state_has_no_excitation(config, endpoints):
    wf = _static(config, endpoints, config.t_final, final=True)
    state = initial_state(config, trap_endpoints(wf, config))
    report = excitation(state, wf, config)
    assert abs(report.e_exc) < 1e-9 * config.energy_unit


def test_symplectic_structure_is_preserved(config, endpoints):
    wf = controls_for(config, endpoints, dataclasses.replace(_params(endpoints)), 2001)
    prop = propagate(initial_state(config, endpoints), wf, config)
    assert prop.symplectic_error < 1e-8
    assert np.allclose(prop.final_state.symplectic_eigenvalues(), HBAR / 2, rtol=1e-8)
    assert prop.min_separation > 0


def _params(endpoints, free=A_TEST):
    from sta_separation import AnsatzParams

    return AnsatzParams.from_endpoints(endpoints, free)


@pytest.mark.parametrize("free", [(0.0, 0.0, 0.0), (10.0, -20.0, 5.0), A_TEST])
def test_harmonic_truncation_matches_invariant_energy(config, endpoints, harmonic_ctx, free):
    params = _params(endpoints, free)
    predicted = harmonic_ctx.report(params).f_harmonic - ground_energy(endpoints)
    got = verify_params(params, config, endpoints, potential="harmonic").e_exc
    assert got == pytest.approx(predicted, rel=1e-2)


@pytest.mark.parametrize("free", [(0.0, 0.0, 0.0), A_TEST])
def test_step_halving_converges(config, endpoints, free):
    params = _params(endpoints, free)
    coarse = verify_params(params, config, endpoints, n_samples=2001).e_exc
    fine = verify_params(params, config, endpoints, n_samples=4001).e_exc
    assert abs(coarse - fine) < 1e-4 * abs(fine)


def test_energy_is_conserved_under_frozen_controls(config, endpoints):
    period = 2 * math.pi / endpoints.omega_minus_f
    wf = _static(config, endpoints, period, final=True)
    ground = initial_state(config, trap_endpoints(wf, config))
    # displaced and squeezed start so the state actually moves
    shift = np.array([3e-8, 1e-8, 0.0, 0.0])
    state = GaussianState2D(ground.center + shift, ground.covariance * 1.5)
    before = excitation(state, wf, config).e_final
    after = excitation(propagate(state, wf, config).final_state, wf, config).e_final
    assert abs(after - before) < 1e-6 * abs(before)


def test_ions_crossing_is_reported(config, endpoints):
    wf = _static(config, endpoints, config.t_final)
    ground = initial_state(config, endpoints)
    swapped = GaussianState2D(ground.center * np.array([-1.0, -1.0, 1.0, 1.0]), ground.covariance)
    with pytest.raises(IonCollision):
        propagate(swapped, wf, config)


def test_unknown_potential_is_rejected(config, endpoints):
    wf = _static(config, endpoints, config.t_final)
    with pytest.raises(ValueError):
        propagate(initial_state(config, endpoints), wf, config, potential="quartic")


def test_zero_noise_is_identity(config, endpoints):
    wf = controls_for(config, endpoints, _params(endpoints), 201)
    same = perturb_controls(wf, 0.0, np.random.default_rng(0), config.coulomb_const)
    assert np.array_equal(same.alpha_series, wf.alpha_series)
    assert np.array_equal(same.beta_series, wf.beta_series)
    assert np.array_equal(same.d_series, wf.d_series)
    with pytest.raises(ValueError):
        perturb_controls(wf, -0.1, np.random.default_rng(0), config.coulomb_const)


def test_noise_is_seeded_and_resolves_separation(config, endpoints):
    wf = controls_for(config, endpoints, _params(endpoints), 201)
    a = perturb_controls(wf, 1e-3, draw_rng(5, 0), config.coulomb_const)
    b = perturb_controls(wf, 1e-3, draw_rng(5, 0), config.coulomb_const)
    c = perturb_controls(wf, 1e-3, draw_rng(5, 1), config.coulomb_const)
    assert np.array_equal(a.alpha_series, b.alpha_series) and np.array_equal(a.d_series, b.d_series)
    assert not np.array_equal(a.alpha_series, c.alpha_series)
    # one factor per trace
    ratio = a.alpha_series / wf.alpha_series
    assert np.allclose(ratio, ratio[0], rtol=1e-12)
    resid = a.quintic_residuals(config.coulomb_const)
    assert np.max(np.abs(resid)) < 1e-9


def test_noise_factor_mean(config, endpoints):
    sigma, n = 1e-4, 10_000
    wf = controls_for(config, endpoints, _params(endpoints), 5)
    factors = np.array(
        [perturb_controls(wf, sigma, draw_rng(42, i), config.coulomb_const).alpha_series[0] for i in range(n)]
    ) / wf.alpha_series[0]
    assert abs(factors.mean() - 1.0) < 3 * sigma / math.sqrt(n)
    assert factors.std() == pytest.approx(sigma, rel=0.05)


def test_per_sample_noise_varies_along_the_trace(config, endpoints):
    wf = controls_for(config, endpoints, _params(endpoints), 201)
    noisy = perturb_controls(wf, 1e-3, draw_rng(1, 0), config.coulomb_const, per_sample=True)
    ratio = noisy.alpha_series / wf.alpha_series
    assert np.std(ratio) > 1e-4


def test_separation_solver_rejects_unbound_trap(config):
    with pytest.raises(NonPhysical):
        solve_separation(np.array([-1e-9]), np.array([0.0]), config.coulomb_const, np.array([1e-5]))


def test_zero_sigma_study_repeats_nominal(config, endpoints):
    study = noise_study(_params(endpoints), 0.0, 3, 0, config, endpoints)
    assert study.e_exc_samples == [study.nominal] * 3
    assert study.n_failed == 0
    assert study.mean == study.nominal


def test_noise_ensembles_agree_across_seeds(config, endpoints):
    params = _params(endpoints)
    first = noise_study(params, 4e-3, 100, 1, config, endpoints)
    second = noise_study(params, 4e-3, 100, 2, config, endpoints)
    assert len(first.e_exc_samples) + first.n_failed == 100
    assert ks_2samp(first.e_exc_samples, second.e_exc_samples).pvalue > 0.01
    again = noise_study(params, 4e-3, 100, 1, config, endpoints)
    assert again.to_json() == first.to_json()


def test_verify_waveforms_matches_verify_params(config, endpoints):
    params = _params(endpoints)
    direct = verify_waveforms(controls_for(config, endpoints, params, 2001), config)
    assert verify_params(params, config, endpoints) == direct
    assert direct.e_exc > 0
