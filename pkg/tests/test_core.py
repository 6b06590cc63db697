import math

import pytest
import scipy.constants as const

from sta_separation import AMU, NonPhysicalEndpoint, PhysicalConfig, coulomb_constant, derive_endpoints
from sta_separation.core import mode_frequencies_squared, quintic_residual


def test_coulomb_constant_matches_codata():
    expected = const.e**2 / (4 * math.pi * const.epsilon_0)
    assert coulomb_constant() == pytest.approx(expected, rel=1e-15)
    assert f"{coulomb_constant():.4g}" == "2.307e-28"


def test_coulomb_constant_is_a_positive_constant():
    assert coulomb_constant() > 0
    assert coulomb_constant() == coulomb_constant()


def test_config_identity_and_validation():
    cfg = PhysicalConfig()
    assert cfg.alpha0 == pytest.approx(0.5 * cfg.ion_mass * cfg.omega0**2)
    assert cfg.ion_mass == pytest.approx(9 * AMU)
    assert cfg.alpha_final == pytest.approx(-0.5 * cfg.alpha0)
    with pytest.raises(ValueError):
        PhysicalConfig(distance_ratio=1.0)
    with pytest.raises(ValueError):
        PhysicalConfig(t_final=0.0)
    with pytest.raises(ValueError):
        PhysicalConfig(ion_mass=-1.0)


def test_zero_beta_gives_cube_root_separation():
    for omega0 in (2e6, 2 * math.pi * 2e6, 1e7):
        cfg = PhysicalConfig(omega0=omega0)
        ep = derive_endpoints(cfg)
        assert ep.d0**3 == pytest.approx(cfg.coulomb_const / cfg.alpha0, rel=1e-14)


def test_final_beta_closed_form_and_quintic_residuals(config, endpoints):
    ep = endpoints
    expected = (2 * config.coulomb_const + config.alpha0 * ep.d_final**3) / ep.d_final**5
    assert ep.beta_final == pytest.approx(expected, rel=1e-14)
    assert ep.beta_final > 0
    assert abs(quintic_residual(ep.alpha_final, ep.beta_final, ep.d_final, config.coulomb_const)) < 1e-10
    assert abs(quintic_residual(ep.alpha_initial, 0.0, ep.d0, config.coulomb_const)) < 1e-10
    assert ep.d_final == pytest.approx(10 * ep.d0)


def test_com_frequency_equals_omega0(config, endpoints):
    assert endpoints.omega_minus_0 == pytest.approx(config.omega0, rel=1e-14)
    assert endpoints.omega_plus_0 == pytest.approx(math.sqrt(3) * config.omega0, rel=1e-14)


def test_gamma_definition_and_ordering(endpoints, config):
    ep = endpoints
    assert ep.gamma_minus == pytest.approx(math.sqrt(ep.omega_minus_0 / ep.omega_minus_f))
    assert ep.gamma_plus == pytest.approx(math.sqrt(ep.omega_plus_0 / ep.omega_plus_f))
    for d, a, b in ((ep.d0, ep.alpha_initial, 0.0), (ep.d_final, ep.alpha_final, ep.beta_final)):
        wm, wp = mode_frequencies_squared(a, b, d, config.ion_mass, config.coulomb_const)
        assert wp - wm == pytest.approx(4 * config.coulomb_const / (config.ion_mass * d**3))
        assert wp > wm > 0


def test_unphysical_endpoint_raises():
    # a strongly positive final alpha with a modest ratio drives beta_final negative
    with pytest.raises(NonPhysicalEndpoint):
        derive_endpoints(PhysicalConfig(alpha_final_ratio=5.0, distance_ratio=2.0))


def test_derive_endpoints_is_deterministic(config):
    assert derive_endpoints(config) == derive_endpoints(config)
