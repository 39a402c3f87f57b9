"""Soliton phases, envelopes, atomic state, and the stored-bit profile."""

import numpy as np
import pytest

from slowlight.background import ConstantField, TauGrid, solve_background
from slowlight.errors import ScenarioError, ValidationError
from slowlight.model import PhysicalParams, spectral_derive
from slowlight.soliton import (
    approx_constant_soliton,
    atomic_state,
    fields,
    memory_bit_profile,
    phase_slopes,
    phases,
    sample_grid,
    sech,
)


def test_sech_overflow_safe():
    x = np.array([-800.0, -1.0, 0.0, 1.0, 800.0])
    with np.errstate(over="raise"):
        y = sech(x)
    assert y[2] == pytest.approx(1.0)
    assert y[0] == 0.0 and y[4] == 0.0
    assert y[1] == pytest.approx(1.0 / np.cosh(1.0), rel=1e-14)


def test_phase_slopes_standard(spectral, params):
    a_phi, a_theta = phase_slopes(spectral, params)
    assert a_phi == pytest.approx(1.0, rel=1e-14)
    assert a_theta == pytest.approx(0.0, abs=1e-14)


def test_phase_affine_in_zeta(exp_bg, params):
    """phi and theta are exactly linear in the comoving position."""
    a_phi, a_theta = phase_slopes(exp_bg.spectral, params)
    tau = 0.7
    p1 = phases(1.0, tau, exp_bg, params)
    p2 = phases(-2.5, tau, exp_bg, params)
    assert p1.phi - p2.phi == pytest.approx(3.5 * a_phi, rel=1e-12)
    assert p1.theta - p2.theta == pytest.approx(3.5 * a_theta, abs=1e-12)


def test_constant_background_envelopes(constant_bg, params):
    """Known closed form: |Omega_a| peaks at 2/sqrt(10), Omega_b = 0.6 tanh."""
    zetas = np.linspace(-8.0, 8.0, 401)
    om_a, om_b = fields(zetas, 0.0, constant_bg, params)
    peak = np.max(np.abs(om_a))
    assert peak == pytest.approx(2.0 / np.sqrt(10.0), rel=1e-10)
    ph = phases(zetas, 0.0, constant_bg, params)
    np.testing.assert_allclose(om_b, 0.6 * np.tanh(ph.phi), atol=1e-10)


def test_field_asymptotics_behind_pulse(constant_bg, params):
    """Far behind the pulse the probe vanishes and Omega_b -> -Omega."""
    om_a, om_b = fields(-30.0, 0.0, constant_bg, params)
    assert abs(om_a) < 1e-12
    assert om_b == pytest.approx(-0.6, rel=1e-10)


def test_atomic_state_norm_and_dark_limit(exp_bg, params):
    zetas = np.linspace(-12.0, 12.0, 97)
    state = atomic_state(zetas, 0.3, exp_bg, params)
    norms = np.linalg.norm(state.psi, axis=-1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-13)
    # Far from the pulse center the population sits in the first level.
    far = atomic_state(-40.0, 0.3, exp_bg, params)
    assert far.populations[0] == pytest.approx(1.0, abs=1e-12)


def test_sample_grid_shapes(exp_bg, params):
    zetas = np.linspace(-4.0, 4.0, 9)
    taus = exp_bg.grid.taus[1000:1021]
    snap = sample_grid(zetas, taus, exp_bg, params)
    assert snap.omega_a.shape == (9, 21)
    assert snap.psi.shape == (9, 21, 3)
    assert snap.h_zeta == pytest.approx(1.0)
    assert snap.omega.shape == (21,)


def test_reduction_needs_imaginary_lambda(params):
    s = spectral_derive(0.3 - 2.0j, 0.1)
    with pytest.raises(ValidationError):
        approx_constant_soliton(0.0, 0.0, s, params)


def test_weak_driving_reduction(params):
    """For eps0 >> Omega_0 the exact envelopes collapse to the reduced
    form with an error of order (Omega_0/eps0)^2."""
    eps0, om0 = 8.0, 0.4
    s = spectral_derive(-1j * eps0, om0)
    field = ConstantField(om0)
    grid = TauGrid.from_spacing(-4.0, 4.0, 2e-3)
    bg = solve_background(field, s, grid)
    zetas = np.linspace(-0.4, 0.4, 81)
    exact_a, exact_b = fields(zetas, 0.0, bg, params)
    red_a, red_b = approx_constant_soliton(zetas, 0.0, s, params)
    scale = (om0 / eps0) ** 2
    assert np.max(np.abs(np.abs(exact_a) - np.abs(red_a))) < 3 * scale * om0
    assert np.max(np.abs(exact_b - red_b)) < 3 * scale * om0


def test_memory_bit_profile(instant_bg, params):
    zetas = np.linspace(-8.0, 8.0, 8001)
    profile = memory_bit_profile(zetas, instant_bg, params)
    pops = profile.populations
    np.testing.assert_allclose(pops.sum(axis=-1), 1.0, atol=1e-12)
    # The stored bit is a localized bump in |psi_2|.
    peak_idx = int(np.argmax(profile.amplitude))
    x_peak = profile.x[peak_idx]
    l0 = 0.5 * np.log(10.0 / 9.0)
    assert x_peak == pytest.approx(l0, abs=2e-3)
    # sech tails: about 2 exp(-8) at the window edges
    assert profile.amplitude[0] < 1e-3
    assert profile.amplitude[-1] < 1e-3


def test_memory_bit_requires_stopping(constant_bg, params):
    with pytest.raises(ScenarioError):
        memory_bit_profile(np.linspace(-1, 1, 11), constant_bg, params)
