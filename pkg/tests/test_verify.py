"""The finite-difference oracle and the structural invariant suite."""

import numpy as np
import pytest

from slowlight.background import (
    ConstantField,
    InstantOffField,
    TanhRampField,
    TauGrid,
    closed_form_instant_off,
    default_grid,
    solve_background,
)
from slowlight.errors import GridError, ValidationError
from slowlight.soliton import sample_grid
from slowlight.verify import (
    convergence_study,
    invariant_suite,
    mb_residual,
)


def _snapshot(bg, params, h, half_tau=0.5, half_phi=6.0):
    """Sample the solution near the origin with equal spacings.

    Only used with backgrounds whose ``w_at`` is exact between nodes
    (constant and closed-form), so arbitrary spacings are safe.
    """
    taus = np.arange(-half_tau, half_tau + h / 2, h)
    m = int(round(half_phi / h))
    zetas = np.arange(-m, m + 1) * h
    return sample_grid(zetas, taus, bg, params)


def test_residual_small_on_exact_solution(constant_bg, params):
    snap = _snapshot(constant_bg, params, 1e-2)
    rep = mb_residual(snap, params)
    assert rep.r_field < 2e-5
    assert rep.r_atom < 2e-5
    assert rep.worst == max(rep.r_field, rep.r_atom)


def test_residual_catches_wrong_solution(constant_bg, params):
    """Corrupting the probe envelope must blow the defect up."""
    snap = _snapshot(constant_bg, params, 1e-2)
    bad = type(snap)(
        zetas=snap.zetas, taus=snap.taus, omega=snap.omega,
        omega_a=snap.omega_a * 1.05, omega_b=snap.omega_b,
        psi=snap.psi, phi=snap.phi, theta=snap.theta,
    )
    rep = mb_residual(bad, params)
    assert rep.worst > 1e-3


def test_residual_requires_uniform_sampling(constant_bg, params):
    taus = np.array([-0.2, -0.1, 0.0, 0.1, 0.3])
    zetas = np.linspace(-1.0, 1.0, 5)
    snap = sample_grid(zetas, taus, constant_bg, params)
    with pytest.raises(GridError):
        mb_residual(snap, params)


def test_residual_requires_enough_samples(constant_bg, params):
    snap = sample_grid(np.linspace(-1, 1, 4), np.linspace(-0.1, 0.1, 5),
                       constant_bg, params)
    with pytest.raises(GridError):
        mb_residual(snap, params)


def test_residual_excludes_jump_columns(instant_bg, params):
    h = float(instant_bg.grid.taus[1] - instant_bg.grid.taus[0])
    snap = _snapshot(instant_bg, params, h, half_tau=20 * h, half_phi=0.5)
    clean = mb_residual(snap, params, exclude_taus=(0.0,))
    raw = mb_residual(snap, params)
    # Differencing across the jump inflates the atomic defect.
    assert raw.r_atom > 10 * clean.r_atom
    with pytest.raises(GridError):
        mb_residual(snap, params, exclude_taus=tuple(snap.taus))


def test_convergence_study_second_order(constant_bg, params):
    study = convergence_study(
        lambda h: _snapshot(constant_bg, params, h),
        params, hs=(1e-2, 5e-3, 2.5e-3))
    assert study.order_field == pytest.approx(2.0, abs=0.1)
    assert study.order_atom == pytest.approx(2.0, abs=0.1)
    assert study.finest.worst < 1e-5
    assert len(study.levels) == 3


def test_convergence_study_input_validation(constant_bg, params):
    builder = lambda h: _snapshot(constant_bg, params, h)
    with pytest.raises(ValidationError):
        convergence_study(builder, params, hs=(1e-2, 5e-3))
    with pytest.raises(ValidationError):
        convergence_study(builder, params, hs=(1e-2, 2e-2, 5e-3))


def test_invariant_suite_passes_on_standard_scenarios(exp_bg, params):
    rep = invariant_suite(exp_bg, params, n_points=300, seed=7)
    assert rep.passed, [c.name for c in rep.checks if not c.passed]
    names = {c.name for c in rep.checks}
    assert {"state-norm", "state-purity", "dark-state",
            "velocity-consistency"} <= names
    assert rep.seed == 7


def test_invariant_suite_smooth_field(spectral, params):
    field = TanhRampField(0.6, 2.0)
    bg = solve_background(field, spectral, default_grid(field, spectral),
                          method="riccati")
    rep = invariant_suite(bg, params, n_points=200, seed=11)
    assert rep.passed, [c.name for c in rep.checks if not c.passed]
    vel = next(c for c in rep.checks if c.name == "velocity-consistency")
    assert vel.value <= 1e-6


def test_invariant_rows_render(exp_bg, params):
    rep = invariant_suite(exp_bg, params, n_points=100, seed=1,
                          compare_method=False, width_check=False)
    rows = rep.rows()
    assert len(rows) == len(rep.checks)
    for row in rows:
        assert {"check", "passed", "value", "threshold"} <= set(row)


def test_constant_background_skips_stopping_checks(constant_bg, params):
    rep = invariant_suite(constant_bg, params, n_points=100, seed=2,
                          compare_method=False)
    names = {c.name for c in rep.checks}
    assert "background-decay" not in names
    assert "width-universality" not in names
    assert rep.passed
