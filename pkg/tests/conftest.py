"""Shared fixtures for the slowlight test suite.

The standard configuration used throughout (c=1, nu0=2, delta=0,
lambda=-i, Omega_0=0.6) gives round derived constants: k=-0.9i,
w0=i/3, z0=-0.1 and a group velocity of c/11 on the constant
background.
"""

import numpy as np
import pytest

from slowlight.background import (
    ConstantField,
    ExponentialOffField,
    closed_form_instant_off,
    default_grid,
    solve_background,
)
from slowlight.model import PhysicalParams, spectral_derive


@pytest.fixture(scope="session")
def params():
    return PhysicalParams(nu0=2.0)


@pytest.fixture(scope="session")
def spectral():
    return spectral_derive(-1j, 0.6)


@pytest.fixture(scope="session")
def constant_bg(spectral):
    field = ConstantField(0.6)
    return solve_background(field, spectral, default_grid(field, spectral))


@pytest.fixture(scope="session")
def instant_bg(spectral):
    from slowlight.background import InstantOffField

    field = InstantOffField(0.6)
    grid = default_grid(field, spectral)
    return closed_form_instant_off(spectral, grid)


@pytest.fixture(scope="session")
def exp_bg(spectral):
    field = ExponentialOffField(0.6, 4.0)
    return solve_background(field, spectral, default_grid(field, spectral))


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
