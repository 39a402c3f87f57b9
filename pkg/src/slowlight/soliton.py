"""Exact slow-light soliton on an arbitrary driven background.

Given a background solution ``(w, z)`` for a controlling field, the
soliton field envelopes and the atomic state follow in closed form from
the phases

    phi_s   = (nu0 zeta / 2) Im 1/(lambda - Delta) + Re z
              + (1/2) ln[(1 + |w|^2) / (1 + |w(0)|^2)],
    theta_s = -(nu0 zeta / 2) Re 1/(lambda - Delta) + Im z.

The probe envelope is a moving ``sech`` pulse riding on the controlling
field, and the three-level state is the rank-one projector built from
amplitudes that are exactly normalized for every ``(zeta, tau)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .background import BackgroundSolution
from .errors import ScenarioError, ValidationError
from .model import AtomicState, PhysicalParams, SpectralPoint

__all__ = [
    "SolitonPhase",
    "SnapshotGrid",
    "MemoryBitProfile",
    "phases",
    "fields",
    "atomic_state",
    "sample_grid",
    "approx_constant_soliton",
    "memory_bit_profile",
    "sech",
    "phase_slopes",
]


def sech(x):
    """Overflow-safe ``1/cosh`` for real arrays."""
    ax = np.abs(np.asarray(x, dtype=float))
    e = np.exp(-ax)
    return 2.0 * e / (1.0 + e * e)


@dataclass(frozen=True, eq=False)
class SolitonPhase:
    """Envelope phase ``phi`` and carrier phase ``theta`` on some points."""

    phi: np.ndarray
    theta: np.ndarray


def phase_slopes(s: SpectralPoint, params: PhysicalParams):
    """Rates of change of ``(phi_s, theta_s)`` per unit ``zeta``."""
    inv = 1.0 / (s.lam - params.delta)
    return 0.5 * params.nu0 * inv.imag, -0.5 * params.nu0 * inv.real


def phases(zeta, tau, bg: BackgroundSolution, params: PhysicalParams) -> SolitonPhase:
    """Soliton phases at comoving points; ``zeta`` and ``tau`` broadcast."""
    s = bg.spectral
    a_phi, a_theta = phase_slopes(s, params)
    w = np.asarray(bg.w_at(tau))
    z = np.asarray(bg.z_at(tau))
    w00 = bg.origin_w
    bump = 0.5 * (np.log1p(np.abs(w) ** 2) - np.log1p(abs(w00) ** 2))
    zeta = np.asarray(zeta, dtype=float)
    phi = a_phi * zeta + z.real + bump
    theta = a_theta * zeta + z.imag
    phi, theta = np.broadcast_arrays(phi, theta)
    return SolitonPhase(phi=np.array(phi), theta=np.array(theta))


def fields(zeta, tau, bg: BackgroundSolution, params: PhysicalParams):
    """Probe and controlling envelopes ``(Omega_a, Omega_b)``.

    ``Omega_a`` is the sech-shaped probe; ``Omega_b`` is the
    controlling channel carrying the soliton, which tends to
    ``-Omega(tau)`` far behind the pulse center.  At a field jump both
    use the half-maximum value of ``Omega``.
    """
    s = bg.spectral
    ph = phases(zeta, tau, bg, params)
    w = np.asarray(bg.w_at(tau))
    om = np.asarray(bg.field(tau))
    lam = s.lam
    root = np.sqrt(1.0 + np.abs(w) ** 2)
    sch = sech(ph.phi)
    carrier = np.exp(1j * ph.theta)
    omega_a = (np.conj(lam) - lam) * w * carrier * sch / root
    omega_b = (lam - np.conj(lam)) * w * (1.0 + np.tanh(ph.phi)) / root**2 - om
    omega_a, omega_b = np.broadcast_arrays(omega_a, omega_b)
    return np.array(omega_a), np.array(omega_b)


def atomic_state(zeta, tau, bg: BackgroundSolution, params: PhysicalParams) -> AtomicState:
    """Pure atomic state of the soliton at comoving points.

    The amplitudes are exactly normalized; far from the pulse center the
    state returns to the first ground level.
    """
    s = bg.spectral
    ph = phases(zeta, tau, bg, params)
    w = np.asarray(bg.w_at(tau))
    lam = s.lam
    denom = abs(lam - params.delta)
    if denom == 0.0:
        raise ValidationError("spectral.lambda: must differ from the detuning delta")
    root = np.sqrt(1.0 + np.abs(w) ** 2)
    pref = (np.conj(lam) - lam) * np.exp(1j * ph.theta) * sech(ph.phi) / (2.0 * denom * root)
    psi1 = (lam.real - params.delta - 1j * lam.imag * np.tanh(ph.phi)) / denom
    psi2 = pref
    psi3 = -w * pref
    psi1, psi2, psi3 = np.broadcast_arrays(psi1, psi2, psi3)
    return AtomicState(psi=np.stack([psi1, psi2, psi3], axis=-1))


@dataclass(frozen=True, eq=False)
class SnapshotGrid:
    """Solution sampled on a tensor grid of comoving points.

    ``omega_a``, ``omega_b``, ``phi`` and ``theta`` have shape
    ``(n_zeta, n_tau)``; ``psi`` has shape ``(n_zeta, n_tau, 3)``;
    ``omega`` holds the bare controlling field on the ``tau`` axis.
    """

    zetas: np.ndarray
    taus: np.ndarray
    omega: np.ndarray
    omega_a: np.ndarray
    omega_b: np.ndarray
    psi: np.ndarray
    phi: np.ndarray
    theta: np.ndarray

    @property
    def h_zeta(self) -> float:
        return float(self.zetas[1] - self.zetas[0])

    @property
    def h_tau(self) -> float:
        return float(self.taus[1] - self.taus[0])


def sample_grid(zetas, taus, bg: BackgroundSolution,
                params: PhysicalParams) -> SnapshotGrid:
    """Sample the full solution on ``zetas x taus``."""
    zetas = np.atleast_1d(np.asarray(zetas, dtype=float))
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    zc = zetas[:, None]
    tc = taus[None, :]
    ph = phases(zc, tc, bg, params)
    omega_a, omega_b = fields(zc, tc, bg, params)
    state = atomic_state(zc, tc, bg, params)
    return SnapshotGrid(
        zetas=zetas, taus=taus,
        omega=np.asarray(bg.field(taus)),
        omega_a=omega_a, omega_b=omega_b,
        psi=state.psi, phi=ph.phi, theta=ph.theta,
    )


def approx_constant_soliton(zeta, tau, s: SpectralPoint, params: PhysicalParams,
                            omega0=None):
    """Weak-driving soliton on a constant field, to leading order.

    Valid for a purely imaginary spectral parameter ``lambda = -i eps0``
    with ``eps0`` well above the real driving amplitude; the phase drift
    reduces to ``z0 ~ -Omega_0^2/(4 eps0)`` and the envelopes to

        Omega_a = -Omega_0 exp(i theta_s0) sech(phi_s0),
        Omega_b =  Omega_0 tanh(phi_s0).

    Returns ``(Omega_a, Omega_b)``.
    """
    if omega0 is None:
        omega0 = s.omega0
    omega0 = complex(omega0)
    if abs(s.lam.real) > 1e-9 * abs(s.lam):
        raise ValidationError(
            "spectral.lambda: the reduced soliton needs a purely imaginary lambda"
        )
    if abs(omega0.imag) > 1e-9 * abs(omega0):
        raise ValidationError(
            "field.omega0: the reduced soliton needs a real driving amplitude"
        )
    eps0 = -s.lam.imag
    z0_red = -(omega0.real**2) / (4.0 * eps0)
    a_phi, a_theta = phase_slopes(s, params)
    zeta = np.asarray(zeta, dtype=float)
    tau = np.asarray(tau, dtype=float)
    phi = a_phi * zeta + z0_red * tau
    theta = a_theta * zeta + 0.0 * tau
    omega_a = -omega0.real * np.exp(1j * theta) * sech(phi)
    omega_b = omega0.real * np.tanh(phi) + 0j
    omega_a, omega_b = np.broadcast_arrays(omega_a, omega_b)
    return np.array(omega_a), np.array(omega_b)


@dataclass(frozen=True, eq=False)
class MemoryBitProfile:
    """Imprinted atomic excitation profile after the field is gone.

    ``psi`` has shape ``(n_zeta, 3)``; the bump in ``|psi_2|^2`` is the
    stored bit.  ``x`` gives the lab-frame positions of the samples.
    """

    zetas: np.ndarray
    x: np.ndarray
    tau: float
    psi: np.ndarray

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    @property
    def amplitude(self) -> np.ndarray:
        """Transfer amplitude ``|psi_2|`` along the medium."""
        return np.abs(self.psi[:, 1])


def memory_bit_profile(zetas, bg: BackgroundSolution,
                       params: PhysicalParams) -> MemoryBitProfile:
    """Atomic state along the medium after the controlling field is off.

    Requires a stopping scenario solved far enough into the future that
    the background has rung down (``|w| <= 1e-6 |w0|`` at the end of the
    grid); otherwise the profile would still be moving.
    """
    if not bg.field.is_stopping:
        raise ScenarioError(
            "memory bit: the controlling field does not switch off"
        )
    decay = bg.final_decay()
    if decay > 1e-6:
        raise ScenarioError(
            f"memory bit: background not yet rung down, |w|/|w0| = {decay:.3e} "
            "at the end of the grid; extend tau_max"
        )
    zetas = np.atleast_1d(np.asarray(zetas, dtype=float))
    tau_end = bg.grid.tau_max
    state = atomic_state(zetas, tau_end, bg, params)
    x = params.x0 + params.c * zetas
    return MemoryBitProfile(zetas=zetas, x=x, tau=tau_end, psi=state.psi)
