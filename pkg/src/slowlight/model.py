"""Core model types: frames, physical constants, and spectral data.

The medium is described in a comoving frame ``zeta = (x - x0)/c``,
``tau = t - (x - x0)/c``.  A soliton is labelled by a complex spectral
parameter ``lambda`` in the open lower half plane together with the
asymptotic driving amplitude ``Omega_0``; from these the wavenumber
``k(lambda)``, the asymptotic polarization ratio ``w0`` and the phase
drift rate ``z0`` follow in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSpectrumError,
    InvalidSolitonError,
    ValidationError,
)

__all__ = [
    "PhysicalParams",
    "ComovingPoint",
    "SpectralPoint",
    "AtomicState",
    "to_lab_frame",
    "from_lab_frame",
    "spectral_derive",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Medium constants and the lab-frame anchor of the comoving frame.

    Parameters
    ----------
    nu0 : float
        Coupling rate between the field envelopes and the medium
        polarization.  Must be positive.
    delta : float
        One-photon detuning of the driving fields from the excited level.
    c : float
        Speed of light in the host medium.  Must be positive.
    x0 : float
        Lab-frame position where the comoving frame is anchored.
    """

    nu0: float
    delta: float = 0.0
    c: float = 1.0
    x0: float = 0.0

    def __post_init__(self) -> None:
        for name in ("nu0", "delta", "c", "x0"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValidationError(f"physical.{name}: must be finite")
        if self.nu0 <= 0:
            raise ValidationError("physical.nu0: must be > 0")
        if self.c <= 0:
            raise ValidationError("physical.c: must be > 0")


@dataclass(frozen=True)
class ComovingPoint:
    """A point (zeta, tau) in the comoving frame."""

    zeta: float
    tau: float


def to_lab_frame(point: ComovingPoint, params: PhysicalParams):
    """Map a comoving point to lab-frame coordinates ``(x, t)``.

    The comoving coordinates are ``zeta = (x - x0)/c`` and
    ``tau = t - (x - x0)/c``, hence ``x = x0 + c*zeta`` and
    ``t = tau + zeta``.
    """
    x = params.x0 + params.c * point.zeta
    t = point.tau + point.zeta
    return x, t


def from_lab_frame(x, t, params: PhysicalParams) -> ComovingPoint:
    """Map lab-frame coordinates ``(x, t)`` back to a comoving point."""
    zeta = (x - params.x0) / params.c
    tau = t - zeta
    return ComovingPoint(zeta=zeta, tau=tau)


@dataclass(frozen=True)
class SpectralPoint:
    """Spectral label of a soliton plus its derived constants.

    Instances should be built with :func:`spectral_derive`, which
    enforces the branch conventions; the fields are stored rather than
    recomputed so that downstream code never has to repeat the branch
    logic.

    Attributes
    ----------
    lam : complex
        Spectral parameter, strictly in the open lower half plane.
    omega0 : complex
        Driving amplitude before switch-off.
    k : complex
        Wavenumber ``k(lambda)`` on the physical branch.
    w0 : complex
        Asymptotic polarization ratio ``Omega_0 / (2k)``.
    z0 : complex
        Asymptotic phase drift rate ``i*|Omega_0|^2 / (4k)``.
    """

    lam: complex
    omega0: complex
    k: complex
    w0: complex
    z0: complex


def spectral_derive(lam: complex, omega0: complex) -> SpectralPoint:
    """Build the spectral data for a soliton labelled by ``lam``.

    The wavenumber is ``k = (lam + lam*sqrt(1 + |Omega_0|^2/lam^2))/2``
    with the principal square root, which places the branch cut of
    ``k(lam)`` on the imaginary segment between ``-i|Omega_0|`` and
    ``+i|Omega_0|``, keeps ``Im k < 0`` throughout the lower half plane
    and gives ``k -> lam`` for large ``|lam|``.

    Parameters
    ----------
    lam : complex
        Spectral parameter.  ``Im(lam) < 0`` is required.
    omega0 : complex
        Driving amplitude on the far past side.

    Returns
    -------
    SpectralPoint

    Raises
    ------
    InvalidSolitonError
        If ``Im(lam) >= 0``.
    DegenerateSpectrumError
        If ``lam`` lies on the branch segment ``[-i|Omega_0|, 0)``.
    """
    lam = complex(lam)
    omega0 = complex(omega0)
    if not (np.isfinite(lam.real) and np.isfinite(lam.imag)):
        raise ValidationError("spectral.lambda: must be finite")
    if not (np.isfinite(omega0.real) and np.isfinite(omega0.imag)):
        raise ValidationError("field.omega0: must be finite")
    if lam.imag >= 0:
        raise InvalidSolitonError(
            f"spectral.lambda: Im(lambda) must be < 0, got {lam.imag!r}"
        )
    mag0 = abs(omega0)
    scale = max(1.0, mag0, abs(lam))
    if mag0 > 0 and abs(lam.real) <= 1e-12 * scale and abs(lam) <= mag0 * (1 + 1e-12):
        raise DegenerateSpectrumError(
            "spectral.lambda: lies on the branch segment of k(lambda) "
            f"(pure imaginary with |lambda| <= |Omega_0| = {mag0!r})"
        )
    k = complex(0.5 * (lam + lam * np.sqrt(1.0 + mag0**2 / lam**2)))
    if mag0 == 0:
        w0 = 0j
        z0 = 0j
    else:
        w0 = omega0 / (2.0 * k)
        z0 = 1j * mag0**2 / (4.0 * k)
    return SpectralPoint(lam=lam, omega0=omega0, k=k, w0=w0, z0=z0)


@dataclass(frozen=True, eq=False)
class AtomicState:
    """Pure three-level state, stored as amplitude arrays.

    ``psi`` has shape ``(..., 3)`` with components ordered as the two
    ground levels followed by the excited level.  The density matrix is
    the rank-one projector built from ``psi``.
    """

    psi: np.ndarray

    def __post_init__(self) -> None:
        psi = np.asarray(self.psi, dtype=complex)
        if psi.shape[-1:] != (3,):
            raise ValidationError("AtomicState: psi must have trailing dimension 3")
        if not np.all(np.isfinite(psi.view(float))):
            raise ValidationError("AtomicState: psi must be finite")
        norms = np.sqrt(np.sum(np.abs(psi) ** 2, axis=-1))
        worst = float(np.max(np.abs(norms - 1.0))) if norms.size else 0.0
        if worst > 1e-12:
            raise ValidationError(
                f"AtomicState: psi must be normalized, |norm - 1| up to {worst:.3e}"
            )
        object.__setattr__(self, "psi", psi)

    @property
    def rho(self) -> np.ndarray:
        """Density matrix ``psi psi^dagger`` with shape ``(..., 3, 3)``."""
        return self.psi[..., :, None] * np.conj(self.psi[..., None, :])

    @property
    def populations(self) -> np.ndarray:
        """Level populations ``|psi_i|^2`` with shape ``(..., 3)``."""
        return np.abs(self.psi) ** 2
