"""Material laws of the two half-spaces and the functions Theta, theta.

The interface sits at x = 0.  For x < 0 the medium is vacuum, for x > 0 it
is a Drude material whose permittivity and permeability

    eps(zeta) = eps0 (1 - Omega_e**2 / zeta**2)
    mu(zeta)  = mu0  (1 - Omega_m**2 / zeta**2)

become negative below the plasma frequencies.  The reduced Sturm-Liouville
problem is driven by

    Theta = k**2 - eps * mu * zeta**2,     theta = sqrt(Theta),

where sqrt is the principal branch (cut along the negative real axis), so
Re theta > 0 whenever Im zeta != 0.  On the real axis theta is replaced by
its limit from the upper half plane, whose sign depends on the zone.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .zones import Zone, ZoneKind, as_kind


class Side(enum.Enum):
    MINUS = -1  # vacuum, x < 0
    PLUS = 1  # Drude medium, x > 0


@dataclass(frozen=True)
class MediumParams:
    eps0: float = 1.0
    mu0: float = 1.0
    omega_e: float = 1.0
    omega_m: float = 1.0

    def __post_init__(self):
        for name in ("eps0", "mu0", "omega_e", "omega_m"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise DomainError(f"{name} must be a real number")
            if not math.isfinite(value) or value <= 0:
                raise DomainError(f"{name} must be positive")

    @property
    def big_k(self) -> float:
        """K = eps0 mu0 (Omega_m^2 - Omega_e^2)."""
        return self.eps0 * self.mu0 * (self.omega_m**2 - self.omega_e**2)

    @property
    def c2(self) -> float:
        """eps0 * mu0 (inverse squared vacuum wave speed)."""
        return self.eps0 * self.mu0


def _side(side) -> Side:
    return side if isinstance(side, Side) else Side(side)


def _check_nonzero(zeta):
    if np.any(np.asarray(zeta) == 0):
        raise DomainError("zeta = 0 is a pole of the Drude law")


def coefficients(p: MediumParams, zeta, side):
    """Return (eps, mu) at spectral parameter ``zeta`` on ``side``."""
    _check_nonzero(zeta)
    zeta = np.asarray(zeta, dtype=complex)
    if _side(side) is Side.MINUS:
        ones = np.ones_like(zeta)
        return p.eps0 * ones, p.mu0 * ones
    z2 = zeta * zeta
    return p.eps0 * (1 - p.omega_e**2 / z2), p.mu0 * (1 - p.omega_m**2 / z2)


def mu_of(p: MediumParams, zeta, side):
    """Permeability alone (the quantity that enters every interface formula)."""
    _check_nonzero(zeta)
    if _side(side) is Side.MINUS:
        return p.mu0 * np.ones_like(np.asarray(zeta, dtype=complex))
    zeta = np.asarray(zeta, dtype=complex)
    return p.mu0 * (1 - p.omega_m**2 / (zeta * zeta))


def theta_squared(p: MediumParams, k: float, zeta, side):
    """Theta^{+-}_{k,zeta} = k^2 - eps mu zeta^2."""
    _check_nonzero(zeta)
    zeta = np.asarray(zeta, dtype=complex)
    z2 = zeta * zeta
    if _side(side) is Side.MINUS:
        return k * k - p.c2 * z2
    # expanded form: one division instead of two poles
    we2, wm2 = p.omega_e**2, p.omega_m**2
    return (-p.c2 * z2 * z2 + (k * k + p.c2 * (we2 + wm2)) * z2 - p.c2 * we2 * wm2) / z2


def theta(p: MediumParams, k: float, zeta, side):
    """Principal square root of Theta, for zeta off the real axis."""
    zeta = np.asarray(zeta, dtype=complex)
    if np.any(zeta.imag == 0):
        raise DomainError("theta needs Im zeta != 0; use theta_limit on the real axis")
    return np.sqrt(theta_squared(p, k, zeta, side))


def theta_limit(p: MediumParams, k: float, lam, side, zone: Zone | ZoneKind | str):
    """Limit of theta(lam + i eta) as eta -> 0+, for real ``lam`` in ``zone``.

    ``lam`` may be an array as long as every entry lies in the same zone.
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(lam == 0) or np.any(np.abs(lam) == p.omega_m):
        raise DomainError("theta_limit is undefined at lambda in {0, +-Omega_m}")
    kind = as_kind(zone)
    big_theta = theta_squared(p, k, lam, side).real
    r = np.sqrt(np.abs(big_theta)).astype(complex)
    s = np.sign(lam)
    if _side(side) is Side.MINUS:
        if kind in (ZoneKind.DI, ZoneKind.DE, ZoneKind.DD):
            return -1j * s * r
        return r
    if kind in (ZoneKind.EI, ZoneKind.DI):
        return 1j * s * r
    if kind is ZoneKind.DD:
        return -1j * s * r
    return r
