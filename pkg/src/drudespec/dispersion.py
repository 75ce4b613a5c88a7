"""Dispersion curves, the plasmon curve and zone classification.

All curves are closed form.  With c2 = eps0 mu0,

    lambda_0(k)   = |k| / sqrt(c2)                       (light line)
    lambda_D,I(k) = sqrt(a +- sqrt(b))                   (zeros of Theta^+)
    lambda_E(k)   = zero of the Wronskian, |k| >= k_c    (plasmon)

and lambda_I lambda_D = Omega_e Omega_m.  The critical point where the
light line crosses lambda_I is (k_c, lambda_c).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .material import MediumParams, Side, theta_squared
from .zones import MODE_INDICES, OPEN_ZONES, Zone, ZoneKind

__all__ = [
    "CutCurves",
    "Wave",
    "Zone",
    "ZoneKind",
    "MODE_INDICES",
    "classify",
    "cut_curves",
    "default_tol",
    "q_polynomial",
    "wave_taxonomy",
]


@dataclass(frozen=True)
class CutCurves:
    p: MediumParams

    @property
    def lambdac(self) -> float:
        we, wm = self.p.omega_e, self.p.omega_m
        return we * wm / math.hypot(we, wm)

    @property
    def kc(self) -> float:
        return math.sqrt(self.p.c2) * self.lambdac

    def lambda0(self, k):
        return np.abs(k) / math.sqrt(self.p.c2)

    def _radicals(self, k):
        p = self.p
        u = np.asarray(k, dtype=float) ** 2 / (2 * p.c2)
        a = u + (p.omega_e**2 + p.omega_m**2) / 2
        b = (u + (p.omega_e**2 - p.omega_m**2) / 2) ** 2 + 2 * u * p.omega_m**2
        return a, np.sqrt(b)

    def lambdaD(self, k):
        a, rb = self._radicals(k)
        return np.sqrt(a + rb)

    def lambdaI(self, k):
        # a - sqrt(b) rationalized: (a^2 - b) = Omega_e^2 Omega_m^2
        a, rb = self._radicals(k)
        return self.p.omega_e * self.p.omega_m / np.sqrt(a + rb)

    def lambdaE(self, k):
        k = np.asarray(k, dtype=float)
        if np.any(np.abs(k) < self.kc * (1 - 1e-14)):
            raise DomainError("lambda_E is defined only for |k| >= k_c")
        big_k = self.p.big_k
        k2 = k * k
        # Omega_m^2 (1/2 + k^2/K - sgn K sqrt(1/4 + k^4/K^2)) without cancellation;
        # reduces to Omega_m^2 / 2 when K = 0
        x = self.p.omega_m**2 * (0.5 - big_k / (4 * k2 + 2 * np.sqrt(4 * k2 * k2 + big_k**2)))
        return np.sqrt(x)


def cut_curves(p: MediumParams) -> CutCurves:
    return CutCurves(p)


def q_polynomial(p: MediumParams, k, x):
    """Q_k(X) = K X^2 - Omega_m^2 (2k^2 + K) X + k^2 Omega_m^4."""
    big_k, wm2 = p.big_k, p.omega_m**2
    k2 = np.asarray(k, dtype=float) ** 2
    return big_k * x * x - wm2 * (2 * k2 + big_k) * x + k2 * wm2 * wm2


def default_tol(lam) -> float:
    return 1e-9 * (1 + abs(lam))


def classify(p: MediumParams, k: float, lam: float, tol: float | None = None) -> Zone:
    """Zone of the point (k, lam)."""
    if tol is None:
        tol = default_tol(lam)
    if tol < 0:
        raise DomainError("tol must be non-negative")
    cc = CutCurves(p)
    a, ak = abs(float(lam)), abs(float(k))
    sign = "+" if lam > 0 else "-"
    if a <= tol:
        return Zone(ZoneKind.POINT, "0")
    if abs(a - p.omega_m) <= tol:
        if ak <= tol and p.omega_e == p.omega_m:
            return Zone(ZoneKind.BOUNDARY, "touching")
        return Zone(ZoneKind.POINT, sign + "Omega_m")
    kc, lc = cc.kc, cc.lambdac
    if abs(ak - kc) <= tol and abs(a - lc) <= tol:
        return Zone(ZoneKind.BOUNDARY, "critical")
    if ak > kc and abs(a - float(cc.lambdaE(ak))) <= tol:
        return Zone(ZoneKind.EE)
    l0, ld, li = float(cc.lambda0(ak)), float(cc.lambdaD(ak)), float(cc.lambdaI(ak))
    for name, curve in (("lambda0", l0), ("lambdaD", ld), ("lambdaI", li)):
        if abs(a - curve) <= tol:
            return Zone(ZoneKind.BOUNDARY, name)
    if a > ld:
        return Zone(ZoneKind.DD)
    if max(l0, li) < a < ld:
        return Zone(ZoneKind.DE)
    if ak < kc and l0 < a < li:
        return Zone(ZoneKind.DI)
    if a < min(l0, li):
        return Zone(ZoneKind.EI)
    return Zone(ZoneKind.GAP)


class Wave(enum.Enum):
    DIRECT = "Direct"
    INVERSE = "Inverse"
    EVANESCENT = "Evanescent"


def phase_group_product(p: MediumParams, k: float, lam: float, side) -> float:
    """v_phi * v_g = -2 lam / (d Theta / d lam) on the given side."""
    if Side(side) is Side.MINUS:
        return 1.0 / p.c2
    # Theta^+ = k^2 - c2 (lam^2 - (We^2 + Wm^2) + We^2 Wm^2 / lam^2)
    ww = (p.omega_e * p.omega_m) ** 2
    dtheta = -2 * p.c2 * (lam - ww / lam**3)
    return -2 * lam / dtheta


def wave_taxonomy(p: MediumParams, k: float, lam: float, side) -> Wave:
    zone = classify(p, k, lam)
    if zone.kind not in OPEN_ZONES | {ZoneKind.EE}:
        raise DomainError(f"wave type undefined on {zone}")
    if theta_squared(p, k, lam, side).real > 0:
        return Wave.EVANESCENT
    return Wave.DIRECT if phase_group_product(p, k, lam, side) > 0 else Wave.INVERSE
