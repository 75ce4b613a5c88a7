"""Generalized eigenfunctions W_{k,lam,j} of the reduced operator.

The scalar profile w_{k,lam,j} is a normalized decaying solution psi of
the Sturm-Liouville equation (j = +-1) or the plasmon profile (j = 0).
On each side it has the form a e^{theta x} + b e^{-theta x}, so every
component and x-derivative is available in closed form.  The vector field
is obtained by the vectorizer

    E = w,  H = -i/(mu lam) curl_k w,  J = i eps0 Omega_e^2 / lam w,
    K = mu0 Omega_m^2 / (mu^+ lam^2) curl_k w,

with curl_k w = (i k w, -w').  J and K live on x > 0 only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dispersion import classify
from .errors import DomainError
from .fields import COMPONENTS, Layout, StateField1D
from .material import MediumParams, Side, mu_of, theta_limit
from .sturm import plasmon_amplitude
from .zones import MODE_INDICES, Zone, ZoneKind, as_kind


@dataclass(frozen=True)
class SideCoeffs:
    theta: np.ndarray
    a: np.ndarray
    b: np.ndarray
    mu: np.ndarray


@dataclass(frozen=True)
class ModeBatch:
    """Modes W_{k,lam,j} for an array of lam in one zone and one j."""

    p: MediumParams
    k: float
    lam: np.ndarray
    j: int
    minus: SideCoeffs
    plus: SideCoeffs

    def _side(self, side: int) -> SideCoeffs:
        return self.plus if side > 0 else self.minus

    def _exp_terms(self, x, side):
        """a e^{theta x} and b e^{-theta x}, shape (len(lam), len(x)) each (or None)."""
        c = self._side(side)
        x = np.asarray(x, dtype=float)
        th = c.theta[:, None]
        live_a, live_b = np.any(c.a != 0), np.any(c.b != 0)
        ea = eb = None
        with np.errstate(over="ignore", invalid="ignore"):
            if live_a:
                e = np.exp(th * x)
                ea = np.where(c.a[:, None] == 0, 0.0, c.a[:, None] * e)
                if live_b and np.all(np.abs(c.theta.real) * np.abs(x).max(initial=0.0) < 30):
                    eb = c.b[:, None] / e
            if live_b and eb is None:
                eb = np.where(c.b[:, None] == 0, 0.0, c.b[:, None] * np.exp(-th * x))
        return ea, eb, th

    def scalars(self, x, side: int, orders=(0, 1)) -> dict[int, np.ndarray]:
        """{order: d^order w / dx^order} sharing one exponential evaluation."""
        ea, eb, th = self._exp_terms(x, side)
        shape = (self.lam.size, np.size(x))
        even = (ea if ea is not None else 0) + (eb if eb is not None else 0)
        odd = (ea if ea is not None else 0) - (eb if eb is not None else 0)
        out = {}
        for order in orders:
            base = even if order % 2 == 0 else odd
            val = base if order == 0 else th**order * base
            out[order] = np.broadcast_to(val, shape) if np.isscalar(val) else val
        return out

    def scalar(self, x, side: int, order: int = 0):
        """d^order w / dx^order, shape (len(lam), len(x))."""
        return self.scalars(x, side, (order,))[order]

    def factors(self, side: int) -> dict[str, tuple[np.ndarray, int]]:
        """Per-component (multiplier, derivative order) of w."""
        p, lam, k = self.p, self.lam, self.k
        mu = self._side(side).mu
        f = {
            "E": (np.ones_like(lam, dtype=complex), 0),
            "Hx": (k / (mu * lam), 0),
            "Hy": (1j / (mu * lam), 1),
        }
        if side > 0:
            kk = p.mu0 * p.omega_m**2 / (self.plus.mu * lam**2)
            f["J"] = (1j * p.eps0 * p.omega_e**2 / lam + 0j, 0)
            f["Kx"] = (1j * k * kk, 0)
            f["Ky"] = (-kk, 1)
        return f

    def component(self, comp: str, x, side: int, dx_order: int = 0):
        """Component ``comp`` (or its x-derivative) at x on ``side``."""
        factors = self.factors(side)
        if comp not in factors:
            return np.zeros((self.lam.size, np.size(x)), dtype=complex)
        mult, order = factors[comp]
        return mult[:, None] * self.scalar(x, side, order + dx_order)


def _as_array(lam):
    return np.atleast_1d(np.asarray(lam, dtype=float))


def mode_batch(p: MediumParams, k: float, lam, j: int, zone: Zone | ZoneKind | None = None) -> ModeBatch:
    lam = _as_array(lam)
    if zone is None:
        zones = {classify(p, k, float(v)).kind for v in lam}
        if len(zones) != 1:
            raise DomainError("all lambda values in a batch must share a zone")
        kind = zones.pop()
    else:
        kind = as_kind(zone)
    if kind not in MODE_INDICES or j not in MODE_INDICES[kind]:
        raise DomainError(f"mode index j={j} is not admissible in zone {kind.value}")
    tm = theta_limit(p, k, lam, Side.MINUS, kind)
    tp = theta_limit(p, k, lam, Side.PLUS, kind)
    mm = mu_of(p, lam, Side.MINUS)
    mp = mu_of(p, lam, Side.PLUS)
    zero = np.zeros_like(lam, dtype=complex)
    if j == 0:
        amp = np.array([plasmon_amplitude(p, k, float(v), float(t.real)) for v, t in zip(lam, tp)])
        amp = amp.astype(complex)
        return ModeBatch(
            p, k, lam, 0, SideCoeffs(tm.real + 0j, amp, zero, mm), SideCoeffs(tp.real + 0j, zero, amp, mp)
        )
    rm, rp = tm / mm, tp / mp
    wr = np.abs(rm + rp)
    if j == -1:
        norm = np.sqrt(np.abs(lam * rp) / math.pi) / wr
        r = rm / rp
        minus = SideCoeffs(tm, norm + 0j, zero, mm)
        plus = SideCoeffs(tp, 0.5 * norm * (1 + r), 0.5 * norm * (1 - r), mp)
    else:
        norm = np.sqrt(np.abs(lam * rm) / math.pi) / wr
        r = rp / rm
        minus = SideCoeffs(tm, 0.5 * norm * (1 - r), 0.5 * norm * (1 + r), mm)
        plus = SideCoeffs(tp, zero, norm + 0j, mp)
    return ModeBatch(p, k, lam, j, minus, plus)


class ModeField:
    """A single generalized eigenfunction, evaluable anywhere."""

    def __init__(self, p: MediumParams, k: float, lam: float, j: int, zone=None):
        if lam == 0 or abs(lam) == p.omega_m:
            raise DomainError("lambda must avoid {0, +-Omega_m}")
        self.p, self.k, self.lam, self.j = p, k, float(lam), j
        self.zone = classify(p, k, lam) if zone is None else zone
        self.batch = mode_batch(p, k, [lam], j, self.zone)

    @staticmethod
    def _sides(x, side):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if side is None:
            return x, np.where(x >= 0, 1, -1)
        return x, np.full(x.shape, side)

    def scalar(self, x, side: int | None = None, order: int = 0):
        x, sides = self._sides(x, side)
        out = np.empty(x.shape, dtype=complex)
        for s in (-1, 1):
            m = sides == s
            if m.any():
                out[m] = self.batch.scalar(x[m], s, order)[0]
        return out

    def component(self, comp: str, x, side: int | None = None, dx_order: int = 0):
        x, sides = self._sides(x, side)
        out = np.zeros(x.shape, dtype=complex)
        for s in (-1, 1):
            m = sides == s
            if m.any():
                out[m] = self.batch.component(comp, x[m], s, dx_order)[0]
        return out

    def __call__(self, x, side: int | None = None) -> dict[str, np.ndarray]:
        return {c: self.component(c, x, side) for c in COMPONENTS}

    def sample(self, layout: Layout) -> StateField1D:
        return StateField1D.from_function(layout, lambda c, x, s: self.component(c, x, s))

    def eigen_residual(self, x, side: int) -> dict[str, np.ndarray]:
        """(A_k - lam) W evaluated with exact derivatives on an open half-line."""
        p, k, lam = self.p, self.k, self.lam
        u = self(x, side)
        dhy = self.component("Hy", x, side, 1)
        de = self.component("E", x, side, 1)
        plus = side > 0
        zero = np.zeros_like(u["E"])
        jj, kx, ky = (u["J"], u["Kx"], u["Ky"]) if plus else (zero, zero, zero)
        au = {
            "E": 1j / p.eps0 * (dhy - 1j * k * u["Hx"] - jj),
            "Hx": -1j / p.mu0 * (1j * k * u["E"] + kx),
            "Hy": -1j / p.mu0 * (-de + ky),
        }
        if plus:
            au["J"] = 1j * p.eps0 * p.omega_e**2 * u["E"]
            au["Kx"] = 1j * p.mu0 * p.omega_m**2 * u["Hx"]
            au["Ky"] = 1j * p.mu0 * p.omega_m**2 * u["Hy"]
        return {c: au[c] - lam * u[c] for c in au}


def mode_scalar(p: MediumParams, k: float, lam: float, j: int, x, zone=None):
    return ModeField(p, k, lam, j, zone).scalar(x)


def mode_field(p: MediumParams, k: float, lam: float, j: int, zone=None) -> ModeField:
    return ModeField(p, k, lam, j, zone)


def mode_field_2d(p: MediumParams, k: float, lam: float, j: int, x, y, zone=None) -> dict[str, np.ndarray]:
    """Components of W(x) e^{i k y} / sqrt(2 pi) on the broadcast of (x, y)."""
    mode = ModeField(p, k, lam, j, zone)
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    phase = np.exp(1j * k * y) / math.sqrt(2 * math.pi)
    return {c: mode.component(c, x.ravel()).reshape(x.shape) * phase for c in COMPONENTS}
