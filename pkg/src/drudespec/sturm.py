"""Sturm-Liouville layer of the reduced problem.

Eliminating everything but E from (A_k - zeta) U = F gives

    -(E' / mu)' + (Theta / mu) E = S F,

with piecewise constant mu and Theta.  Its Green function is built from
the two solutions psi_{-1}, psi_{+1} that decay at -inf and +inf:

    g(x, x') = psi_{-1}(min(x, x')) psi_{+1}(max(x, x')) / W,
    W = theta^- / mu^- + theta^+ / mu^+.

On the real axis theta is replaced by its one-sided limit, so every
function here accepts either an off-axis ``zeta`` or a real ``lam`` with
a zone.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dispersion import classify, cut_curves
from .errors import DomainError, SingularityError
from .fields import StateField1D, derivative, end_corrected_weights, kernel_cumulative
from .material import MediumParams, Side, mu_of, theta, theta_limit, theta_squared
from .zones import MODE_INDICES, OPEN_ZONES, Zone, ZoneKind

_SERIES_TERMS = 8
_SERIES_SWITCH = 1e-3


@dataclass(frozen=True)
class InterfaceData:
    """theta and mu on both sides at one spectral parameter."""

    theta_minus: complex
    theta_plus: complex
    mu_minus: complex
    mu_plus: complex

    @property
    def ratio_minus(self):
        return self.theta_minus / self.mu_minus

    @property
    def ratio_plus(self):
        return self.theta_plus / self.mu_plus

    @property
    def wronskian(self):
        return self.ratio_minus + self.ratio_plus


def interface_data(p: MediumParams, k: float, zeta, zone: Zone | ZoneKind | None = None) -> InterfaceData:
    """theta^{+-} and mu^{+-}; real ``zeta`` uses the one-sided limits."""
    zeta = complex(zeta)
    if zeta == 0:
        raise DomainError("zeta = 0 is excluded")
    if zeta.imag == 0:
        lam = zeta.real
        if zone is None:
            zone = classify(p, k, lam)
        tm = complex(theta_limit(p, k, lam, Side.MINUS, zone))
        tp = complex(theta_limit(p, k, lam, Side.PLUS, zone))
        z = lam
    else:
        tm = complex(theta(p, k, zeta, Side.MINUS))
        tp = complex(theta(p, k, zeta, Side.PLUS))
        z = zeta
    return InterfaceData(tm, tp, complex(mu_of(p, z, Side.MINUS)), complex(mu_of(p, z, Side.PLUS)))


def basis_cs(p: MediumParams, k: float, zeta, x):
    """c = cosh(theta x), s = mu sinh(theta x) / theta on the side of x."""
    x = np.asarray(x, dtype=float)
    zeta = complex(zeta)
    if zeta == 0:
        raise DomainError("zeta = 0 is excluded")
    side_plus = x >= 0
    big_theta = np.where(
        side_plus, theta_squared(p, k, zeta, Side.PLUS), theta_squared(p, k, zeta, Side.MINUS)
    )
    mu = np.where(side_plus, mu_of(p, zeta, Side.PLUS), mu_of(p, zeta, Side.MINUS))
    th = np.sqrt(big_theta)
    z = th * x
    small = np.abs(z) < _SERIES_SWITCH
    # even series in Theta x^2; both c and s/(mu x) are entire in Theta
    q = big_theta * x * x
    c_ser = np.zeros_like(q)
    s_ser = np.zeros_like(q)
    term_c = np.ones_like(q)
    term_s = np.ones_like(q)
    for n in range(_SERIES_TERMS):
        c_ser = c_ser + term_c
        s_ser = s_ser + term_s
        term_c = term_c * q / ((2 * n + 1) * (2 * n + 2))
        term_s = term_s * q / ((2 * n + 2) * (2 * n + 3))
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        c = np.where(small, c_ser, np.cosh(z))
        s = np.where(small, mu * x * s_ser, mu * np.sinh(z) / np.where(small, 1.0, th))
    return c, s


@dataclass(frozen=True)
class PsiSolution:
    """psi_{k,zeta,branch} in piecewise exponential form.

    For branch -1:  exp(theta^- x) on x < 0,
                    A exp(theta^+ x) + B exp(-theta^+ x) on x > 0.
    For branch +1:  A exp(-theta^- x) + B exp(theta^- x) on x < 0,
                    exp(-theta^+ x) on x > 0.
    """

    branch: int
    theta_minus: complex
    theta_plus: complex
    a_coef: complex
    b_coef: complex

    def _pieces(self, x):
        """Coefficients (a, b, th) with psi = a e^{th x} + b e^{-th x} per node."""
        plus = x >= 0
        if self.branch == -1:
            a = np.where(plus, self.a_coef, 1.0)
            b = np.where(plus, self.b_coef, 0.0)
        else:
            a = np.where(plus, 0.0, self.b_coef)
            b = np.where(plus, 1.0, self.a_coef)
        th = np.where(plus, self.theta_plus, self.theta_minus)
        return a, b, th

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        a, b, th = self._pieces(x)
        return _expsum(a, b, th, x)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        a, b, th = self._pieces(x)
        return th * _expsum(a, -b, th, x)


def _expsum(a, b, th, x):
    with np.errstate(over="ignore", invalid="ignore"):
        ea = np.where(a == 0, 0.0, a * np.exp(th * x))
        eb = np.where(b == 0, 0.0, b * np.exp(-th * x))
    return ea + eb


def psi_solution(p: MediumParams, k: float, zeta, branch: int, zone=None) -> PsiSolution:
    if branch not in (-1, 1):
        raise DomainError("branch must be -1 or +1")
    d = interface_data(p, k, zeta, zone)
    if branch == -1:
        r = d.ratio_minus / d.ratio_plus
    else:
        r = d.ratio_plus / d.ratio_minus
    return PsiSolution(branch, d.theta_minus, d.theta_plus, 0.5 * (1 + r), 0.5 * (1 - r))


def psi(p: MediumParams, k: float, zeta, branch: int, x, zone=None):
    return psi_solution(p, k, zeta, branch, zone)(x)


def wronskian(p: MediumParams, k: float, zeta, zone=None) -> complex:
    zeta = complex(zeta)
    if zeta.imag == 0 and abs(zeta.real) == p.omega_m:
        raise DomainError("the Wronskian is singular at +-Omega_m")
    return interface_data(p, k, zeta, zone).wronskian


@dataclass(frozen=True)
class GreenEval:
    value: complex
    wronskian: complex


class GreenFunction:
    """g_{k,zeta} as a reusable object (keeps psi and W)."""

    def __init__(self, p: MediumParams, k: float, zeta, zone=None):
        self.psi_m = psi_solution(p, k, zeta, -1, zone)
        self.psi_p = psi_solution(p, k, zeta, 1, zone)
        self.w = interface_data(p, k, zeta, zone).wronskian
        if abs(self.w) < 1e-300:
            raise SingularityError("Wronskian vanishes")

    def __call__(self, x, xp):
        x, xp = np.broadcast_arrays(np.asarray(x, float), np.asarray(xp, float))
        lo, hi = np.minimum(x, xp), np.maximum(x, xp)
        return self.psi_m(lo) * self.psi_p(hi) / self.w


def green(p: MediumParams, k: float, zeta, x, xp, zone=None) -> GreenEval:
    zeta = complex(zeta)
    if zeta.imag == 0 and zone is None:
        raise DomainError("green needs Im zeta != 0 (or an explicit zone on the real axis)")
    g = GreenFunction(p, k, zeta, zone)
    val = g(x, xp)
    return GreenEval(val if np.ndim(val) else complex(val), g.w)


# --- operators acting on sampled states -----------------------------------


def _check_zeta(p: MediumParams, zeta):
    zeta = complex(zeta)
    if zeta == 0 or (zeta.imag == 0 and abs(zeta.real) == p.omega_m):
        raise DomainError("zeta must avoid {0, +-Omega_m}")
    return zeta


def _require_collocated(f: StateField1D):
    if f.layout.kind != "collocated":
        raise ValueError("this operation needs a collocated layout")


def scalarize(p: MediumParams, k: float, zeta, f: StateField1D) -> dict[int, np.ndarray]:
    """S_{k,zeta} F on each half-line, returned as {-1: values on [-L,0], +1: on [0,L]}.

    The x-derivatives in curl_k are sixth-order finite differences taken
    separately on each side.
    """
    zeta = _check_zeta(p, zeta)
    _require_collocated(f)
    h = f.layout.h
    out = {}
    for side in (-1, 1):
        mu = complex(mu_of(p, zeta, Side(side)))
        hx, hy = f.block("Hx", side), f.block("Hy", side)
        s = p.eps0 * f.block("E", side) + 1j * p.mu0 / zeta * (derivative(hy / mu, h) - 1j * k * hx / mu)
        if side == 1:
            kx, ky = f.block("Kx", 1), f.block("Ky", 1)
            s = s - 1j / zeta * f.block("J", 1)
            s = s + (derivative(ky / mu, h) - 1j * k * kx / mu) / zeta**2
        out[side] = s
    return out


def interface_jump(p: MediumParams, k: float, zeta, f: StateField1D) -> complex:
    """Weight c of the c delta(x) part of S_{k,zeta} F.

    Hy/mu and Ky/mu jump at x = 0 because mu does, so the x-derivative in
    S carries a point mass there that the one-sided differences miss.
    """
    zeta = _check_zeta(p, zeta)
    mu_m = complex(mu_of(p, zeta, Side.MINUS))
    mu_p = complex(mu_of(p, zeta, Side.PLUS))
    hy_m, hy_p = f.block("Hy", -1)[-1], f.block("Hy", 1)[0]
    jump = 1j * p.mu0 / zeta * (hy_p / mu_p - hy_m / mu_m)
    return complex(jump + f.block("Ky", 1)[0] / (mu_p * zeta**2))


def t_apply(p: MediumParams, k: float, zeta, f: StateField1D) -> StateField1D:
    """Componentwise part T_{k,zeta} of the resolvent."""
    zeta = _check_zeta(p, zeta)
    out = StateField1D(f.layout)
    wm2 = p.omega_m**2
    mu_p = complex(mu_of(p, zeta, Side.PLUS))
    for side in (-1, 1):
        mu = complex(mu_of(p, zeta, Side(side)))
        for c in ("Hx", "Hy"):
            val = -p.mu0 / (mu * zeta) * f.block(c, side)
            if side == 1:
                val = val + 1j / (mu * zeta**2) * f.block("K" + c[1], 1)
            out.set_block(c, side, val)
    out.set_block("J", 1, -f.block("J", 1) / zeta)
    for c in ("x", "y"):
        val = -1j * p.mu0**2 * wm2 / (mu_p * zeta**2) * f.block("H" + c, 1) - p.mu0 / (mu_p * zeta) * f.block(
            "K" + c, 1
        )
        out.set_block("K" + c, 1, val)
    return out


def _support(values: dict[int, np.ndarray], tol: float = 0.0) -> tuple[int, int]:
    """Index window (per side, counted from x = 0) outside which values vanish."""
    res = []
    for side in (-1, 1):
        v = np.abs(values[side])
        thresh = tol * max(np.abs(values[-1]).max(), np.abs(values[1]).max(), 1e-300)
        nz = np.nonzero(v > thresh)[0]
        if side == -1:
            # minus arrays run from -L to 0; count from the interface
            res.append(v.size - nz.min() if nz.size else 1)
        else:
            res.append(nz.max() + 1 if nz.size else 1)
    return res[0], res[1]


def resolvent_quadform(p: MediumParams, k: float, zeta, u: StateField1D) -> complex:
    """(R_k(zeta) U, U) = (T U, U) + int int zeta g S_zeta U conj(S_conj(zeta) U)."""
    zeta = _check_zeta(p, zeta)
    if zeta.imag == 0:
        raise DomainError("resolvent_quadform needs Im zeta != 0")
    _require_collocated(u)
    h = u.layout.h
    t_part = t_apply(p, k, zeta, u).inner(u, p)
    su = scalarize(p, k, zeta, u)
    sv = scalarize(p, k, zeta.conjugate(), u)
    n = u.layout.n
    nm, np_ = _support({s: np.abs(su[s]) + np.abs(sv[s]) for s in (-1, 1)}, 1e-17)
    # keep at least a full stencil on each side
    nm, np_ = min(max(nm + 6, 12), n + 1), min(max(np_ + 6, 12), n + 1)
    xm = u.layout.blocks[0].x[-nm:]
    xp = np.linspace(0.0, np_ - 1, np_) * h
    g = GreenFunction(p, k, zeta)
    um, up = su[-1][-nm:], su[1][:np_]
    vm, vp = np.conj(sv[-1][-nm:]), np.conj(sv[1][:np_])
    # A(x') = int_{x < x'} psi_-(x) u(x) dx,  B(x') = int_{x > x'} psi_+(x) u(x) dx
    a_m = kernel_cumulative(g.psi_m(xm) * um, h)
    a_p = a_m[-1] + kernel_cumulative(g.psi_m(xp) * up, h)
    b_p_rev = kernel_cumulative((g.psi_p(xp) * up)[::-1], h)[::-1]
    b_m_rev = b_p_rev[0] + kernel_cumulative((g.psi_p(xm) * um)[::-1], h)[::-1]
    wm, wp = end_corrected_weights(nm, h), end_corrected_weights(np_, h)
    inner_m = g.psi_p(xm) * a_m + g.psi_m(xm) * b_m_rev
    inner_p = g.psi_p(xp) * a_p + g.psi_m(xp) * b_p_rev
    double = wm @ (vm * inner_m) + wp @ (vp * inner_p)
    # interface point masses of S U and S_conj U
    cu = interface_jump(p, k, zeta, u)
    cv = np.conj(interface_jump(p, k, zeta.conjugate(), u))
    pm0, pp0 = g.psi_m(0.0), g.psi_p(0.0)
    g_v = pp0 * (wm @ (vm * g.psi_m(xm))) + pm0 * (wp @ (vp * g.psi_p(xp)))
    g_u = pp0 * (wm @ (um * g.psi_m(xm))) + pm0 * (wp @ (up * g.psi_p(xp)))
    double += cu * g_v + cv * g_u + cu * cv * pm0 * pp0
    out = complex(t_part + zeta * double / g.w)
    if not cmath.isfinite(out):
        raise SingularityError(
            f"exp(Re theta |x|) overflows over the support of U at zeta={zeta}; move zeta away from 0 and from infinity"
        )
    return out


def green_imag_limit(p: MediumParams, k: float, lam: float, x, xp, zone=None):
    """(1/pi) Im(lam g_{k,lam}(x, x')) from the one-sided limits."""
    if zone is None:
        zone = classify(p, k, lam)
    if zone.kind not in OPEN_ZONES:
        raise DomainError(f"green_imag_limit needs an open zone, got {zone}")
    g = GreenFunction(p, k, lam, zone)
    return np.imag(lam * g(x, xp)) / math.pi


def plasmon_residue(p: MediumParams, k: float, lam: float) -> Callable[[np.ndarray], np.ndarray]:
    """The real profile w_{k,lam,0} on the plasmon curve."""
    zone = classify(p, k, lam)
    if zone.kind is not ZoneKind.EE:
        raise DomainError(f"(k, lambda) = ({k}, {lam}) is not on the plasmon curve")
    tm = float(np.real(theta_limit(p, k, lam, Side.MINUS, zone)))
    tp = float(np.real(theta_limit(p, k, lam, Side.PLUS, zone)))
    amp = plasmon_amplitude(p, k, lam, tp)

    def w0(x):
        x = np.asarray(x, dtype=float)
        return amp * np.exp(-np.where(x >= 0, tp, tm) * np.abs(x))

    w0.theta_minus, w0.theta_plus, w0.amplitude = tm, tp, amp
    return w0


def plasmon_amplitude(p: MediumParams, k: float, lam: float, theta_plus: float) -> float:
    mu_p = float(np.real(mu_of(p, lam, Side.PLUS)))
    big = (4 * k**4 + (p.c2 * (p.omega_e**2 - p.omega_m**2)) ** 2) ** 0.25
    return lam**2 * math.sqrt(abs(mu_p * theta_plus)) / (p.omega_m * big)


def critical_point(p: MediumParams) -> tuple[float, float]:
    cc = cut_curves(p)
    return cc.kc, cc.lambdac


__all__ = [
    "GreenEval",
    "GreenFunction",
    "InterfaceData",
    "MODE_INDICES",
    "PsiSolution",
    "basis_cs",
    "green",
    "green_imag_limit",
    "interface_data",
    "plasmon_residue",
    "psi",
    "psi_solution",
    "resolvent_quadform",
    "scalarize",
    "interface_jump",
    "t_apply",
    "wronskian",
]
