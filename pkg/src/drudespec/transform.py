"""Generalized Fourier transform F_k, its adjoint and the div-free projection.

F_k U(lam, j) = (U, W_{k,lam,j}) is evaluated by x-quadrature against the
closed-form modes.  The lam-integrals of the spectral side use composite
Gauss-Legendre panels on each zone interval.  Next to a dispersion curve
the mode normalization behaves like a power of sqrt(lam - edge), so such
ends are mapped by lam = edge +- u^2, which makes the integrand smooth in u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import exp1
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .dispersion import classify, cut_curves
from .errors import DomainError
from .fields import (
    Layout,
    StateField1D,
    exp_quadrature,
    kernel_cumulative,
    physical_weights,
)
from .material import MediumParams, theta_limit
from .modes import ModeField, mode_batch
from .zones import MODE_INDICES, ZoneKind

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}
_CHUNK = 4_000_000  # complex entries per mode-evaluation chunk


def _gauss(n: int):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


@dataclass(frozen=True)
class Segment:
    """One zone interval [a, b] with quadrature nodes (all of one sign)."""

    zone: ZoneKind
    a: float
    b: float
    lam: np.ndarray
    weights: np.ndarray

    @property
    def modes(self) -> tuple[int, ...]:
        return MODE_INDICES[self.zone]


@dataclass(frozen=True)
class SpectralGrid:
    p: MediumParams
    k: float
    segments: tuple[Segment, ...]
    point_masses: tuple[float, ...]
    delta: float
    lambda_lo: float
    lambda_max: float
    panel_width: float
    nodes: int
    x_extent: float = 20.0
    t_max: float = 0.0

    @property
    def size(self) -> int:
        return sum(s.lam.size for s in self.segments)


@dataclass(frozen=True)
class _Piece:
    """A sub-interval with its smoothing substitution lam = lam(u).

    ``plain``: lam = u.  ``edge``: lam = origin + direction u^2, for ends on
    a dispersion curve, where modes behave like powers of sqrt(lam - edge).
    ``recip``: lam = 1/u near lam = 0, where theta^+ ~ 1/lam makes the
    modes plane waves in u.
    """

    kind: str
    u0: float
    u1: float
    origin: float = 0.0
    direction: int = 1

    def lam(self, u):
        if self.kind == "edge":
            return self.origin + self.direction * u * u
        if self.kind == "recip":
            return 1.0 / u
        return u

    def jac(self, u):
        if self.kind == "edge":
            return 2 * u
        if self.kind == "recip":
            return 1.0 / (u * u)
        return np.ones_like(u)


def _pieces(a, b, sing_a, sing_b, lam_s=None):
    if lam_s is not None and a + 0.5 * (b - a) > lam_s > a:
        return [_Piece("recip", 1.0 / lam_s, 1.0 / a)] + _pieces(lam_s, b, False, sing_b)
    if sing_a and sing_b:
        m = 0.5 * (a + b)
        return [_Piece("edge", 0.0, math.sqrt(m - a), a, 1), _Piece("edge", 0.0, math.sqrt(b - m), b, -1)]
    span = min(1.0, 0.5 * (b - a))
    if sing_a:
        return [_Piece("edge", 0.0, math.sqrt(span), a, 1)] + ([_Piece("plain", a + span, b)] if b - a > span else [])
    if sing_b:
        return ([_Piece("plain", a, b - span)] if b - a > span else []) + [_Piece("edge", 0.0, math.sqrt(span), b, -1)]
    return [_Piece("plain", a, b)]


def _panel_rule(p, k, zone, pieces, panel_width, nodes, x_extent, t_max):
    """Composite Gauss-Legendre on the pieces, refined until the phase of
    the modes (and of exp(-i lam t_max)) moves by at most ~1 radian per node."""
    limit = float(nodes)
    gx, gw = _gauss(nodes)
    lam_all, w_all = [], []
    for pc in pieces:
        if pc.kind == "recip":
            n0 = 1
        elif pc.kind == "edge":
            n0 = math.ceil(2 * pc.u1 * pc.u1 / panel_width)
        else:
            n0 = math.ceil((pc.u1 - pc.u0) / panel_width)
        edges = np.linspace(pc.u0, pc.u1, max(1, n0) + 1)
        for _ in range(6):
            lam = pc.lam(edges)
            phase = t_max * np.abs(np.diff(lam))
            for side in (-1, 1):
                th = theta_limit(p, k, lam, side, zone)
                phase = np.maximum(phase, x_extent * np.abs(np.diff(th)) + t_max * np.abs(np.diff(lam)))
            split = np.where(phase > 1.25 * limit, np.ceil(phase / limit), 1).astype(int)
            if np.all(split <= 1):
                break
            new = [edges[:1]]
            for e0, e1, m in zip(edges[:-1], edges[1:], split):
                new.append(np.linspace(e0, e1, max(m, 1) + 1)[1:])
            edges = np.concatenate(new)
        mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
        half = 0.5 * (edges[1:] - edges[:-1])[:, None]
        u = (mid + half * gx).ravel()
        wu = (half * gw).ravel()
        lam_all.append(pc.lam(u))
        w_all.append(wu * pc.jac(u))
    lam = np.concatenate(lam_all)
    w = np.concatenate(w_all)
    order = np.argsort(lam)
    return lam[order], w[order]


def _zone_intervals(p: MediumParams, k: float, lo: float, hi: float, delta: float, window=None):
    """Positive-lambda zone intervals (a, b, sing_a, sing_b, zone) inside [lo, hi]."""
    cc = cut_curves(p)
    kc, lc = cc.kc, cc.lambdac
    curves = [float(cc.lambda0(k)), float(cc.lambdaI(k)), float(cc.lambdaD(k))]
    # (position, singular, excluded)
    marks = [(c, True, False) for c in curves]
    marks.append((p.omega_m, False, True))
    if abs(abs(k) - kc) <= 1e-9 * (1 + kc):
        marks.append((lc, True, True))
    cuts = sorted({m[0] for m in marks if lo < m[0] < hi} | {lo, hi})
    info = {}
    for pos, sing, excl in marks:
        s, e = info.get(pos, (False, False))
        info[pos] = (s or sing, e or excl)
    out = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        sa, ea = info.get(a, (False, False))
        sb, eb = info.get(b, (False, False))
        if ea:
            a = a + delta
        if eb:
            b = b - delta
        if window is not None:
            if b <= window[0] or a >= window[1]:
                continue
            if a < window[0]:
                a, sa = window[0], False
            if b > window[1]:
                b, sb = window[1], False
        if b - a <= 1e-13 * (1 + b):
            continue
        zone = classify(p, k, 0.5 * (a + b), tol=0.0).kind
        if zone in MODE_INDICES and zone is not ZoneKind.EE:
            out.append((a, b, sa, sb, zone))
    return out


def spectral_grid(
    p: MediumParams,
    k: float,
    *,
    delta: float | None = None,
    lambda_min: float | None = None,
    lambda_max: float | None = None,
    x_spacing: float | None = None,
    x_extent: float = 20.0,
    t_max: float = 0.0,
    panel_width: float = 0.25,
    nodes: int = 16,
    window: tuple[float, float] | None = None,
) -> SpectralGrid:
    """Quadrature grid on the spectral side at wavenumber ``k``.

    ``delta`` is the half-width of the gaps cut around +-Omega_m (and the
    critical point); ``lambda_min`` is the cut around lam = 0, where the
    reciprocal panels make the node count grow like 1/lambda_min.
    ``x_extent`` is the largest |x| at which
    synthesized fields must be free of aliasing and ``t_max`` the longest
    time the coefficients will be propagated; ``x_spacing`` (the x-grid
    the modes will be paired with) caps ``lambda_max`` where the light-like
    modes stop being resolved.
    """
    cc = cut_curves(p)
    if delta is None:
        delta = 1e-6 * p.omega_m
    if lambda_min is None:
        lambda_min = 5e-3 * min(p.omega_e, p.omega_m)
    if delta <= 0 or lambda_min <= 0:
        raise DomainError("delta and lambda_min must be positive")
    lo = max(delta, lambda_min)
    if lambda_max is None:
        lambda_max = float(cc.lambdaD(k)) + 16 * max(p.omega_e, p.omega_m) / math.sqrt(p.c2)
        if x_spacing is not None:
            lambda_max = min(lambda_max, 0.5 / (x_spacing * math.sqrt(p.c2)))
    lam_s = 0.25 * min(p.omega_e, p.omega_m)

    def rule(a, b, s_a, s_b, zone):
        pieces = _pieces(a, b, s_a, s_b, lam_s if a == lo else None)
        return _panel_rule(p, k, zone, pieces, panel_width, nodes, x_extent, t_max)

    segments = []
    if window is not None:
        wa, wb = window
        if wa >= wb:
            raise DomainError("empty window")
        for sign in (1, -1):
            sa, sb = sorted((sign * wa, sign * wb))
            if sb <= 0:
                continue
            pos_window = (max(sa, lo), sb)
            for a, b, s_a, s_b, zone in _zone_intervals(p, k, lo, max(lambda_max, sb), delta, pos_window):
                lam, w = rule(a, b, s_a, s_b, zone)
                if sign > 0:
                    segments.append(Segment(zone, a, b, lam, w))
                else:
                    segments.append(Segment(zone, -b, -a, -lam[::-1], w[::-1]))
    else:
        for a, b, s_a, s_b, zone in _zone_intervals(p, k, lo, lambda_max, delta):
            lam, w = rule(a, b, s_a, s_b, zone)
            segments.append(Segment(zone, a, b, lam, w))
        segments = [Segment(s.zone, -s.b, -s.a, -s.lam[::-1], s.weights[::-1]) for s in segments[::-1]] + segments
    masses = ()
    if abs(k) > cc.kc * (1 + 1e-12):
        le = float(cc.lambdaE(k))
        masses = tuple(v for v in (-le, le) if window is None or window[0] <= v <= window[1])
    return SpectralGrid(p, k, tuple(segments), masses, delta, lo, lambda_max, panel_width, nodes, x_extent, t_max)


def _zero_edge_node(grid: SpectralGrid, seg: Segment) -> int | None:
    """Index of the node next to the lam = 0 cut if ``seg`` touches it."""
    if seg.a == grid.lambda_lo:
        return 0
    if seg.b == -grid.lambda_lo:
        return seg.lam.size - 1
    return None


@dataclass
class SpectralCoeffs:
    """Coefficients U^(lam, j) on a spectral grid plus plasmon point masses."""

    grid: SpectralGrid
    values: list[dict[int, np.ndarray]]
    point_mass: dict[float, complex] = field(default_factory=dict)

    @classmethod
    def zeros(cls, grid: SpectralGrid) -> SpectralCoeffs:
        vals = [{j: np.zeros(s.lam.size, dtype=complex) for j in s.modes} for s in grid.segments]
        return cls(grid, vals, {lam: 0j for lam in grid.point_masses})

    def norm2(self) -> float:
        total = 0.0
        for seg, vals in zip(self.grid.segments, self.values):
            edge = _zero_edge_node(self.grid, seg)
            for v in vals.values():
                total += float(seg.weights @ np.abs(v) ** 2)
                if edge is not None:
                    # density is flat as lam -> 0: extend the first node over (0, lambda_lo)
                    total += self.grid.lambda_lo * abs(v[edge]) ** 2
        return total + sum(abs(c) ** 2 for c in self.point_mass.values())

    def norm(self) -> float:
        return math.sqrt(self.norm2())

    def continuous_norm2(self) -> float:
        return self.norm2() - sum(abs(c) ** 2 for c in self.point_mass.values())

    def apply(self, f) -> SpectralCoeffs:
        """Multiply by f(lam) (the functional calculus of A_k)."""
        vals = [{j: v * f(seg.lam) for j, v in d.items()} for seg, d in zip(self.grid.segments, self.values)]
        pm = {lam: c * complex(f(np.array([lam]))[0]) for lam, c in self.point_mass.items()}
        return SpectralCoeffs(self.grid, vals, pm)

    def _combine(self, other, op):
        if other.grid is not self.grid:
            raise ValueError("coefficients live on different spectral grids")
        vals = [{j: op(a[j], b[j]) for j in a} for a, b in zip(self.values, other.values)]
        pm = {lam: op(c, other.point_mass[lam]) for lam, c in self.point_mass.items()}
        return SpectralCoeffs(self.grid, vals, pm)

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, c):
        return self.apply(lambda lam: np.full(np.shape(lam), c, dtype=complex))

    __rmul__ = __mul__

    def measure(self, a: float, b: float) -> float:
        """Mass of nodes inside [a, b] (exact only for segment-aligned bounds)."""
        total = 0.0
        for seg, vals in zip(self.grid.segments, self.values):
            m = (seg.lam >= a) & (seg.lam <= b)
            for v in vals.values():
                total += float(seg.weights[m] @ np.abs(v[m]) ** 2)
        return total + sum(abs(c) ** 2 for lam, c in self.point_mass.items() if a <= lam <= b)


def _side_support(u: StateField1D, side: int, rel_tol: float = 1e-15, min_nodes: int = 16):
    """(x, h, {comp: values}) on the contiguous node range of ``side`` where U is not negligible."""
    scale = np.abs(u.values).max() if u.values.size else 0.0
    blocks = [(i, b) for i, b in enumerate(u.layout.blocks) if b.side == side]
    if scale == 0 or not blocks:
        return None
    x = blocks[0][1].x
    vals = {b.comp: u.values[u.layout.slice(i)] for i, b in blocks}
    keep = np.zeros(x.size, dtype=bool)
    for v in vals.values():
        keep |= np.abs(v) > rel_tol * scale
    if not keep.any():
        return None
    idx = np.nonzero(keep)[0]
    lo, hi = idx.min(), idx.max() + 1
    while hi - lo < min_nodes:
        lo, hi = max(lo - 1, 0), min(hi + 1, x.size)
    return x[lo:hi], u.layout.h, {c: v[lo:hi] for c, v in vals.items()}


def _check_shared_x(layout: Layout):
    for side in (-1, 1):
        xs = [b.x for b in layout.blocks if b.side == side]
        if any(x.shape != xs[0].shape or np.any(x != xs[0]) for x in xs[1:]):
            raise ValueError("the spectral pipeline needs a collocated layout")


def _chunks(n_lam: int, n_x: int):
    step = max(1, _CHUNK // max(n_x, 1))
    for s in range(0, n_lam, step):
        yield slice(s, min(s + step, n_lam))


def _pair_side(batch, side: int, x: np.ndarray, h: float, fvals: dict, pw: dict) -> np.ndarray:
    """sum_c pw_c int f_c conj(W_c) dx on one half-line, exponential-fitted in x."""
    coeffs = batch.minus if side < 0 else batch.plus
    factors = batch.factors(side)
    comps = [c for c in factors if c in fvals]
    fmat = np.stack([fvals[c] for c in comps], axis=1)
    th = np.conj(coeffs.theta)
    out = np.zeros(batch.lam.size, dtype=complex)
    cache = {}
    for amp, sign in ((coeffs.a, 1), (coeffs.b, -1)):
        live = amp != 0
        if not live.any():
            continue
        sig = sign * th[live]
        rho = exp_quadrature(sig * h, x.size, h)
        key = live.tobytes()
        with np.errstate(over="ignore", invalid="ignore"):
            if key in cache and np.all(np.abs(sig.real) * np.abs(x).max() < 30):
                e = 1.0 / cache[key]
            else:
                e = np.exp(np.outer(sig, x))
                cache[key] = e
            y = (e * rho) @ fmat
        amp_c = np.conj(amp[live])
        for col, c in enumerate(comps):
            mult, order = factors[c]
            out[live] += pw[c] * np.conj(mult[live]) * amp_c * sig**order * y[:, col]
    return out


def forward(p: MediumParams, k: float, u: StateField1D, grid: SpectralGrid) -> SpectralCoeffs:
    """F_k U on ``grid``: pair U with every mode by x-quadrature."""
    _check_shared_x(u.layout)
    pw = physical_weights(p)
    support = {side: _side_support(u, side) for side in (-1, 1)}
    values = []
    for seg in grid.segments:
        vals = {}
        for j in seg.modes:
            acc = np.zeros(seg.lam.size, dtype=complex)
            for side, sup in support.items():
                if sup is None:
                    continue
                x, h, fv = sup
                for sl in _chunks(seg.lam.size, x.size):
                    batch = mode_batch(p, k, seg.lam[sl], j, seg.zone)
                    acc[sl] += _pair_side(batch, side, x, h, fv, pw)
            vals[j] = acc
        values.append(vals)
    masses = {}
    for lam in grid.point_masses:
        batch = mode_batch(p, k, [lam], 0, ZoneKind.EE)
        total = 0j
        for side, sup in support.items():
            if sup is not None:
                x, h, fv = sup
                total += _pair_side(batch, side, x, h, fv, pw)[0]
        masses[lam] = total
    return SpectralCoeffs(grid, values, masses)


def _x_groups(layout: Layout, side: int):
    """Blocks of ``side`` grouped by their node arrays, as [(x, [(i, block)])]."""
    groups: dict[bytes, tuple[np.ndarray, list]] = {}
    for i, b in enumerate(layout.blocks):
        if b.side == side:
            groups.setdefault(b.x.tobytes(), (b.x, []))[1].append((i, b))
    return list(groups.values())


def adjoint(p: MediumParams, k: float, coeffs: SpectralCoeffs, layout: Layout) -> StateField1D:
    """F_k^* coeffs sampled on ``layout`` (any layout: modes are evaluated pointwise)."""
    out = StateField1D(layout)
    grid = coeffs.grid
    for side in (-1, 1):
        for x, blocks in _x_groups(layout, side):
            acc = {b.comp: np.zeros(x.size, dtype=complex) for _, b in blocks}
            _synthesize(p, k, coeffs, side, x, acc)
            for i, b in blocks:
                out.values[layout.slice(i)] = acc[b.comp]
    return out


def _synthesize(p, k, coeffs: SpectralCoeffs, side: int, x: np.ndarray, acc: dict) -> None:
    grid = coeffs.grid
    for seg, vals in zip(grid.segments, coeffs.values):
        for j, v in vals.items():
            wv = seg.weights * v
            if not np.any(wv):
                continue
            for sl in _chunks(seg.lam.size, x.size):
                batch = mode_batch(p, k, seg.lam[sl], j, seg.zone)
                factors = {c: f for c, f in batch.factors(side).items() if c in acc}
                orders = sorted({o for _, o in factors.values()})
                if not orders:
                    continue
                scal = batch.scalars(x, side, orders)
                for order in orders:
                    comps = [c for c, (_, o) in factors.items() if o == order]
                    coef = np.array([wv[sl] * factors[c][0] for c in comps])
                    res = coef @ scal[order]
                    for c, r in zip(comps, res):
                        acc[c] += r
    for lam, c in coeffs.point_mass.items():
        if c != 0:
            mode = ModeField(p, k, lam, 0)
            for comp in acc:
                acc[comp] += c * mode.component(comp, x, side)
    if side > 0:
        _add_zero_tail(p, k, coeffs, x, acc)


def _add_zero_tail(p, k, coeffs: SpectralCoeffs, x: np.ndarray, acc: dict) -> None:
    """Add the part of the synthesis with 0 < |lam| < lambda_lo for J and Ky.

    There theta^+ ~ i alpha / lam and the J, Ky factors of the modes grow
    like 1/lam, so the integrand is (A / lam) exp(i alpha x / |lam|) with A
    read off the node next to the cut.  Its integral is A E1(-i alpha x /
    lambda_lo): negligible for x >> lambda_lo / alpha, but an O(1) jump at
    x = 0+ that no x-grid resolves.  The x = 0 node takes the x -> 0+
    limit, whose log terms cancel between the two signs of lam.
    """
    grid = coeffs.grid
    lo = grid.lambda_lo
    pos = x > 0
    for seg, vals in zip(grid.segments, coeffs.values):
        edge = _zero_edge_node(grid, seg)
        if edge is None:
            continue
        lam_n = float(seg.lam[edge])
        for j, v in vals.items():
            if v[edge] == 0:
                continue
            batch = mode_batch(p, k, [lam_n], j, seg.zone)
            factors = batch.factors(1)
            for comp in ("J", "Ky"):
                if comp not in acc:
                    continue
                mult, order = factors[comp]
                for amp, sgn in ((batch.plus.a[0], 1), (batch.plus.b[0], -1)):
                    if amp == 0:
                        continue
                    th = sgn * batch.plus.theta[0]
                    big_a = np.sign(lam_n) * lam_n * v[edge] * mult[0] * amp * th**order
                    rate = th.imag * abs(lam_n)  # exp(th x) ~ exp(i rate x / |lam|)
                    acc[comp][pos] += big_a * exp1(-1j * rate * x[pos] / lo)
                    acc[comp][~pos] += big_a * (-np.euler_gamma - np.log(abs(rate) / lo) + 0.5j * np.pi * np.sign(rate))


def spectral_measure_interval(
    p: MediumParams, k: float, u: StateField1D, a: float, b: float, grid: SpectralGrid | None = None
) -> float:
    """||E_k([a, b]) U||^2 from the transform (continuous part + point masses)."""
    if a >= b:
        raise DomainError("need a < b")
    ref = grid if grid is not None else spectral_grid(p, k, x_spacing=u.layout.h, x_extent=u.layout.L)
    for bad, gap in ((0.0, ref.lambda_lo), (p.omega_m, ref.delta), (-p.omega_m, ref.delta)):
        if a - gap < bad < b + gap:
            raise DomainError(f"[{a}, {b}] touches the excluded point {bad}")
    sub = spectral_grid(
        p,
        k,
        delta=ref.delta,
        lambda_min=ref.lambda_lo,
        lambda_max=max(ref.lambda_max, abs(a), abs(b)),
        panel_width=ref.panel_width,
        nodes=ref.nodes,
        x_extent=ref.x_extent,
        t_max=ref.t_max,
        window=(a, b),
    )
    return forward(p, k, u, sub).norm2()


# --- projection onto the div-free subspace -----------------------------------


def _potential(fx: np.ndarray, fy: np.ndarray, h: float, k: float):
    """phi and phi' for -phi'' + k^2 phi = -div_k F on [0, inf), phi(0) = 0.

    Uses the half-line Green function G(x,s) = (e^{-|k||x-s|} - e^{-|k|(x+s)}) / 2|k|
    after moving the derivative of div_k F onto G, so no derivative of F
    is ever differenced.  Arrays start at x = 0.
    """
    kap = abs(k)
    x = np.arange(fx.size) * h

    def lrm(f):
        left = kernel_cumulative(f, h, kap)
        right = kernel_cumulative(f[::-1], h, kap)[::-1]
        mid = np.exp(-kap * x) * right[0]
        return left, right, mid

    lx, rx, mx = lrm(fx)
    ly, ry, my = lrm(fy)
    phi = 0.5 * (lx - rx + mx) - 0.5j * k / kap * (ly + ry - my)
    dphi = fx - 0.5 * kap * (lx + rx + mx) - 0.5j * k * (-ly + ry + my)
    return phi, dphi


def _grad_part(fx, fy, h, k, side):
    """Gradient field grad_k phi matching F on one half-line (given from -L..0 or 0..L)."""
    if side < 0:
        phi, dphi = _potential(-fx[::-1], fy[::-1], h, k)
        return -dphi[::-1], 1j * k * phi[::-1]
    phi, dphi = _potential(fx, fy, h, k)
    return dphi, 1j * k * phi


def project_divfree(p: MediumParams, k: float, u: StateField1D) -> StateField1D:
    """Remove the components of U in Ker(A_k) and Ker(A_k -+ Omega_m)."""
    if k == 0:
        raise DomainError("project_divfree needs k != 0")
    if u.layout.kind != "collocated":
        raise ValueError("project_divfree needs a collocated layout")
    h = u.layout.h
    out = u.copy()
    gx, gy = _grad_part(u.block("Hx", -1), u.block("Hy", -1), h, k, -1)
    out.set_block("Hx", -1, u.block("Hx", -1) - gx)
    out.set_block("Hy", -1, u.block("Hy", -1) - gy)
    hx, hy, kx, ky = (u.block(c, 1) for c in ("Hx", "Hy", "Kx", "Ky"))
    new_h = [hx.copy(), hy.copy()]
    new_k = [kx.copy(), ky.copy()]
    for sigma in (1, -1):
        fx = (p.mu0 * hx - sigma * 1j / p.omega_m * kx) / (2 * p.mu0)
        fy = (p.mu0 * hy - sigma * 1j / p.omega_m * ky) / (2 * p.mu0)
        gx, gy = _grad_part(fx, fy, h, k, 1)
        for i, g in enumerate((gx, gy)):
            new_h[i] -= g
            new_k[i] -= sigma * 1j * p.mu0 * p.omega_m * g
    for c, v in zip(("Hx", "Hy", "Kx", "Ky"), new_h + new_k):
        out.set_block(c, 1, v)
    return out


def project_k0(u: StateField1D) -> StateField1D:
    """The k = 0 projection: Hx and Kx lie entirely in the kernels."""
    out = u.copy()
    for side in (-1, 1):
        out.set_block("Hx", side, 0)
    out.set_block("Kx", 1, 0)
    return out


def project(p: MediumParams, k: float, u: StateField1D) -> StateField1D:
    return project_k0(u) if k == 0 else project_divfree(p, k, u)


# --- two-dimensional fields ---------------------------------------------------


class StateField2D:
    """A TE state sampled on (y_j) x layout; values has shape (n_y, layout.size)."""

    def __init__(self, layout: Layout, y: np.ndarray, values=None):
        y = np.asarray(y, dtype=float)
        if y.ndim != 1 or y.size < 2 or not np.allclose(np.diff(y), y[1] - y[0]):
            raise ValueError("y must be a uniform 1D grid")
        self.layout, self.y = layout, y
        if values is None:
            values = np.zeros((y.size, layout.size), dtype=complex)
        self.values = np.asarray(values, dtype=complex)
        if self.values.shape != (y.size, layout.size):
            raise ValueError("values shape does not match (y, layout)")

    @property
    def hy(self) -> float:
        return float(self.y[1] - self.y[0])

    @classmethod
    def from_function(cls, layout: Layout, y, fn):
        """Sample ``fn(comp, x, side, y)`` (x, y broadcast as columns/rows)."""
        y = np.asarray(y, dtype=float)
        cols = [np.asarray(fn(b.comp, b.x[None, :], b.side, y[:, None]), dtype=complex) for b in layout.blocks]
        cols = [np.broadcast_to(c, (y.size, b.size)) for c, b in zip(cols, layout.blocks)]
        return cls(layout, y, np.concatenate(cols, axis=1))

    def slice_1d(self, row: int) -> StateField1D:
        return StateField1D(self.layout, self.values[row].copy())

    def norm(self, p: MediumParams) -> float:
        from .fields import quadrature_vector

        q = quadrature_vector(self.layout, p)
        return float(np.sqrt(self.hy * np.sum(q * np.abs(self.values) ** 2)))


def y_wavenumbers(y: np.ndarray) -> np.ndarray:
    hy = float(y[1] - y[0])
    return 2 * np.pi * np.fft.fftfreq(y.size, hy)


def fourier_y(u2d: StateField2D) -> tuple[np.ndarray, np.ndarray]:
    """Unitary partial Fourier transform in y: returns (k_grid, rows of U_k)."""
    ks = y_wavenumbers(u2d.y)
    hat = np.fft.fft(u2d.values, axis=0) * (u2d.hy / math.sqrt(2 * math.pi))
    hat *= np.exp(-1j * ks * u2d.y[0])[:, None]
    return ks, hat


def inverse_fourier_y(layout: Layout, y: np.ndarray, ks: np.ndarray, hat: np.ndarray) -> StateField2D:
    hy = float(y[1] - y[0])
    dk = 2 * math.pi / (y.size * hy)
    phased = hat * np.exp(1j * ks * y[0])[:, None]
    vals = np.fft.ifft(phased, axis=0) * (y.size * dk / math.sqrt(2 * math.pi))
    return StateField2D(layout, y, vals)


def forward_2d(p: MediumParams, u2d: StateField2D, grid_kwargs: dict | None = None, k_select=None):
    """Per-k transforms of the y-Fourier transform of ``u2d``.

    Returns a list of (k, SpectralCoeffs) in FFT order; ``k_select`` may
    restrict which wavenumbers are transformed.
    """
    ks, hat = fourier_y(u2d)
    kwargs = dict(grid_kwargs or {})
    kwargs.setdefault("x_spacing", u2d.layout.h)
    kwargs.setdefault("x_extent", u2d.layout.L)
    out = []
    for i, k in enumerate(ks):
        if k_select is not None and not k_select(k):
            continue
        grid = spectral_grid(p, float(k), **kwargs)
        out.append((float(k), forward(p, float(k), StateField1D(u2d.layout, hat[i]), grid)))
    return out


# --- estimator front end ------------------------------------------------------


def check_state_field(u, layout: Layout | None = None, kind: str | None = "collocated") -> StateField1D:
    """Validate that ``u`` is a StateField1D (on ``layout`` if given)."""
    if not isinstance(u, StateField1D):
        raise TypeError(f"expected a StateField1D, got {type(u).__name__}")
    if kind is not None and u.layout.kind != kind:
        raise ValueError(f"expected a {kind} layout, got {u.layout.kind}")
    if layout is not None and u.layout != layout:
        raise ValueError("state lives on a different layout than the fitted one")
    if not np.all(np.isfinite(u.values)):
        raise ValueError("state contains NaN or inf")
    return u


class GeneralizedFourierTransform(TransformerMixin, BaseEstimator):
    """F_k as a scikit-learn style transformer.

    ``fit`` fixes the x-layout and builds the spectral grid; ``transform``
    returns SpectralCoeffs and ``inverse_transform`` synthesizes a state
    with the adjoint.  ``inverse_transform(transform(U))`` is the
    div-free projection of U.
    """

    def __init__(
        self,
        k=1.0,
        eps0=1.0,
        mu0=1.0,
        omega_e=1.0,
        omega_m=1.0,
        delta=None,
        lambda_max=None,
        panel_width=0.25,
        nodes=16,
    ):
        self.k = k
        self.eps0 = eps0
        self.mu0 = mu0
        self.omega_e = omega_e
        self.omega_m = omega_m
        self.delta = delta
        self.lambda_max = lambda_max
        self.panel_width = panel_width
        self.nodes = nodes

    def _medium(self) -> MediumParams:
        return MediumParams(self.eps0, self.mu0, self.omega_e, self.omega_m)

    def fit(self, X, y=None):
        u = check_state_field(X)
        if not np.isfinite(self.k):
            raise ValueError("k must be finite")
        if self.panel_width <= 0 or int(self.nodes) < 2:
            raise ValueError("panel_width must be positive and nodes >= 2")
        self.medium_ = self._medium()
        self.layout_ = u.layout
        self.grid_ = spectral_grid(
            self.medium_,
            float(self.k),
            delta=self.delta,
            lambda_max=self.lambda_max,
            x_spacing=u.layout.h,
            x_extent=u.layout.L,
            panel_width=self.panel_width,
            nodes=int(self.nodes),
        )
        self.n_point_masses_ = len(self.grid_.point_masses)
        return self

    def transform(self, X) -> SpectralCoeffs:
        check_is_fitted(self, "grid_")
        u = check_state_field(X, self.layout_)
        return forward(self.medium_, float(self.k), u, self.grid_)

    def inverse_transform(self, coeffs: SpectralCoeffs) -> StateField1D:
        check_is_fitted(self, "grid_")
        if not isinstance(coeffs, SpectralCoeffs) or coeffs.grid is not self.grid_:
            raise ValueError("coefficients were not produced by this transformer")
        return adjoint(self.medium_, float(self.k), coeffs, self.layout_)

    def project(self, X) -> StateField1D:
        check_is_fitted(self, "grid_")
        return project_divfree(self.medium_, float(self.k), check_state_field(X, self.layout_))


__all__ = [
    "GeneralizedFourierTransform",
    "Segment",
    "SpectralCoeffs",
    "SpectralGrid",
    "StateField2D",
    "adjoint",
    "check_state_field",
    "forward",
    "forward_2d",
    "fourier_y",
    "inverse_fourier_y",
    "project",
    "project_divfree",
    "project_k0",
    "spectral_grid",
    "spectral_measure_interval",
    "y_wavenumbers",
]
