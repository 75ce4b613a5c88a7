"""Finite-difference oracle for the reduced operator A_k.

A_k is discretized on the staggered layout (E, Hx, J, Kx on integer
nodes, Hy, Ky on half nodes) with centred differences and Dirichlet E = 0
at x = +-L.  Hx is stored twice at x = 0 (one-sided limits, half weight
each), and the E equation there sees their average and half of J(0).
With these weights the matrix is Hermitian in the discrete energy inner
product, which the tests check directly.

The oracle shares nothing with the spectral pipeline except the material
constants and the test fields: time stepping is classical RK4, and the
resolvent is a sparse LU solve.  The Stone-formula helpers use the
analytic resolvent quadratic form from ``sturm`` (a second route to the
spectral measure, independent of the mode normalization).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .dispersion import classify, cut_curves
from .errors import DomainError, InstabilityError
from .fields import Layout, StateField1D, quadrature_vector, staggered_layout
from .material import MediumParams
from .sturm import resolvent_quadform
from .zones import ZoneKind


class _Index:
    """Global positions of staggered unknowns by (component, node index)."""

    def __init__(self, layout: Layout):
        self.n = layout.n
        self.off = {(b.comp, b.side): layout.offsets[i] for i, b in enumerate(layout.blocks)}

    def e(self, i: int) -> int | None:
        n = self.n
        if i <= -n or i >= n:
            return None  # Dirichlet node
        return self.off["E", -1] + i + n - 1 if i < 0 else self.off["E", 1] + i

    def hx(self, i: int, side: int) -> int:
        return self.off["Hx", -1] + i + self.n - 1 if side < 0 else self.off["Hx", 1] + i

    def hy(self, m: int) -> int:
        """Hy at x = (m + 1/2) h."""
        return self.off["Hy", -1] + m + self.n if m < 0 else self.off["Hy", 1] + m

    def plus(self, comp: str, i: int) -> int:
        return self.off[comp, 1] + i


def _assemble(p: MediumParams, k: float, layout: Layout) -> sp.csr_matrix:
    n, h = layout.n, layout.h
    idx = _Index(layout)
    rows, cols, vals = [], [], []

    def add(r, c, v):
        if r is not None and c is not None:
            rows.append(r)
            cols.append(c)
            vals.append(v)

    ie, im = 1j / p.eps0, -1j / p.mu0
    for i in range(-n + 1, n):
        r = idx.e(i)
        add(r, idx.hy(i), ie / h)
        add(r, idx.hy(i - 1), -ie / h)
        if i < 0:
            add(r, idx.hx(i, -1), k / p.eps0)
        elif i > 0:
            add(r, idx.hx(i, 1), k / p.eps0)
            add(r, idx.plus("J", i), -ie)
        else:
            add(r, idx.hx(0, -1), 0.5 * k / p.eps0)
            add(r, idx.hx(0, 1), 0.5 * k / p.eps0)
            add(r, idx.plus("J", 0), -0.5 * ie)
    for i in range(-n + 1, 1):
        add(idx.hx(i, -1), idx.e(i), k / p.mu0)
    for i in range(0, n):
        add(idx.hx(i, 1), idx.e(i), k / p.mu0)
        add(idx.hx(i, 1), idx.plus("Kx", i), im)
        add(idx.plus("J", i), idx.e(i), 1j * p.eps0 * p.omega_e**2)
        add(idx.plus("Kx", i), idx.hx(i, 1), 1j * p.mu0 * p.omega_m**2)
    for m in range(-n, n):
        r = idx.hy(m)
        add(r, idx.e(m + 1), -im / h)
        add(r, idx.e(m), im / h)
        if m >= 0:
            add(r, idx.plus("Ky", m), im)
            add(idx.plus("Ky", m), r, 1j * p.mu0 * p.omega_m**2)
    size = layout.size
    return sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(size, size))


@dataclass
class DiscreteHamiltonian:
    """A_k^h on a staggered layout, as a sparse matrix plus its quadrature weights."""

    p: MediumParams
    k: float
    layout: Layout
    matrix: sp.csr_matrix
    weights: np.ndarray

    def apply(self, u: StateField1D) -> StateField1D:
        self._check(u)
        return StateField1D(self.layout, self.matrix @ u.values)

    def _check(self, u: StateField1D):
        if u.layout != self.layout:
            raise ValueError("state is not on the oracle's layout")

    def symmetry_residual(self, u: StateField1D, v: StateField1D) -> float:
        """|(A u, v)_h - (u, A v)_h| / (|u| |v|)."""
        au, av = self.apply(u), self.apply(v)
        lhs = au.inner(v, self.p)
        rhs = u.inner(av, self.p)
        return abs(lhs - rhs) / (u.norm(self.p) * v.norm(self.p))

    def hermitian_form(self) -> sp.csr_matrix:
        """D A D^{-1} with D = diag(sqrt(weights)); Hermitian in the Euclidean product."""
        d = np.sqrt(self.weights)
        return (sp.diags(d) @ self.matrix @ sp.diags(1.0 / d)).tocsr()

    def spectral_radius(self) -> float:
        s = self.hermitian_form()
        val = spla.eigsh(s, k=1, which="LM", return_eigenvectors=False, tol=1e-6)
        return float(abs(val[0]))

    def resolvent_solve(self, zeta: complex, f: StateField1D) -> StateField1D:
        """(A_k^h - zeta)^{-1} F by sparse LU."""
        self._check(f)
        if complex(zeta).imag == 0:
            raise DomainError("resolvent_solve needs Im zeta != 0")
        mat = (self.matrix - zeta * sp.identity(self.layout.size, format="csr")).tocsc()
        return StateField1D(self.layout, spla.spsolve(mat, f.values))

    def resolvent_quadform(self, zeta: complex, u: StateField1D) -> complex:
        return self.resolvent_solve(zeta, u).inner(u, self.p)

    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        """All eigenpairs (dense); eigenvectors are orthonormal in the weighted product."""
        s = self.hermitian_form().toarray()
        vals, vecs = np.linalg.eigh(s)
        return vals, vecs / np.sqrt(self.weights)[:, None]


def discretize(p: MediumParams, k: float, layout: Layout) -> DiscreteHamiltonian:
    if layout.kind != "staggered":
        raise DomainError("the oracle needs a staggered layout with x = 0 as a node")
    return DiscreteHamiltonian(p, k, layout, _assemble(p, k, layout), quadrature_vector(layout, p))


def oracle_layout(L: float, n: int) -> Layout:
    return staggered_layout(L, n)


def restrict(u: StateField1D, coarse: Layout) -> StateField1D:
    """Pick the nodes of ``coarse`` out of a finer staggered state.

    Works when the fine grid refines the coarse one by an odd factor, so
    that half nodes are shared as well.
    """
    fine = u.layout
    if fine.kind != "staggered" or coarse.kind != "staggered" or fine.L != coarse.L:
        raise ValueError("restrict needs two staggered layouts on the same interval")
    ratio, rem = divmod(fine.n, coarse.n)
    if rem or ratio % 2 == 0:
        raise ValueError("the fine grid must refine the coarse one by an odd factor")
    out = StateField1D(coarse)
    for b in coarse.blocks:
        fb = fine.blocks[fine.index(b.comp, b.side)]
        idx = np.rint((b.x - fb.x[0]) / fine.h).astype(int)
        if not np.allclose(fb.x[idx], b.x, atol=1e-9 * fine.L):
            raise ValueError("coarse nodes are not fine nodes")
        out.set_block(b.comp, b.side, u.block(b.comp, b.side)[idx])
    return out


# --- time integration ---------------------------------------------------------

Source = Callable[[float], np.ndarray]


def harmonic_source(g: StateField1D, omega: float) -> Source:
    """G(t) = e^{-i omega t} G_omega for t >= 0."""
    vals = g.values.copy()
    return lambda t: np.exp(-1j * omega * t) * vals


def integrate(
    p: MediumParams,
    k: float,
    u0: StateField1D,
    t_final: float,
    dt: float,
    *,
    source: Source | None = None,
    hamiltonian: DiscreteHamiltonian | None = None,
    t_out: Sequence[float] | None = None,
    growth_limit: float = 10.0,
):
    """RK4 for dU/dt + i A_k^h U = G(t).

    Returns the state at ``t_final``, or a dict {t: state} if ``t_out`` is
    given (each output time is hit exactly by shortening the step before it).
    Free runs whose norm grows by more than ``growth_limit`` abort.
    """
    if t_final < 0 or dt <= 0:
        raise DomainError("need t_final >= 0 and dt > 0")
    ham = hamiltonian or discretize(p, k, u0.layout)
    ham._check(u0)
    mat = ham.matrix
    q = ham.weights

    def norm(v):
        return math.sqrt(float(np.sum(q * np.abs(v) ** 2)))

    def rhs(t, v):
        out = -1j * (mat @ v)
        if source is not None:
            out += source(t)
        return out

    def check(t):
        if not np.all(np.isfinite(v)):
            raise InstabilityError(f"non-finite state at t={t:.4g}; reduce dt (now {dt})")
        if source is None and norm(v) > growth_limit * n0:
            raise InstabilityError(f"norm grew by more than {growth_limit}x at t={t:.4g}; reduce dt (now {dt})")

    stops = sorted(set(float(t) for t in (t_out or [])) | {float(t_final)})
    if stops and stops[0] < 0:
        raise DomainError("output times must be non-negative")
    v = u0.values.astype(complex).copy()
    n0 = max(norm(v), 1e-300)
    t = 0.0
    results = {}
    step = 0
    for stop in stops:
        while t < stop - 1e-12:
            tau = min(dt, stop - t)
            k1 = rhs(t, v)
            k2 = rhs(t + tau / 2, v + tau / 2 * k1)
            k3 = rhs(t + tau / 2, v + tau / 2 * k2)
            k4 = rhs(t + tau, v + tau * k3)
            v = v + tau / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += tau
            step += 1
            if step % 64 == 0:
                check(t)
        check(t)
        results[stop] = StateField1D(u0.layout, v.copy())
    if t_out is None:
        return results[float(t_final)]
    return {float(tt): results[float(tt)] for tt in t_out}


# --- Stone's formula ---------------------------------------------------------


def richardson(values: Sequence[float], etas: Sequence[float], exponents: Sequence[float]) -> float:
    """Value at eta = 0 of f(eta) = f0 + sum_i c_i eta^{e_i}, fitted exactly.

    ``len(values)`` must equal ``len(exponents) + 1``.
    """
    if len(values) != len(etas) or len(values) != len(exponents) + 1:
        raise ValueError("need one more sample than exponents")
    eta = np.asarray(etas, dtype=float)
    mat = np.column_stack([np.ones_like(eta)] + [eta**e for e in exponents])
    coef = np.linalg.solve(mat, np.asarray(values, dtype=float))
    return float(coef[0])


_GL8 = np.polynomial.legendre.leggauss(8)


def _lam_rule(a: float, b: float, width: float):
    n_pan = max(1, math.ceil((b - a) / width))
    edges = np.linspace(a, b, n_pan + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    return (mid + half * _GL8[0]).ravel(), (half * _GL8[1]).ravel()


def stone_density(p: MediumParams, k: float, u: StateField1D, lam: float, eta: float) -> float:
    """(1/pi) Im (R_k(lam + i eta) U, U)."""
    return resolvent_quadform(p, k, complex(lam, eta), u).imag / math.pi


STONE_ETAS = (1e-2, 5e-3, 2.5e-3)


def _eta_scale(p: MediumParams, a: float, b: float) -> float:
    dist = min(_dist_to_interval(c, a, b) for c in (0.0, p.omega_m, -p.omega_m))
    return min(1.0, dist / 0.5)


def _dist_to_interval(c: float, a: float, b: float) -> float:
    return 0.0 if a <= c <= b else min(abs(c - a), abs(c - b))


GAP_ETAS = (4e-3, 2e-3, 1e-3)


def gap_clearance(p: MediumParams, k: float, a: float, b: float) -> float | None:
    """Distance from [a, b] to the spectrum of A_k if [a, b] misses it, else None."""
    cc = cut_curves(p)
    lo, hi = sorted((abs(a), abs(b)))
    if a < 0 < b:
        return None
    cuts = {0.0, p.omega_m, float(cc.lambda0(k)), float(cc.lambdaI(k)), float(cc.lambdaD(k))}
    features = [0.0, p.omega_m]
    if abs(k) > cc.kc:
        le = float(cc.lambdaE(k))
        cuts.add(le)
        features.append(le)
    pts = sorted(cuts)
    # closed continuum segments between consecutive cuts, plus the unbounded tail
    segments = [(pts[-1], math.inf)]
    for s0, s1 in zip(pts[:-1], pts[1:]):
        if s1 > s0 and classify(p, k, 0.5 * (s0 + s1), tol=0.0).kind is not ZoneKind.GAP:
            segments.append((s0, s1))
    if classify(p, k, pts[-1] + 1.0, tol=0.0).kind is ZoneKind.GAP:
        segments.pop(0)
    gaps = [max(s0 - hi, lo - s1, 0.0) for s0, s1 in segments]
    gaps += [_dist_to_interval(c, lo, hi) for c in features]
    clear = min(gaps)
    return clear if clear > 0 else None


def stone_interval(
    p: MediumParams,
    k: float,
    u: StateField1D,
    a: float,
    b: float,
    eta_sequence: Sequence[float] | None = None,
    panel_width: float | None = None,
    exponents: Sequence[float] | None = None,
) -> float:
    """(1/pi) int_a^b Im (R(lam + i eta) U, U) dlam, extrapolated to eta = 0.

    Inside the spectrum the Poisson smoothing error is O(eta) with an
    O(eta^2) remainder, so the three-term sequence is extrapolated with
    exponents (1, 2).  By default eta runs over (1e-2, 5e-3, 2.5e-3),
    shrunk in proportion when [a, b] is closer than 0.5 to the
    accumulation points {0, +-Omega_m}: their Lorentzian tails would
    otherwise swamp a small interval mass.

    When [a, b] misses the spectrum altogether (see ``gap_clearance``) all
    of the mass sits a distance d away, the smoothing error is odd in
    eta/d, and the sequence (4e-3, 2e-3, 1e-3) * min(1, d / 0.1) is
    extrapolated with exponents (1, 3).
    """
    if a >= b:
        raise DomainError("need a < b")
    clear = gap_clearance(p, k, a, b)
    if clear is not None:
        dist = clear
        default_etas = [e * min(1.0, clear / 0.1) for e in GAP_ETAS]
        default_exps = (1.0, 3.0)
    else:
        dist = min(_dist_to_interval(c, a, b) for c in (0.0, p.omega_m, -p.omega_m))
        default_etas = [e * _eta_scale(p, a, b) for e in STONE_ETAS]
        default_exps = (1.0, 2.0)
    etas = sorted(eta_sequence if eta_sequence is not None else default_etas, reverse=True)
    exps = list(exponents if exponents is not None else default_exps)[: len(etas) - 1]
    vals = []
    for eta in etas:
        # the smoothed density varies on the scale eta + distance to the nearest feature
        width = panel_width or min(0.1, (b - a) / 3, 4 * eta + 0.5 * dist)
        lam, w = _lam_rule(a, b, width)
        dens = np.array([stone_density(p, k, u, float(x), eta) for x in lam])
        vals.append(float(w @ dens))
    return richardson(vals, etas, exps) if len(etas) > 1 else vals[0]


def stone_point(
    p: MediumParams,
    k: float,
    u: StateField1D,
    a: float,
    eta_sequence: Sequence[float] = (1e-5, 5e-6, 2.5e-6, 1.25e-6),
    exponents: Sequence[float] = (0.5, 1.0, 1.5),
) -> float:
    """lim eta Im (R(a + i eta) U, U), i.e. ||E_k({a}) U||^2.

    Next to a critical point the continuous density blows up like
    |lam - a|^{-1/2}, so the default expansion is in powers of eta^{1/2}.
    """
    if a == 0 or abs(a) == p.omega_m:
        raise DomainError("a must avoid {0, +-Omega_m}")
    etas = list(eta_sequence)
    vals = [eta * resolvent_quadform(p, k, complex(a, eta), u).imag for eta in etas]
    return richardson(vals, etas, list(exponents)[: len(etas) - 1])


__all__ = [
    "DiscreteHamiltonian",
    "discretize",
    "harmonic_source",
    "integrate",
    "oracle_layout",
    "restrict",
    "richardson",
    "GAP_ETAS",
    "gap_clearance",
    "stone_density",
    "stone_interval",
    "stone_point",
]
