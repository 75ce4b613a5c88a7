"""Sampled TE states U = (E, Hx, Hy, J, Kx, Ky) on a 1D grid.

A state lives on a *layout*: a list of blocks, each holding one field
component on one side of the interface together with quadrature weights.
Keeping the two sides separate lets a block store one-sided limits at
x = 0, which matters because Hx, J and K are discontinuous there.

Two layouts are provided:

* ``collocated_layout`` -- every component on the nodes of [-L, 0] and
  [0, L]; quadrature is the sixth-order end-corrected trapezoid rule on
  each half-line.  Used by the spectral pipeline.
* ``staggered_layout`` -- Yee-type placement (Hy, Ky on half nodes) with
  midpoint weights; the finite-difference oracle works on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.signal import lfilter

from .material import MediumParams

COMPONENTS = ("E", "Hx", "Hy", "J", "Kx", "Ky")
PLUS_ONLY = frozenset({"J", "Kx", "Ky"})


def physical_weights(p: MediumParams) -> dict[str, float]:
    """Weights of the energy inner product for each component."""
    wj = 1.0 / (p.eps0 * p.omega_e**2)
    wk = 1.0 / (p.mu0 * p.omega_m**2)
    return {"E": p.eps0, "Hx": p.mu0, "Hy": p.mu0, "J": wj, "Kx": wk, "Ky": wk}


@dataclass(frozen=True)
class Block:
    comp: str
    side: int  # -1 (x <= 0) or +1 (x >= 0)
    x: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class Layout:
    kind: str
    L: float
    n: int
    blocks: tuple[Block, ...]
    offsets: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        offs = np.cumsum([0] + [b.size for b in self.blocks])
        object.__setattr__(self, "offsets", tuple(int(o) for o in offs))

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def size(self) -> int:
        return self.offsets[-1]

    def index(self, comp: str, side: int) -> int:
        for i, b in enumerate(self.blocks):
            if b.comp == comp and b.side == side:
                return i
        raise KeyError((comp, side))

    def slice(self, i: int) -> slice:
        return slice(self.offsets[i], self.offsets[i + 1])

    def __eq__(self, other):
        return (
            isinstance(other, Layout)
            and self.kind == other.kind
            and self.n == other.n
            and self.L == other.L
        )

    def __hash__(self):
        return hash((self.kind, self.L, self.n))


def end_corrected_weights(n_nodes: int, h: float) -> np.ndarray:
    """Sixth-order end-corrected trapezoid weights (uniform in the interior).

    The end pattern is the total of the interval rules used by
    ``kernel_cumulative``, so both integrate consistently.
    """
    if n_nodes < 12:
        raise ValueError("need at least 12 nodes for end-corrected weights")
    w = np.ones(n_nodes)
    w[:6] = _END_PATTERN
    w[-6:] = _END_PATTERN[::-1]
    return w * h


def collocated_layout(L: float, n: int) -> Layout:
    """Nodes x = -L..0 and 0..L with spacing L/n on each side."""
    if n < 16:
        raise ValueError("n must be at least 16")
    h = L / n
    xm = np.linspace(-L, 0.0, n + 1)
    xp = np.linspace(0.0, L, n + 1)
    w = end_corrected_weights(n + 1, h)
    blocks = [Block(c, -1, xm, w) for c in ("E", "Hx", "Hy")]
    blocks += [Block(c, 1, xp, w) for c in COMPONENTS]
    return Layout("collocated", float(L), int(n), tuple(blocks))


def staggered_layout(L: float, n: int) -> Layout:
    """Yee-type layout used by the finite-difference oracle.

    E lives on interior integer nodes, Hx on integer nodes with a split
    (one-sided) pair at x = 0, Hy and Ky on half nodes, J and Kx on
    integer nodes x >= 0.  Nodes at x = 0 carry half weight.
    """
    h = L / n
    i_neg = np.arange(-n + 1, 0)
    i_pos = np.arange(0, n)
    full = np.full
    half0 = np.ones(n) * h
    half0[0] = h / 2
    blocks = (
        Block("E", -1, i_neg * h, full(n - 1, h)),
        Block("E", 1, i_pos * h, full(n, h)),
        Block("Hx", -1, np.arange(-n + 1, 1) * h, np.r_[full(n - 1, h), h / 2]),
        Block("Hx", 1, i_pos * h, half0.copy()),
        Block("Hy", -1, (np.arange(-n, 0) + 0.5) * h, full(n, h)),
        Block("Hy", 1, (i_pos + 0.5) * h, full(n, h)),
        Block("J", 1, i_pos * h, half0.copy()),
        Block("Kx", 1, i_pos * h, half0.copy()),
        Block("Ky", 1, (i_pos + 0.5) * h, full(n, h)),
    )
    return Layout("staggered", float(L), int(n), blocks)


FieldFunction = Callable[[str, np.ndarray, int], np.ndarray]


class StateField1D:
    """Values of a TE state on a layout (flat complex vector)."""

    def __init__(self, layout: Layout, values=None, test_class: bool = False):
        self.layout = layout
        if values is None:
            values = np.zeros(layout.size, dtype=complex)
        values = np.asarray(values, dtype=complex)
        if values.shape != (layout.size,):
            raise ValueError(f"expected {layout.size} values, got {values.shape}")
        self.values = values
        self.test_class = test_class

    @classmethod
    def from_function(cls, layout: Layout, fn: FieldFunction, test_class: bool = False):
        """Sample ``fn(comp, x, side)`` on every block of ``layout``."""
        vals = np.concatenate(
            [np.asarray(fn(b.comp, b.x, b.side), dtype=complex) * np.ones(b.size) for b in layout.blocks]
        )
        return cls(layout, vals, test_class)

    def block(self, comp: str, side: int) -> np.ndarray:
        return self.values[self.layout.slice(self.layout.index(comp, side))]

    def set_block(self, comp: str, side: int, data) -> None:
        self.values[self.layout.slice(self.layout.index(comp, side))] = data

    def copy(self) -> StateField1D:
        return StateField1D(self.layout, self.values.copy(), self.test_class)

    def _check(self, other: StateField1D):
        if other.layout != self.layout:
            raise ValueError("states live on different layouts")

    def __add__(self, other):
        self._check(other)
        return StateField1D(self.layout, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return StateField1D(self.layout, self.values - other.values)

    def __mul__(self, c):
        return StateField1D(self.layout, self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return StateField1D(self.layout, -self.values)

    def inner(self, other: StateField1D, p: MediumParams) -> complex:
        """Energy inner product (self, other), antilinear in ``other``."""
        self._check(other)
        return complex(np.vdot(other.values, self.values * quadrature_vector(self.layout, p)))

    def norm(self, p: MediumParams) -> float:
        return float(np.sqrt(abs(self.inner(self, p))))


def quadrature_vector(layout: Layout, p: MediumParams) -> np.ndarray:
    pw = physical_weights(p)
    return np.concatenate([pw[b.comp] * b.weights for b in layout.blocks])


def inner(p: MediumParams, u: StateField1D, v: StateField1D) -> complex:
    return u.inner(v, p)


# --- finite differences and cumulative quadrature on a uniform half-line ---


def _lagrange_weights(offsets: np.ndarray, order: int) -> np.ndarray:
    """Weights of the ``order``-th derivative at 0 from values at ``offsets``."""
    m = offsets.size
    vander = np.vander(offsets.astype(float), m, increasing=True).T
    rhs = np.zeros(m)
    rhs[order] = float(np.prod(np.arange(1, order + 1)))
    return np.linalg.solve(vander, rhs)


def derivative(f: np.ndarray, h: float, width: int = 7) -> np.ndarray:
    """Sixth-order finite-difference derivative along the last axis."""
    n = f.shape[-1]
    if n < width:
        raise ValueError("grid too short for the derivative stencil")
    half = width // 2
    out = np.empty_like(f, dtype=np.result_type(f, float))
    # interior: central stencil
    wc = _lagrange_weights(np.arange(-half, half + 1), 1)
    inner_part = sum(wc[m] * f[..., m : n - width + 1 + m] for m in range(width))
    out[..., half : n - half] = inner_part
    for i in list(range(half)) + list(range(n - half, n)):
        st = min(max(i - half, 0), n - width)
        w = _lagrange_weights(np.arange(st, st + width) - i, 1)
        out[..., i] = f[..., st : st + width] @ w
    return out / h


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _interval_weights(rate: complex, h: float, width: int = 6) -> dict[int, np.ndarray]:
    """Weights for int_{x_i}^{x_i+h} exp(-rate (x_i + h - s)) f(s) ds.

    Keyed by the stencil start relative to i; f is interpolated on
    ``width`` consecutive nodes.
    """
    tau = 0.5 * h * (_GL_X + 1)
    kern = np.exp(-rate * (h - tau)) * 0.5 * h * _GL_W
    out = {}
    for st in range(-(width - 1), 1):
        nodes = np.arange(st, st + width) * h
        vals = np.empty((width, tau.size))
        for m in range(width):
            others = np.delete(nodes, m)
            vals[m] = np.prod((tau[:, None] - others) / (nodes[m] - others), axis=1)
        out[st] = vals @ kern
    return out


def kernel_cumulative(f: np.ndarray, h: float, rate: complex = 0.0, width: int = 6) -> np.ndarray:
    """C_i = int_{x_0}^{x_i} exp(-rate (x_i - s)) f(s) ds on a uniform grid.

    Sixth-order accurate for smooth f; ``rate = 0`` gives a plain
    cumulative integral.  Works along the last axis.
    """
    n = f.shape[-1]
    if n < width:
        raise ValueError("grid too short")
    weights = _interval_weights(rate, h, width)
    lead = width // 2 - 1
    starts = np.clip(np.arange(n - 1) - lead, 0, n - width)
    rel = starts - np.arange(n - 1)
    contrib = np.zeros(f.shape[:-1] + (n - 1,), dtype=complex)
    for st_rel in np.unique(rel):
        idx = np.nonzero(rel == st_rel)[0]
        w = weights[int(st_rel)]
        for m in range(width):
            contrib[..., idx] += w[m] * f[..., idx + st_rel + m]
    decay = np.exp(-rate * h)
    out = lfilter([1.0], [1.0, -decay], contrib, axis=-1)
    zero = np.zeros(f.shape[:-1] + (1,), dtype=complex)
    return np.concatenate([zero, out], axis=-1)


_END_PATTERN = kernel_cumulative(np.eye(21), 1.0)[:, -1].real[:6]


def _exp_moments(z: np.ndarray, top: int) -> np.ndarray:
    """m_q(z) = int_0^1 t^q e^{z t} dt for q = 0..top, shape (len(z), top+1)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty((z.size, top + 1), dtype=complex)
    small = np.abs(z) <= 4.0
    if small.any():
        t = 0.5 * (_GL_X + 1)
        e = np.exp(np.outer(z[small], t)) * (0.5 * _GL_W)
        out[small] = e @ (t[:, None] ** np.arange(top + 1))
    big = ~small
    if big.any():
        zb = z[big]
        ez = np.exp(zb)
        m = (ez - 1) / zb
        out[big, 0] = m
        for q in range(1, top + 1):
            m = (ez - q * m) / zb
            out[big, q] = m
    return out


def _stencil_basis(start: int, width: int) -> np.ndarray:
    """C with l_m(t) = sum_q C[m, q] t^q on nodes start..start+width-1."""
    nodes = np.arange(start, start + width, dtype=float)
    return np.linalg.inv(np.vander(nodes, width, increasing=True).T)


def exp_quadrature(z, n_nodes: int, h: float, width: int = 6) -> np.ndarray:
    """Node factors rho_i(z) for int f(x) e^{sigma x} dx = sum_i f_i e^{sigma x_i} rho_i(sigma h).

    The local interpolant of ``kernel_cumulative`` is integrated exactly
    against the exponential, so the rule stays accurate when sigma h is
    large (rapidly oscillating modes).  At z = 0 it reduces to
    ``end_corrected_weights``.  Returns shape (len(z), n_nodes).
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if n_nodes < 16:
        raise ValueError("need at least 16 nodes")
    lead = width // 2 - 1
    mom = _exp_moments(z, width - 1) * h
    omega = {st: mom @ _stencil_basis(st, width).T for st in range(-(width - 1), 1)}
    # interior nodes: cells c = i - lead - 1 .. i + lead, all with start c - lead
    rho_int = sum(np.exp(z * d) * omega[-lead][:, lead - d] for d in range(-(width - 1 - lead), lead + 1))
    rho = np.repeat(rho_int[:, None], n_nodes, axis=1)
    n_cells = n_nodes - 1
    ends = list(range(8)) + list(range(n_nodes - 8, n_nodes))
    for i in ends:
        acc = np.zeros(z.size, dtype=complex)
        for c in range(max(0, i - width), min(n_cells, i + width)):
            start = min(max(c - lead, 0), n_nodes - width)
            m = i - start
            if 0 <= m < width:
                acc += np.exp(z * (c - i)) * omega[start - c][:, m]
        rho[:, i] = acc
    return rho


def sample(layout: Layout, fn: FieldFunction, test_class: bool = False) -> StateField1D:
    return StateField1D.from_function(layout, fn, test_class)
