"""Time evolution by spectral synthesis.

Free evolution multiplies the generalized Fourier coefficients by
e^{-i lam t}.  For a harmonic drive G(t) = e^{-i omega t} G_omega switched
on at t = 0 the Duhamel integral is diagonal as well:

    U^(lam, t) = phi_omega(lam, t) G^(lam),
    phi_omega(lam, t) = i (e^{-i lam t} - e^{-i omega t}) / (lam - omega),

so |U^| <= t |G^| and the response at lam = omega grows linearly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DomainError
from .fields import Layout, StateField1D
from .material import MediumParams
from .transform import (
    SpectralCoeffs,
    SpectralGrid,
    StateField2D,
    adjoint,
    forward,
    fourier_y,
    inverse_fourier_y,
    project,
    spectral_grid,
)

_SERIES_CUT = 1e-6


def phi_omega(lam, omega: float, t: float):
    """Duhamel multiplier i (e^{-i lam t} - e^{-i omega t}) / (lam - omega).

    For |lam - omega| t < 1e-6 the cancellation is avoided with
    t e^{-i omega t} (1 - i d t / 2 - d^2 t^2 / 6), d = lam - omega.
    """
    if t < 0:
        raise DomainError("phi_omega needs t >= 0")
    lam = np.asarray(lam, dtype=float)
    d = lam - omega
    small = np.abs(d) * t < _SERIES_CUT
    safe = np.where(small, 1.0, d)
    with np.errstate(invalid="ignore"):
        exact = 1j * (np.exp(-1j * lam * t) - np.exp(-1j * omega * t)) / safe
    x = d * t
    series = t * np.exp(-1j * omega * t) * (1 - 0.5j * x - x * x / 6)
    out = np.where(small, series, exact)
    return out if out.ndim else complex(out)


@dataclass
class DriveSpec:
    """Harmonic source e^{-i omega t} G for t >= 0; G is projected on construction."""

    p: MediumParams
    k: float
    omega: float
    g_field: StateField1D
    raw_field: StateField1D = field(init=False, repr=False)

    def __post_init__(self):
        if not math.isfinite(self.omega):
            raise DomainError("omega must be finite")
        self.raw_field = self.g_field
        self.g_field = project(self.p, self.k, self.g_field)


def _times(times) -> list[float]:
    ts = [float(t) for t in np.atleast_1d(times)]
    if any(t < 0 for t in ts):
        raise DomainError("times must be non-negative")
    return ts


def _grid_for(p, k, u: StateField1D, t_max: float, grid: SpectralGrid | None, **kw) -> SpectralGrid:
    if grid is not None:
        if grid.t_max < t_max:
            raise DomainError(f"spectral grid resolves t <= {grid.t_max}, asked for {t_max}")
        return grid
    return spectral_grid(p, k, x_spacing=u.layout.h, x_extent=u.layout.L, t_max=t_max, **kw)


def free_coefficients(coeffs: SpectralCoeffs, t: float) -> SpectralCoeffs:
    return coeffs.apply(lambda lam: np.exp(-1j * np.asarray(lam) * t))


def free_evolve(
    p: MediumParams,
    k: float,
    u0: StateField1D,
    times: Iterable[float],
    *,
    layout: Layout | None = None,
    grid: SpectralGrid | None = None,
    **grid_kwargs,
) -> dict[float, StateField1D]:
    """e^{-i A_k t} P_k U0 for each t, sampled on ``layout`` (default: U0's)."""
    ts = _times(times)
    grid = _grid_for(p, k, u0, max(ts), grid, **grid_kwargs)
    coeffs = forward(p, k, u0, grid)
    target = layout or u0.layout
    return {t: adjoint(p, k, free_coefficients(coeffs, t), target) for t in ts}


def driven_coefficients(drive_coeffs: SpectralCoeffs, omega: float, t: float) -> SpectralCoeffs:
    """phi_omega(lam, t) G^(lam); point masses use the same closed form."""
    return drive_coeffs.apply(lambda lam: phi_omega(lam, omega, t))


def driven_evolve(
    drive: DriveSpec,
    times: Iterable[float],
    *,
    u0: StateField1D | None = None,
    layout: Layout | None = None,
    grid: SpectralGrid | None = None,
    **grid_kwargs,
) -> dict[float, StateField1D]:
    """Solution of dU/dt + i A_k U = e^{-i omega t} G, U(0) = P U0 (default 0)."""
    p, k = drive.p, drive.k
    ts = _times(times)
    g = drive.g_field
    grid = _grid_for(p, k, g, max(ts), grid, **grid_kwargs)
    g_hat = forward(p, k, g, grid)
    u_hat = forward(p, k, u0, grid) if u0 is not None else None
    target = layout or g.layout
    out = {}
    for t in ts:
        c = driven_coefficients(g_hat, drive.omega, t)
        if u_hat is not None:
            c = c + free_coefficients(u_hat, t)
        out[t] = adjoint(p, k, c, target)
    return out


def driven_norms(drive: DriveSpec, times: Iterable[float], grid: SpectralGrid | None = None, **grid_kwargs):
    """||U(t)|| from the coefficients alone (Plancherel), no synthesis."""
    ts = _times(times)
    grid = _grid_for(drive.p, drive.k, drive.g_field, max(ts), grid, **grid_kwargs)
    g_hat = forward(drive.p, drive.k, drive.g_field, grid)
    return np.array([driven_coefficients(g_hat, drive.omega, t).norm() for t in ts])


def evolve_2d(
    p: MediumParams,
    u2d: StateField2D,
    times: Iterable[float],
    **grid_kwargs,
) -> dict[float, StateField2D]:
    """Free evolution of a 2D state: y-Fourier transform, per-k evolution, inverse."""
    ts = _times(times)
    ks, hat = fourier_y(u2d)
    evolved = {t: np.zeros_like(hat) for t in ts}
    for i, k in enumerate(ks):
        if not np.any(hat[i]):
            continue
        row = StateField1D(u2d.layout, hat[i])
        res = free_evolve(p, float(k), row, ts, **grid_kwargs)
        for t in ts:
            evolved[t][i] = res[t].values
    return {t: inverse_fourier_y(u2d.layout, u2d.y, ks, evolved[t]) for t in ts}


__all__ = [
    "DriveSpec",
    "driven_coefficients",
    "driven_evolve",
    "driven_norms",
    "evolve_2d",
    "free_coefficients",
    "free_evolve",
    "phi_omega",
]
