import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from drudespec import (
    DomainError,
    GeneralizedFourierTransform,
    StateField1D,
    ZoneKind,
    adjoint,
    collocated_layout,
    forward,
    mode_field,
    spectral_grid,
    stone_interval,
)
from drudespec.checks import random_fields, round_trip
from drudespec.transform import (
    SpectralCoeffs,
    StateField2D,
    forward_2d,
    fourier_y,
    inverse_fourier_y,
    project,
    project_divfree,
    spectral_measure_interval,
)


def grid_for(p, k, layout, **kw):
    return spectral_grid(p, k, x_spacing=layout.h, x_extent=layout.L, **kw)


def gradient_field(layout, k, centre=-5.0):
    """H = grad_k phi on the vacuum side, phi a Gaussian far from the interface."""

    def fn(comp, x, side):
        x = np.asarray(x, dtype=float)
        phi = np.exp(-((x - centre) ** 2))
        if side < 0 and comp == "Hx":
            return -2 * (x - centre) * phi + 0j
        if side < 0 and comp == "Hy":
            return 1j * k * phi
        return np.zeros(x.shape, dtype=complex)

    return StateField1D.from_function(layout, fn)


class TestGrid:
    @pytest.mark.parametrize("fac", [0.3, 0.99, 1.0])
    def test_no_point_masses_below_kc(self, medium, cc, fac):
        assert spectral_grid(medium, fac * cc.kc).point_masses == ()

    def test_plasmon_masses_above_kc(self, medium, cc):
        k = 2 * cc.kc
        lam = float(cc.lambdaE(k))
        assert spectral_grid(medium, k).point_masses == (-lam, lam)

    def test_symmetric_and_ordered(self, medium, cc):
        g = spectral_grid(medium, 0.5 * cc.kc)
        lams = np.concatenate([s.lam for s in g.segments])
        assert np.all(np.diff(lams) > 0)
        assert np.allclose(lams, -lams[::-1])
        assert np.all(np.concatenate([s.weights for s in g.segments]) > 0)

    def test_excluded_points_are_cut(self, medium, cc):
        g = spectral_grid(medium, 0.5 * cc.kc)
        lams = np.abs(np.concatenate([s.lam for s in g.segments]))
        assert lams.min() >= g.lambda_lo
        assert np.abs(lams - medium.omega_m).min() >= g.delta

    @pytest.mark.parametrize("kw", [{"delta": 0.0}, {"lambda_min": -1.0}, {"window": (1.0, 0.5)}])
    def test_bad_arguments(self, medium, kw):
        with pytest.raises(DomainError):
            spectral_grid(medium, 1.0, **kw)


class TestForwardAdjoint:
    def test_zero_state(self, medium, small_layout):
        g = grid_for(medium, 1.0, small_layout)
        c = forward(medium, 1.0, StateField1D(small_layout), g)
        assert c.norm2() == 0
        assert not np.any(adjoint(medium, 1.0, c, small_layout).values)

    @pytest.mark.parametrize("fac", [1.5, 2.0, 4.0])
    def test_plasmon_is_a_point_mass(self, medium, cc, small_layout, fac):
        k = fac * cc.kc
        lam = float(cc.lambdaE(k))
        c = forward(medium, k, mode_field(medium, k, lam, 0).sample(small_layout), grid_for(medium, k, small_layout))
        assert abs(c.point_mass[lam]) == pytest.approx(1.0, abs=1e-3)
        assert abs(c.point_mass[-lam]) <= 1e-6
        assert c.continuous_norm2() <= 1e-3

    def test_point_mass_synthesizes_the_plasmon(self, medium, cc, small_layout):
        k = 2 * cc.kc
        lam = float(cc.lambdaE(k))
        c = SpectralCoeffs.zeros(grid_for(medium, k, small_layout))
        c.point_mass[lam] = 1.0
        w = mode_field(medium, k, lam, 0).sample(small_layout)
        assert (adjoint(medium, k, c, small_layout) - w).norm(medium) <= 1e-6

    @pytest.mark.parametrize("fac", [0.4, 0.9, 1.6])
    def test_parseval_and_round_trip(self, medium, cc, small_layout, fac):
        k = fac * cc.kc
        for f in random_fields(2, seed=7):
            pars, rec = round_trip(medium, k, f.sample(small_layout, k))
            assert pars <= 1e-3
            assert rec <= 1e-2

    def test_forward_of_adjoint(self, medium, cc):
        layout = collocated_layout(20.0, 1000)
        k = 0.5 * cc.kc
        g = grid_for(medium, k, layout)
        c = SpectralCoeffs.zeros(g)
        seg, vals = next((s, v) for s, v in zip(g.segments, c.values) if s.zone is ZoneKind.DD and s.a > 0)
        mid = seg.a + 1.0
        vals[1][:] = np.exp(-(((seg.lam - mid) / 0.3) ** 2))
        back = forward(medium, k, adjoint(medium, k, c, layout), g)
        assert (back - c).norm() <= 1e-3 * c.norm()

    def test_linear(self, medium, cc, small_layout, rng):
        k = 0.7 * cc.kc
        g = grid_for(medium, k, small_layout)
        f1, f2 = (f.sample(small_layout, k) for f in random_fields(2, seed=3))
        a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        lhs = forward(medium, k, f1 * a + f2 * b, g)
        rhs = forward(medium, k, f1, g) * a + forward(medium, k, f2, g) * b
        assert (lhs - rhs).norm() <= 1e-12 * lhs.norm()

    def test_functional_calculus(self, medium, cc, small_layout, reference_field):
        # ||f(A) U||^2 = int |f(lam)|^2 d mu_U and f = 1 returns the projection
        k = 0.9 * cc.kc
        g = grid_for(medium, k, small_layout)
        c = forward(medium, k, reference_field.sample(small_layout, k), g)
        assert (c.apply(lambda lam: np.ones_like(lam)) - c).norm() == 0
        half = c.apply(lambda lam: np.where(lam > 0, 1.0, 0.0))
        # measure() leaves out the flat extension of the first node over (0, lambda_lo)
        assert half.norm2() == pytest.approx(c.measure(0.0, np.inf), rel=1e-8)

    def test_different_grids_do_not_combine(self, medium, small_layout):
        a = SpectralCoeffs.zeros(grid_for(medium, 1.0, small_layout))
        b = SpectralCoeffs.zeros(grid_for(medium, 1.0, small_layout))
        with pytest.raises(ValueError):
            a + b


class TestSpectralMeasure:
    def test_gap_is_empty(self, medium, cc, small_layout, reference_field):
        k = 2 * cc.kc
        u = reference_field.sample(small_layout, k)
        lo, hi = float(cc.lambdaI(k)), float(cc.lambdaE(k))
        assert spectral_measure_interval(medium, k, u, lo + 0.05, hi - 0.05) <= 1e-10

    def test_additive(self, medium, cc, small_layout, reference_field):
        k = 2 * cc.kc
        u = reference_field.sample(small_layout, k)
        parts = [spectral_measure_interval(medium, k, u, a, b) for a, b in ((1.5, 2.0), (2.0, 2.5))]
        assert sum(parts) == pytest.approx(spectral_measure_interval(medium, k, u, 1.5, 2.5), rel=1e-10)

    def test_matches_stone(self, medium, cc, small_layout, reference_field):
        k = 2 * cc.kc
        u = reference_field.sample(small_layout, k)
        m1 = spectral_measure_interval(medium, k, u, 1.5, 2.0)
        assert stone_interval(medium, k, u, 1.5, 2.0) == pytest.approx(m1, rel=2e-2)

    @pytest.mark.parametrize("a, b", [(1.0, 1.5), (-0.1, 0.1), (0.5, 0.5)])
    def test_rejects_bad_intervals(self, medium, small_layout, a, b):
        u = StateField1D(small_layout)
        with pytest.raises(DomainError):
            spectral_measure_interval(medium, 1.0, u, a, b)


class TestProjection:
    def test_identity_on_divfree(self, medium, cc, small_layout, reference_field):
        for fac in (0.5, 2.0):
            u = reference_field.sample(small_layout, fac * cc.kc)
            assert (project_divfree(medium, fac * cc.kc, u) - u).norm(medium) <= 1e-8 * u.norm(medium)

    def test_kills_gradients(self, medium, small_layout):
        u = gradient_field(small_layout, 1.3)
        assert project_divfree(medium, 1.3, u).norm(medium) <= 1e-6 * u.norm(medium)

    def test_idempotent(self, medium, small_layout, rng):
        # potentials decay like exp(-|k| x): |k| L must be large for the box not to clip them
        amp = rng.normal(size=(6, 2)) @ np.array([1, 1j])

        def smooth(comp, x, side):
            i = ("E", "Hx", "Hy", "J", "Kx", "Ky").index(comp)
            return amp[i] * np.exp(-((np.asarray(x) - 0.7 * i + 1.5) ** 2))

        u = StateField1D.from_function(small_layout, smooth)
        once = project_divfree(medium, 2.0, u)
        assert (project_divfree(medium, 2.0, once) - once).norm(medium) <= 1e-6 * once.norm(medium)

    def test_removes_exactly_what_forward_ignores(self, medium, small_layout, reference_field):
        k = 1.3
        g = grid_for(medium, k, small_layout)
        u = reference_field.sample(small_layout, k) + gradient_field(small_layout, k)
        c_full = forward(medium, k, u, g)
        c_proj = forward(medium, k, project_divfree(medium, k, u), g)
        assert (c_full - c_proj).norm() <= 1e-6 * c_full.norm()

    def test_k0_projection(self, small_layout, rng):
        u = StateField1D(small_layout, rng.normal(size=small_layout.size))
        out = project(None, 0.0, u)
        for side in (-1, 1):
            assert not np.any(out.block("Hx", side))
        assert np.array_equal(out.block("E", 1), u.block("E", 1))

    def test_needs_nonzero_k(self, medium, small_layout):
        with pytest.raises(DomainError):
            project_divfree(medium, 0.0, StateField1D(small_layout))


class TestTwoDimensional:
    @pytest.fixture
    def y(self):
        return np.arange(16) * 0.5 - 4.0

    def test_fourier_y_is_unitary(self, small_layout, y, rng):
        vals = rng.normal(size=(y.size, small_layout.size)) + 1j * rng.normal(size=(y.size, small_layout.size))
        u = StateField2D(small_layout, y, vals)
        ks, hat = fourier_y(u)
        dk = ks[1] - ks[0]
        assert dk * np.sum(np.abs(hat) ** 2) == pytest.approx(u.hy * np.sum(np.abs(vals) ** 2), rel=1e-12)
        back = inverse_fourier_y(small_layout, y, ks, hat)
        assert np.allclose(back.values, vals, atol=1e-12)

    def test_real_fields_have_hermitian_spectra(self, small_layout, y, rng):
        u = StateField2D(small_layout, y, rng.normal(size=(y.size, small_layout.size)))
        ks, hat = fourier_y(u)
        order = np.argsort(ks)
        ks, hat = ks[order], hat[order]
        # the FFT grid is -8..7 in units of dk: pair k with -k away from the Nyquist row
        for i in range(1, ks.size):
            j = int(np.argmin(np.abs(ks + ks[i])))
            assert np.allclose(hat[j], np.conj(hat[i]) * np.exp(-2j * ks[i] * y[0]), atol=1e-12)

    def test_separable_parseval(self, medium, small_layout, y, reference_field):
        # build U(x, y) from hat U_k = a(k) U_k with U_k div-free at every k
        ks = 2 * np.pi * np.fft.fftfreq(y.size, y[1] - y[0])
        amp = ks * np.exp(-(ks**2))
        hat = np.array([a * reference_field.sample(small_layout, k).values for a, k in zip(amp, ks)])
        u2d = inverse_fourier_y(small_layout, y, ks, hat)
        keep = {float(k) for k, a in zip(ks, amp) if abs(a) > 1e-6}
        per_k = forward_2d(medium, u2d, k_select=lambda k: float(k) in keep)
        dk = abs(ks[1] - ks[0])
        total = dk * sum(c.norm2() for _, c in per_k)
        assert total == pytest.approx(u2d.norm(medium) ** 2, rel=1e-2)

    def test_bad_y_grid(self, small_layout):
        with pytest.raises(ValueError):
            StateField2D(small_layout, np.array([0.0, 1.0, 3.0]))


class TestEstimator:
    def test_params_roundtrip(self):
        est = GeneralizedFourierTransform(k=2.0, omega_m=1.2, nodes=12)
        params = est.get_params()
        assert params["k"] == 2.0 and params["nodes"] == 12
        assert clone(est).get_params() == params

    def test_fit_transform_inverse(self, medium, cc, small_layout, reference_field):
        k = 0.9 * cc.kc
        u = reference_field.sample(small_layout, k)
        est = GeneralizedFourierTransform(k=k, omega_m=medium.omega_m).fit(u)
        assert est.n_point_masses_ == 0
        c = est.transform(u)
        assert c.norm2() == pytest.approx(u.norm(medium) ** 2, rel=1e-3)
        assert (est.inverse_transform(c) - est.project(u)).norm(medium) <= 1e-2 * u.norm(medium)

    def test_not_fitted(self, small_layout):
        with pytest.raises(NotFittedError):
            GeneralizedFourierTransform().transform(StateField1D(small_layout))

    def test_validation(self, small_layout, layout):
        est = GeneralizedFourierTransform().fit(StateField1D(small_layout))
        with pytest.raises(TypeError):
            est.transform(np.zeros(small_layout.size))
        with pytest.raises(ValueError):
            est.transform(StateField1D(layout))
        bad = StateField1D(small_layout)
        bad.values[0] = np.nan
        with pytest.raises(ValueError):
            est.transform(bad)
        with pytest.raises(ValueError):
            GeneralizedFourierTransform(nodes=1).fit(StateField1D(small_layout))

    def test_foreign_coefficients(self, medium, small_layout):
        est = GeneralizedFourierTransform().fit(StateField1D(small_layout))
        with pytest.raises(ValueError):
            est.inverse_transform(SpectralCoeffs.zeros(grid_for(medium, 1.0, small_layout)))

    def test_parameter_change_needs_refit(self, small_layout):
        est = GeneralizedFourierTransform(k=1.0).fit(StateField1D(small_layout))
        est.set_params(k=2.0)
        assert est.get_params()["k"] == 2.0
        assert math.isclose(est.grid_.k, 1.0)
