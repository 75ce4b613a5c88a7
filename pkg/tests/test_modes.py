import math

import numpy as np
import pytest

from drudespec import DomainError, ModeField, ZoneKind, collocated_layout, mode_field
from drudespec.fields import staggered_layout
from drudespec.material import Side, mu_of
from drudespec.modes import mode_batch, mode_field_2d, mode_scalar
from drudespec.oracle import discretize
from drudespec.sturm import green_imag_limit, interface_data, psi
from drudespec.zones import MODE_INDICES

OPEN = [ZoneKind.DD, ZoneKind.DE, ZoneKind.DI, ZoneKind.EI]


def admissible(kind):
    return [(kind, j) for j in MODE_INDICES[kind]]


ZONE_MODES = [pair for kind in OPEN for pair in admissible(kind)]


class TestScalarProfile:
    @pytest.mark.parametrize("kind, j", ZONE_MODES)
    def test_normalized_decaying_solution(self, medium, zone_sample, kind, j):
        k, lam, zone = zone_sample(medium, kind)
        d = interface_data(medium, k, lam, zone)
        # w_{+-1} = |lam theta^-+ / (pi mu^-+)|^(1/2) psi_{+-1} / |W|
        ratio = d.ratio_plus if j == -1 else d.ratio_minus
        scale = math.sqrt(abs(lam * ratio) / math.pi) / abs(d.wronskian)
        xs = np.linspace(-4, 4, 17)
        expected = scale * psi(medium, k, lam, j, xs, zone)
        assert np.allclose(mode_scalar(medium, k, lam, j, xs, zone), expected, rtol=1e-13)

    def test_dd_minus_side_is_pure_oscillation(self, medium, zone_sample):
        k, lam, zone = zone_sample(medium, ZoneKind.DD)
        xs = -np.linspace(0.0, 30.0, 50)
        amp = np.abs(mode_scalar(medium, k, lam, -1, xs, zone))
        assert np.allclose(amp, amp[0], rtol=1e-12)

    @pytest.mark.parametrize("fac", [1.2, 3.0])
    def test_plasmon_real_and_decaying(self, medium, cc, fac):
        k = fac * cc.kc
        lam = float(cc.lambdaE(k))
        xs = np.linspace(0.0, 8.0, 30)
        for sgn in (1, -1):
            w = mode_scalar(medium, k, lam, 0, sgn * xs)
            assert np.all(w.imag == 0) and np.all(w.real > 0)
            assert np.all(np.diff(w.real) < 0)

    @pytest.mark.parametrize("kind", OPEN)
    def test_green_factorization(self, medium, zone_sample, rng, kind):
        for sign in (1, -1):
            k, lam, zone = zone_sample(medium, kind)
            lam *= sign
            x, xp = rng.uniform(-3, 3, size=(2, 12))
            lhs = green_imag_limit(medium, k, lam, x, xp, zone)
            rhs = sum(np.conj(mode_scalar(medium, k, lam, j, x, zone)) * mode_scalar(medium, k, lam, j, xp, zone)
                      for j in MODE_INDICES[kind])
            assert np.max(np.abs(lhs - rhs)) <= 1e-8

    @pytest.mark.parametrize("kind", [ZoneKind.DD, ZoneKind.DI])
    def test_linear_independence(self, medium, zone_sample, kind):
        k, lam, zone = zone_sample(medium, kind)
        xs = np.linspace(-5, 5, 2001)
        w = np.array([mode_scalar(medium, k, lam, j, xs, zone) for j in (-1, 1)])
        gram = (w.conj() @ w.T) * (xs[1] - xs[0])
        assert np.linalg.cond(gram) < 1e6


class TestVectorField:
    @pytest.mark.parametrize("kind, j", ZONE_MODES)
    def test_eigen_residual(self, medium, zone_sample, kind, j):
        k, lam, zone = zone_sample(medium, kind)
        mode = ModeField(medium, k, -lam, j, zone)
        for side in (-1, 1):
            xs = side * np.linspace(0.01, 4.0, 25)
            u = mode(xs, side)
            scale = max(np.max(np.abs(v)) for v in u.values()) * (1 + lam)
            for comp, r in mode.eigen_residual(xs, side).items():
                assert np.max(np.abs(r)) <= 1e-8 * scale, comp

    @pytest.mark.parametrize("kind, j", ZONE_MODES)
    def test_transmission(self, medium, zone_sample, kind, j):
        k, lam, zone = zone_sample(medium, kind)
        mode = ModeField(medium, k, lam, j, zone)
        for comp in ("E", "Hy"):
            left, right = mode.component(comp, 0.0, -1)[0], mode.component(comp, 0.0, 1)[0]
            assert abs(left - right) <= 1e-10 * max(abs(left), abs(right))

    def test_vectorizer_relations(self, medium, zone_sample):
        k, lam, zone = zone_sample(medium, ZoneKind.DE)
        mode = ModeField(medium, k, lam, 1, zone)
        for side in (-1, 1):
            xs = side * np.linspace(0.1, 3.0, 9)
            mu = complex(mu_of(medium, lam, Side(side)))
            e, de = mode.component("E", xs, side), mode.component("E", xs, side, 1)
            curl = (1j * k * e, -de)
            assert np.allclose(mode.component("Hx", xs, side), -1j / (mu * lam) * curl[0], rtol=1e-13)
            assert np.allclose(mode.component("Hy", xs, side), -1j / (mu * lam) * curl[1], rtol=1e-13)
            if side > 0:
                kk = medium.mu0 * medium.omega_m**2 / (mu * lam**2)
                assert np.allclose(mode.component("J", xs, side), 1j * medium.eps0 * medium.omega_e**2 / lam * e)
                assert np.allclose(mode.component("Kx", xs, side), kk * curl[0], rtol=1e-13)
                assert np.allclose(mode.component("Ky", xs, side), kk * curl[1], rtol=1e-13)
            else:
                for comp in ("J", "Kx", "Ky"):
                    assert not np.any(mode.component(comp, xs, side))

    @pytest.mark.parametrize("fac", [1.5, 2.0, 4.0])
    def test_plasmon_unit_norm_and_tail(self, medium, cc, fac):
        k = fac * cc.kc
        lam = float(cc.lambdaE(k))
        d = interface_data(medium, k, lam, ZoneKind.EE)
        decay = min(d.theta_minus.real, d.theta_plus.real)
        u = mode_field(medium, k, lam, 0).sample(collocated_layout(40.0 / decay, 4000))
        assert u.norm(medium) == pytest.approx(1.0, abs=1e-6)
        tail = u.copy()
        for b in u.layout.blocks:
            tail.set_block(b.comp, b.side, np.where(np.abs(b.x) > 20.0 / decay, u.block(b.comp, b.side), 0))
        assert tail.norm(medium) ** 2 <= 1e-12

    def test_plasmon_is_oracle_eigenvector(self, medium, cc):
        k = 2.0 * cc.kc
        lam = float(cc.lambdaE(k))
        ham = discretize(medium, k, staggered_layout(15.0, 3000))
        w = mode_field(medium, k, lam, 0).sample(ham.layout)
        resid = ham.apply(w) - w * lam
        assert resid.norm(medium) / w.norm(medium) <= 1e-4

    def test_sample_matches_component(self, medium, small_layout, zone_sample):
        k, lam, zone = zone_sample(medium, ZoneKind.DD)
        mode = ModeField(medium, k, lam, -1, zone)
        u = mode.sample(small_layout)
        for b in small_layout.blocks:
            assert np.array_equal(u.block(b.comp, b.side), mode.component(b.comp, b.x, b.side))


class TestTwoDimensional:
    def test_y_zero(self, medium, zone_sample):
        k, lam, zone = zone_sample(medium, ZoneKind.DD)
        xs = np.linspace(-3, 3, 7)
        w2 = mode_field_2d(medium, k, lam, 1, xs, 0.0, zone)
        w1 = ModeField(medium, k, lam, 1, zone)(xs)
        for comp in w1:
            assert np.allclose(w2[comp], w1[comp] / math.sqrt(2 * math.pi), rtol=1e-14)

    def test_period_in_y(self, medium, zone_sample):
        k, lam, zone = zone_sample(medium, ZoneKind.DE)
        x, y = np.meshgrid(np.linspace(-2, 2, 5), np.linspace(-1, 1, 4))
        a = mode_field_2d(medium, k, lam, 1, x, y, zone)
        b = mode_field_2d(medium, k, lam, 1, x, y + 2 * math.pi / k, zone)
        for comp in a:
            assert np.allclose(a[comp], b[comp], rtol=1e-10, atol=1e-14)

    def test_k_reflection(self, medium, zone_sample):
        # Theta is even in k, so W_{-k}(x, -y) flips the sign of the x-components only
        k, lam, zone = zone_sample(medium, ZoneKind.DI)
        x, y = np.meshgrid(np.linspace(-2, 2, 5), np.linspace(-1, 1, 4))
        a = mode_field_2d(medium, k, lam, -1, x, y, zone)
        b = mode_field_2d(medium, -k, lam, -1, x, -y, zone)
        for comp in a:
            sign = -1 if comp in ("Hx", "Kx") else 1
            assert np.allclose(b[comp], sign * a[comp], rtol=1e-13, atol=1e-15)


class TestErrors:
    @pytest.mark.parametrize("kind, bad", [(ZoneKind.DE, -1), (ZoneKind.EI, 1), (ZoneKind.DD, 0)])
    def test_inadmissible_index(self, medium, zone_sample, kind, bad):
        k, lam, zone = zone_sample(medium, kind)
        with pytest.raises(DomainError):
            ModeField(medium, k, lam, bad, zone)

    @pytest.mark.parametrize("lam", [0.0, 1.2, -1.2])
    def test_excluded_lambda(self, medium, lam):
        with pytest.raises(DomainError):
            ModeField(medium, 1.0, lam, 1)

    def test_mixed_zone_batch(self, medium, cc):
        with pytest.raises(DomainError):
            mode_batch(medium, 0.5, [0.3, 3.0], 1)
