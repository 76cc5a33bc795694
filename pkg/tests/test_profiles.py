import numpy as np
import pytest
from scipy.integrate import quad

from fracpat.profiles import mollifier, smooth_step, weight, window
from fracpat.sampled import SampledFunction


class TestMollifier:
    def test_normalized_and_even(self):
        phi = mollifier()
        total = quad(lambda x: float(phi(x)), -1, 1, epsabs=1e-14, limit=200)[0]
        assert total == pytest.approx(1.0, abs=1e-10)
        x = np.linspace(-1.2, 1.2, 101)
        np.testing.assert_array_equal(phi(x), phi(-x))
        assert np.all(phi(x) >= 0)
        assert np.all(phi(np.array([-1.0, 1.0, 1.3])) == 0)

    def test_plateau_bound(self):
        phi = mollifier()
        x = np.linspace(-0.5, 0.5, 2001)
        assert phi(x).min() >= 0.5
        assert float(phi(np.array(0.5))) == pytest.approx(0.5937, abs=1e-4)

    def test_cdf(self):
        phi = mollifier()
        assert float(phi.cdf(0.0)) == pytest.approx(0.5, abs=1e-14)
        for x in (-0.7, -0.2, 0.3, 0.9):
            ref = quad(lambda y: float(phi(y)), -1, x, epsabs=1e-14)[0]
            assert float(phi.cdf(x)) == pytest.approx(ref, abs=1e-11)
        assert float(phi.cdf(-2)) == 0.0 and float(phi.cdf(2)) == 1.0

    def test_fourier_table(self):
        phi = mollifier()
        xi = np.array([0.0, 0.37, 1.3195, 5.5, 40.25, 127.9])
        np.testing.assert_allclose(phi.fourier(xi), phi.fourier_direct(xi), atol=1e-9)
        assert phi.fourier(np.array([0.0]))[0] == pytest.approx(1.0, abs=1e-12)
        assert phi.fourier(np.array([200.0]))[0] == 0.0

    def test_fourier_derivative_zero(self):
        phi = mollifier()
        d = (phi.fourier_direct(1e-4) - phi.fourier_direct(-1e-4)) / 2e-4
        assert abs(d[0]) < 1e-10


class TestWindow:
    def test_shape(self):
        tau = window()
        assert np.all(tau(np.linspace(1, 2, 50)) == 1.0)
        assert np.all(tau(np.array([0.1, 0.5, 4.0, 5.0])) == 0.0)
        x = np.linspace(0, 5, 5001)
        v = tau(x)
        assert v.min() >= 0 and v.max() <= 1
        up = v[(x > 0.5) & (x < 1)]
        down = v[(x > 2) & (x < 4)]
        assert np.all(np.diff(up) >= 0) and np.all(np.diff(down) <= 0)

    def test_l1(self):
        tau = window()
        ref = quad(lambda x: float(tau(x)), 0.5, 4, points=[1, 2], epsabs=1e-13)[0]
        assert tau.l1_norm == pytest.approx(ref, abs=1e-10)

    def test_scaled_support(self):
        t3 = window().scaled(3)
        assert float(t3(np.array(1 / 8))) == 1.0
        assert float(t3(np.array(2.0 ** -4))) == 0.0 and float(t3(np.array(0.5))) == 0.0


class TestWeight:
    def test_invariants(self):
        w = weight()
        total = quad(lambda x: float(w(x)), 0, 1, epsabs=1e-14, limit=400)[0]
        assert total == pytest.approx(1.0, abs=1e-10)
        x = np.linspace(0, 1, 20001)
        assert w(x).max() == pytest.approx(2.0, abs=1e-6)
        assert w(np.array([0.0, 1.0])).max() == 0.0
        assert 0 < w.a and w.b < 1

    def test_integral_table(self):
        w = weight()
        assert float(w.integral(0.0, 1.0)) == pytest.approx(1.0, abs=1e-12)
        for lo, hi in ((0.1, 0.3), (0.45, 0.5), (0.2, 0.95)):
            ref = quad(lambda x: float(w(x)), lo, hi, epsabs=1e-14, limit=200)[0]
            assert float(w.integral(lo, hi)) == pytest.approx(ref, abs=1e-12)


def test_smooth_step_symmetry():
    x = np.linspace(-0.5, 1.5, 401)
    np.testing.assert_allclose(smooth_step(x) + smooth_step(1 - x), 1.0, atol=1e-15)


class TestSampled:
    def test_spline_reproduces_cubic_integral(self):
        f = SampledFunction.from_callable(lambda x: np.sin(3 * x), 0.0, 2.0, 401)
        assert f.integral() == pytest.approx((1 - np.cos(6)) / 3, abs=1e-8)
        assert float(f(np.array(0.731))) == pytest.approx(np.sin(3 * 0.731), abs=1e-7)
        assert float(f(np.array(2.5))) == 0.0

    def test_arithmetic_linear(self):
        f = SampledFunction.from_callable(np.cos, 0, 1, 65)
        g = SampledFunction.from_callable(np.exp, 0, 1, 65)
        y = np.linspace(0, 1, 33)
        np.testing.assert_allclose((f + g)(y), f(y) + g(y), atol=1e-14)
        np.testing.assert_allclose((f - g.scaled(2.0))(y), f(y) - 2 * g(y), atol=1e-13)

    def test_spline_fourier_matches_quadrature(self):
        phi = mollifier()
        f = SampledFunction.from_callable(lambda x: phi(x / 0.4), -0.5, 0.5, 129)
        xi = np.array([0.0, 0.3, 2.0, 17.5, -9.25])
        gx, gw = np.polynomial.legendre.leggauss(8)
        pts = (f.grid[:-1, None] + 0.5 * f.step * (gx + 1)).ravel()
        wts = np.tile(0.5 * f.step * gw, f.n - 1) * f(pts)
        ref = np.exp(-2j * np.pi * np.outer(xi, pts)) @ wts
        np.testing.assert_allclose(f.spline_fourier(xi), ref, atol=1e-14)

    def test_hat_fourier_close_to_spline(self):
        f = SampledFunction.from_callable(lambda x: np.exp(-50 * x * x), -1, 1, 513)
        xi = np.linspace(-5, 5, 11)
        # hat and spline interpolants differ by O(step**2)
        np.testing.assert_allclose(f.fourier(xi), f.spline_fourier(xi), atol=10 * f.step ** 2)
