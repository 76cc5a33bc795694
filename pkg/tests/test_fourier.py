import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from fracpat.dyadic import DyadicSet
from fracpat.errors import AccuracyError, DivergenceError, ParameterError
from fracpat.fourier import (gap_integral, multiplier_l1, rho, s_energy, sobolev_norm, spectrum,
                             transform, varphi_tail_bound)
from fracpat.measure import GridMeasure, frostman, spectral_gap_measure
from fracpat.profiles import mollifier
from fracpat.sampled import SampledFunction
from fracpat.setgen import percolation, quarter_cantor

import oracles


def lebesgue_energy(s):
    return 2.0 / ((1 - s) * (2 - s))


class TestTransform:
    def test_lebesgue(self):
        xi = np.array([0.0, 0.5, 1.0, 2.75])
        ref = np.exp(-1j * np.pi * xi) * np.sinc(xi)
        np.testing.assert_allclose(transform(GridMeasure.lebesgue(6), xi), ref, atol=1e-14)

    @given(st.lists(st.floats(0, 1), min_size=8, max_size=8), st.floats(-40, 40))
    def test_matches_direct_integral(self, w, xi):
        mu = GridMeasure(3, w)
        ref = sum(wj * 8 * complex(quad(lambda x: math.cos(2 * math.pi * x * xi), j / 8, (j + 1) / 8)[0],
                                   -quad(lambda x: math.sin(2 * math.pi * x * xi), j / 8, (j + 1) / 8)[0])
                  for j, wj in enumerate(w))
        assert complex(transform(mu, xi)[0]) == pytest.approx(ref, abs=1e-10)

    def test_spectrum_hermitian(self):
        prof = spectrum(frostman(quarter_cantor(4), 0.5), 16.0, 0.25)
        assert prof.hermitian_defect() < 1e-15
        assert prof.frequencies.size == 129
        assert prof.step == 0.25
        assert prof.to_csv().splitlines()[0] == "xi,re,im,abs"


class TestEnergy:
    @pytest.mark.parametrize("s", [0.1, 0.3, 0.5, 0.8])
    def test_lebesgue_closed_form(self, s):
        mu = GridMeasure.lebesgue(7)
        assert s_energy(mu, s) == pytest.approx(lebesgue_energy(s), rel=1e-12)
        assert s_energy(mu, s, form="frequency") == pytest.approx(lebesgue_energy(s), rel=1e-9)

    def test_rho_matches_lebesgue(self):
        # exponent check: rho_s integral |sinc|^2 |xi|^(s - 1) is the Lebesgue energy
        s = 0.4
        f = lambda x: np.sinc(x) ** 2 * x ** (s - 1)
        val = 2 * rho(s) * sum(quad(f, k, k + 1, limit=200)[0] for k in range(0, 4000))
        assert val == pytest.approx(lebesgue_energy(s), rel=2e-3)

    def test_spatial_matches_bruteforce(self):
        mu = frostman(percolation(0.6, 4, 9), 0.7).normalized()
        s = 0.35
        ref = oracles.riesz_energy_pairs(mu.weights, s, sub=256)
        assert s_energy(mu, s) == pytest.approx(ref, rel=2e-3)

    @pytest.mark.parametrize("s", [0.3, 0.4])
    def test_forms_agree_on_cantor(self, s):
        mu = frostman(quarter_cantor(5), 0.5)
        a = s_energy(mu, s)
        b = s_energy(mu, s, form="frequency")
        assert a == pytest.approx(b, rel=1e-6)

    def test_s_range(self):
        with pytest.raises(ParameterError):
            s_energy(GridMeasure.lebesgue(3), 1.0)
        with pytest.raises(ParameterError):
            s_energy(GridMeasure.lebesgue(3), 0.5, form="bogus")


class TestSobolev:
    def test_zero_index_is_l2(self):
        mu = frostman(percolation(0.7, 6, 1), 0.9)
        l = mu.cell_length
        assert sobolev_norm(mu, 0.0, squared=True) == pytest.approx(float(np.sum(mu.weights ** 2)) / l, rel=1e-10)

    def test_sampled_zero_index(self):
        f = SampledFunction.from_callable(lambda x: np.exp(-30 * (x - 0.5) ** 2), 0, 1, 257)
        # Parseval for the hat interpolant: exact piecewise-linear L2 norm, including
        # the half hats that ramp to zero one step beyond each end
        v, h = f.values, f.step
        l2 = h / 3 * float(np.sum(v[:-1] ** 2 + v[:-1] * v[1:] + v[1:] ** 2) + v[0] ** 2 + v[-1] ** 2)
        assert sobolev_norm(f, 0.0, squared=True) == pytest.approx(l2, rel=1e-9)

    def test_negative_index_decreases(self):
        mu = frostman(quarter_cantor(5), 0.5)
        vals = [sobolev_norm(mu, -g) for g in (0.05, 0.2, 0.5)]
        assert vals[0] > vals[1] > vals[2] > 0

    def test_divergent(self):
        with pytest.raises(DivergenceError):
            sobolev_norm(GridMeasure.lebesgue(4), 0.5)
        f = SampledFunction.from_callable(np.cos, 0, 1, 9)
        with pytest.raises(DivergenceError):
            sobolev_norm(f, 3.0)

    def test_multiplier_l1(self):
        mu = GridMeasure.lebesgue(6)
        phi = mollifier()
        val = multiplier_l1(mu, lambda u: np.ones_like(u), 8.0)
        ref = 2 * quad(lambda x: abs(np.sinc(x)), 0, 8, limit=200)[0]
        assert val == pytest.approx(ref, rel=1e-8)
        assert multiplier_l1(mu, lambda u: phi.fourier(u / 4), 512.0) > 0


class TestGap:
    def test_certified_bound(self):
        mu, rep = spectral_gap_measure(DyadicSet.full(14), 4.0, 1.155, 0.99999, T=8)
        val, err = gap_integral(mu, 4.0, 1.155, tol=0.01)
        fine, _ = gap_integral(mu, 4.0, 1.155, step=1e-5, tol=None)
        assert abs(val - fine) <= err + 1e-12
        assert err <= 0.01 * 4.0 ** -3

    def test_coarse_step_rejected(self):
        with pytest.raises(AccuracyError):
            gap_integral(GridMeasure.lebesgue(6), 4.0, 1.155, step=0.1, tol=1e-4)

    def test_tail_bound(self):
        c3, b3 = varphi_tail_bound(4.0, 3)
        assert c3 > 0 and b3 == pytest.approx(2 * c3 * 4.0 ** (-2 / 5) / 2)
