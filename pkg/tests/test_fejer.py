"""Kernel evaluation, lattice-sum identities, and the panel integrator."""

import numpy as np
import pytest
from scipy.integrate import quad

from mixedspec.fejer import (QuadratureError, fejer, rho, sampled_kernel_sum,
                             sinc2_integral, sinc2_first_moment,
                             fejer_integral, fejer_weighted_integral)


def cos_form(theta, T):
    # 2 (1 - cos(2 pi theta T)) / (theta^2 T (2 pi)^2), theta != 0
    return 2.0 * (1.0 - np.cos(2 * np.pi * theta * T)) \
        / (theta**2 * T * (2 * np.pi) ** 2)


class TestFejer:
    def test_value_at_zero_is_T(self):
        assert fejer(0.0, 5.0) == 5.0
        for T in (0.3, 1.0, 123.4):
            assert fejer(0.0, T) == T

    def test_zeros_at_integer_multiples(self):
        for T in (0.5, 2.0, 7.3, 1000.0):
            for m in (1, 2, 3, 17):
                assert fejer(m / T, T) < 1e-20

    def test_half_lobe_value(self):
        # f_T(0.5/T) = T (2/pi)^2, checked against the defining integral
        for T in (1.0, 5.0, 40.0):
            val = fejer(0.5 / T, T)
            assert val == pytest.approx(T * (2 / np.pi) ** 2, rel=1e-14)
            theta = 0.5 / T
            defn = 2 * quad(lambda t: (1 - t / T) * np.cos(2 * np.pi * theta * t),
                            0, T, limit=200)[0]
            assert val == pytest.approx(defn, abs=1e-9)

    def test_matches_cosine_form(self):
        rng = np.random.default_rng(1)
        theta = rng.uniform(0.01, 50.0, size=1000)
        T = rng.uniform(0.1, 100.0, size=1000)
        got = fejer(theta, T)
        want = cos_form(theta, T)
        # away from the kernel zeros the forms must agree tightly
        mask = want > 1e-12 * T
        assert np.allclose(got[mask], want[mask], rtol=1e-9)

    def test_nonnegative_everywhere(self):
        rng = np.random.default_rng(2)
        theta = rng.standard_cauchy(size=1000) * 10
        T = rng.uniform(0.01, 1e4, size=1000)
        assert np.all(fejer(theta, T) >= 0.0)

    def test_scaling_identity(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            theta = rng.uniform(-5, 5)
            T = rng.uniform(0.1, 1e3)
            assert fejer(theta, T) == pytest.approx(T * fejer(T * theta, 1.0),
                                                    rel=1e-12, abs=1e-300)

    def test_unit_mass_with_tail_bound(self):
        # quadrature over [-K/T, K/T] plus the 2/(pi^2 K) tail bound
        K = 2000
        for T in (1.0, 10.0, 1000.0):
            body = fejer_weighted_integral(T, np.ones_like, -K / T, K / T,
                                           tol=1e-9)
            tail_bound = 2.0 / (np.pi**2 * K)
            assert 0.0 <= 1.0 - body <= tail_bound

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            fejer(0.1, 0.0)
        with pytest.raises(ValueError):
            fejer(0.1, -2.0)
        with pytest.raises(ValueError):
            rho(0.0)
        with pytest.raises(ValueError):
            rho(-1.5)
        with pytest.raises(ValueError):
            sampled_kernel_sum(-1.0, 1e-6)
        with pytest.raises(ValueError):
            sampled_kernel_sum(1.0, 0.0)


class TestRho:
    def test_integer_values_give_zero(self):
        assert rho(2.0) == 0.0
        for g in (1.0, 3.0, 7.0):
            assert rho(g) == 0.0

    def test_unit_interval_complement(self):
        assert rho(0.5) == pytest.approx(0.5, abs=0)
        assert 0.5 + rho(0.5) == 1.0
        rng = np.random.default_rng(4)
        g = rng.uniform(0.05, 1.0, size=200)
        assert np.allclose(g + rho(g), 1.0, rtol=1e-14)

    def test_value_at_three_halves(self):
        assert rho(1.5) == pytest.approx(1 / 6, rel=1e-14)
        # cross-check against the lattice sum
        assert rho(1.5) == pytest.approx(sampled_kernel_sum(1.5, 1e-8) - 1.5,
                                         abs=1e-7)

    def test_bounded_between_zero_and_one(self):
        rng = np.random.default_rng(5)
        g = rng.uniform(1e-3, 20.0, size=2000)
        r = rho(g)
        assert np.all(r >= 0.0) and np.all(r <= 1.0)


class TestSampledKernelSum:
    def test_unit_value_on_unit_interval(self):
        assert sampled_kernel_sum(1.0, 1e-6) == pytest.approx(1.0, abs=1e-6)
        assert sampled_kernel_sum(0.25, 1e-6) == pytest.approx(1.0, abs=1e-6)

    def test_value_beyond_one(self):
        # gamma + rho(gamma) = 2.5 + 0.25/2.5 = 2.6
        assert sampled_kernel_sum(2.5, 1e-6) == pytest.approx(2.6, abs=1e-6)

    def test_matches_gamma_plus_rho(self):
        rng = np.random.default_rng(6)
        for gamma in rng.uniform(0.02, 10.0, size=50):
            got = sampled_kernel_sum(gamma, 1e-5)
            assert got == pytest.approx(gamma + rho(gamma), abs=1e-5)


class TestKernelIntegrals:
    def test_antiderivative_against_quad(self):
        for x in (0.37, 1.0, 8.25):
            assert sinc2_integral(x) == pytest.approx(
                quad(lambda u: np.sinc(u) ** 2, 0, x, limit=500)[0], abs=1e-12)
            assert sinc2_first_moment(x) == pytest.approx(
                quad(lambda u: u * np.sinc(u) ** 2, 0, x, limit=500)[0],
                abs=1e-12)
        assert sinc2_integral(-2.0) == -sinc2_integral(2.0)
        assert sinc2_integral(0.0) == 0.0

    def test_fejer_integral_matches_quad(self):
        T = 13.0
        val = fejer_integral(T, -0.3, 0.7)
        brute = quad(lambda u: fejer(u, T), -0.3, 0.7, limit=500)[0]
        assert val == pytest.approx(brute, rel=1e-10)

    def test_weighted_integral_against_closed_forms(self):
        # weight 1 reduces to the plain integral
        T = 50.0
        got = fejer_weighted_integral(T, np.ones_like, -0.2, 0.5)
        assert got == pytest.approx(fejer_integral(T, -0.2, 0.5), rel=1e-12)
        # triangular weight has a closed form via the sinc^2 moments
        B = 0.05
        got = fejer_weighted_integral(
            T, lambda u: np.maximum(1 - np.abs(u) / B, 0.0), -B, B)
        want = 2 * sinc2_integral(B * T) \
            - (2.0 / (B * T)) * sinc2_first_moment(B * T)
        assert got == pytest.approx(want, rel=1e-11)

    def test_weighted_integral_off_center(self):
        T = 30.0
        center = 0.4
        got = fejer_weighted_integral(T, lambda u: u**2, 0.1, 0.9,
                                      center=center)
        brute = quad(lambda u: fejer(u - center, T) * u**2, 0.1, 0.9,
                     limit=2000)[0]
        assert got == pytest.approx(brute, rel=1e-9)

    def test_weighted_integral_reports_failure(self):
        # a weight far rougher than the refinement budget can resolve
        rng = np.random.default_rng(7)
        noise = rng.standard_normal(4096)

        def rough(u):
            idx = np.clip((np.abs(u) * 4096 / 0.5).astype(int), 0, 4095)
            return noise[idx]

        with pytest.raises(QuadratureError) as info:
            fejer_weighted_integral(2.0, rough, -0.5, 0.5, tol=1e-14,
                                    max_refinements=1)
        assert info.value.achieved > 0
