import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectral_cutoff import (DomainError, ObservationSet, RangeError, UniformGrid,
                             design_matrix, empirical_coefficients, eval_basis, frequency,
                             l2_distance_on_spectrum, raw_coefficients, synthesize)
from spectral_cutoff import SignalSpectrum, WeightSequence, rho


def brute_coefficient(y, k):
    # plain loop over the grid t_i = i/n, i = 1..n
    n = len(y)
    total = 0.0
    for i in range(1, n + 1):
        total += y[i - 1] * eval_basis(k, i / n)
    return total / n


class TestEvalBasis:
    def test_constant(self):
        assert eval_basis(1, 0.73) == 1.0

    def test_cosine_quarter(self):
        assert abs(eval_basis(2, 0.25)) < 1e-15

    def test_sine_quarter(self):
        assert eval_basis(3, 0.25) == pytest.approx(math.sqrt(2), abs=1e-15)

    def test_frequency(self):
        assert [frequency(k) for k in range(1, 8)] == [0, 1, 1, 2, 2, 3, 3]

    def test_periodic(self):
        for k in (2, 3, 8, 9):
            assert eval_basis(k, 1.0) == pytest.approx(eval_basis(k, 0.0), abs=1e-12)

    @pytest.mark.parametrize("k", [0, -1, 2.5])
    def test_bad_index(self, k):
        with pytest.raises(DomainError):
            eval_basis(k, 0.1)


class TestGrid:
    def test_points(self):
        g = UniformGrid(16)
        assert g.points[-1] == 1.0
        assert np.all(np.diff(g.points) > 0)

    def test_min_size(self):
        with pytest.raises(DomainError):
            UniformGrid(15)

    def test_caps(self):
        g = UniformGrid(100)
        assert (g.projection_cap, g.statistic_cap) == (33, 66)


class TestCoefficients:
    @pytest.mark.parametrize("n", [64, 256, 1024])
    def test_discrete_orthogonality(self, n):
        L = n // 3
        X = design_matrix(UniformGrid(n).points, L)
        gram = X.T @ X / n
        assert np.abs(gram - np.eye(L)).max() < 1e-10

    def test_single_basis_function(self):
        n = 64
        y = np.array([eval_basis(5, i / n) for i in range(1, n + 1)])
        c = empirical_coefficients(ObservationSet.from_values(y), 21)
        expect = np.zeros(21)
        expect[4] = 1.0
        np.testing.assert_allclose(c, expect, atol=1e-13)

    def test_constant(self):
        c = empirical_coefficients(ObservationSet.from_values(np.full(48, 3.0)), 16)
        assert c[0] == pytest.approx(3.0)
        assert np.abs(c[1:]).max() < 1e-13

    def test_against_loop(self, rng):
        y = rng.standard_normal(50)
        c = raw_coefficients(ObservationSet.from_values(y), 33)
        brute = [brute_coefficient(y, k) for k in range(1, 34)]
        np.testing.assert_allclose(c, brute, atol=1e-13)

    @pytest.mark.parametrize("n", [16, 17, 100, 1000, 1023])
    def test_fft_matches_direct(self, rng, n):
        obs = ObservationSet.from_values(rng.standard_normal(n))
        L = (2 * n) // 3
        d = raw_coefficients(obs, L, "direct")
        f = raw_coefficients(obs, L, "fft")
        assert np.abs(d - f).max() < 1e-10

    def test_projection_cap(self, rng):
        obs = ObservationSet.from_values(rng.standard_normal(60))
        empirical_coefficients(obs, 20)
        with pytest.raises(RangeError, match="20"):
            empirical_coefficients(obs, 21)

    def test_statistic_cap(self, rng):
        obs = ObservationSet.from_values(rng.standard_normal(60))
        raw_coefficients(obs, 40)
        with pytest.raises(RangeError):
            raw_coefficients(obs, 41)

    def test_noise_moments(self):
        # c(k, n) ~ N(0, sigma^2/n) under pure noise
        n, reps, sigma = 256, 4000, 0.7
        rng = np.random.default_rng(5)
        Y = sigma * rng.standard_normal((reps, n))
        C = np.array([raw_coefficients(ObservationSet.from_values(y), 10, "fft") for y in Y])
        assert np.all(np.abs(C.mean(0)) < 3 * sigma / math.sqrt(n * reps) * 1.5)
        np.testing.assert_allclose(C.var(0) * n / sigma ** 2, 1.0, atol=0.1)


class TestSynthesize:
    def test_cosine_at_zero(self):
        assert synthesize([0.0, 1.0, 0.0], 0.0) == pytest.approx(math.sqrt(2))

    def test_constant(self):
        assert synthesize([5.0], 0.377) == pytest.approx(5.0)

    def test_roundtrip_trig_poly(self, rng):
        n = 128
        coeffs = rng.standard_normal(21)   # degree 10
        t = UniformGrid(n).points
        y = synthesize(coeffs, t)
        c = empirical_coefficients(ObservationSet.from_values(y), 21)
        assert np.abs(synthesize(c, t) - y).max() < 1e-10

    def test_weights(self):
        w = WeightSequence.power_law(1.0, 2.0)
        assert synthesize([1.0, 1.0], 0.0, weights=w) == pytest.approx(2 + 2 * math.sqrt(2))


class TestDistance:
    def test_identity(self):
        assert l2_distance_on_spectrum([1, 2, 3], [1, 2, 3]) == 0.0

    def test_orthonormal(self):
        assert l2_distance_on_spectrum([1, 0], [0, 1]) == 2.0

    def test_padding(self):
        assert l2_distance_on_spectrum([1, 2], [1, 2, 3]) == 9.0

    def test_tail_is_rho(self, d3t1):
        sig, w = d3t1
        full = sig.coefficients(200000) * w.values(200000)
        assert l2_distance_on_spectrum(full[:7], full) == pytest.approx(rho(sig, w, 7), rel=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-3, 3), min_size=1, max_size=41),
           st.lists(st.floats(-3, 3), min_size=1, max_size=41))
    def test_parseval_vs_quadrature(self, a, b):
        # trapezoid on a fine periodic grid is exact for trig polynomials of degree <= 20
        t = np.arange(512) / 512
        d = synthesize(a, t) - synthesize(b, t)
        assert l2_distance_on_spectrum(a, b) == pytest.approx(np.mean(d * d), abs=1e-6)
