import numpy as np
import pytest
from hypothesis import given, strategies as st

from spectral_cutoff import (ConfigError, DomainError, ModelError, ModularNorm, RangeError, S,
                             S2, Gamma_limit, WeightSequence, l2_distance_on_spectrum,
                             modular_norm_sq)
from spectral_cutoff.spectrum import cumulative_S


class TestWeights:
    def test_power_law_pairs_share_weight(self):
        w = WeightSequence.power_law(1.0).values(7)
        np.testing.assert_array_equal(w, [1, 1, 1, 2, 2, 3, 3])

    def test_theta_zero_constant(self):
        np.testing.assert_array_equal(WeightSequence.power_law(0.0, 2.5).values(5), 2.5)

    def test_negative_theta(self):
        with pytest.raises(ConfigError, match="kernel.theta"):
            WeightSequence.from_config({"model": "power_law", "theta": -1})

    def test_explicit_zero_rejected(self):
        with pytest.raises(ConfigError):
            WeightSequence.explicit([1.0, 0.0, 2.0])

    def test_explicit_too_short(self):
        w = WeightSequence.explicit([1, 2, 3])
        with pytest.raises(RangeError):
            w.values(4)
        with pytest.raises(ModelError):
            w.require(10)

    def test_config_roundtrip(self):
        for w in (WeightSequence.identity(), WeightSequence.power_law(1.5, 0.3),
                  WeightSequence.explicit([1, 2, 3.5])):
            assert WeightSequence.from_config(w.to_config()) == w

    def test_unknown_model(self):
        with pytest.raises(ConfigError, match="kernel.model"):
            WeightSequence.from_config({"model": "gauss"})


class TestPartialSums:
    def test_identity_S(self):
        assert S(WeightSequence.identity(), 7) == 7

    def test_explicit_S(self):
        assert S(WeightSequence.explicit([1, 2, 3]), 3) == 14

    def test_identity_S2(self):
        assert S2(WeightSequence.identity(), 5) == 5

    def test_explicit_S2(self):
        assert S2(WeightSequence.explicit([1, 2, 3, 4]), 2) == 337

    def test_ratio_theta_one(self):
        w = WeightSequence.power_law(1.0)
        assert S(w, 2 * 10 ** 6) / S(w, 10 ** 6) == pytest.approx(8.0, abs=1e-4)

    @pytest.mark.parametrize("theta", [0.0, 0.4, 1.0, 2.0])
    def test_ratio_converges(self, theta):
        w = WeightSequence.power_law(theta)
        lim = 2 ** (2 * theta + 1)
        for N in (10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6):
            assert S(w, 2 * N) / S(w, N) == pytest.approx(lim, rel=0.01)

    def test_S2_block_integral(self):
        # S2(N) ~ sum over k in (N, 2N] of (k/2)^4 ~ (N^5/16) * int_1^2 x^4 dx
        w = WeightSequence.power_law(1.0)
        N = 10 ** 6
        assert S2(w, N) / (N ** 5 / 16 * 31 / 5) == pytest.approx(1.0, abs=1e-3)

    def test_cumulative_matches(self):
        w = WeightSequence.power_law(1.3)
        np.testing.assert_allclose(cumulative_S(w, 30), [S(w, N) for N in range(1, 31)])

    def test_bad_N(self):
        with pytest.raises(DomainError):
            S(WeightSequence.identity(), 0)

    @given(st.integers(1, 300), st.integers(1, 300), st.floats(0, 3))
    def test_additive_and_increasing(self, a, b, theta):
        w = WeightSequence.power_law(theta)
        assert S(w, a + b) > S(w, a)
        total = np.sum(w.values(a + b) ** 2)
        assert S(w, a) + float(np.sum(w.values(a + b)[a:] ** 2)) == pytest.approx(total)


class TestGammaLimit:
    def test_theta_zero(self):
        assert Gamma_limit(WeightSequence.power_law(0.0)).value == 2.0

    def test_identity(self):
        assert Gamma_limit(WeightSequence.identity()).value == 2.0

    def test_theta_one(self):
        assert Gamma_limit(WeightSequence.power_law(1.0)).value == 8.0

    def test_explicit_unavailable(self):
        g = Gamma_limit(WeightSequence.explicit(np.arange(1, 101)))
        assert not g.available and g.source == "empirical"
        assert 1.5 < g.empirical < 8.5

    @pytest.mark.parametrize("theta", [0.0, 0.5, 1.0, 1.5])
    def test_empirical_ratio_band(self, theta):
        w = WeightSequence.power_law(theta)
        r = S(w, 2 * 10 ** 5) / S(w, 10 ** 5)
        assert 1.5 < r < 2 ** (2 * theta + 1) + 0.5


class TestModularNorm:
    def test_euclidean(self):
        assert modular_norm_sq([3, 4], ModularNorm(2, WeightSequence.identity())) == 25

    def test_single(self):
        assert modular_norm_sq([1.0], ModularNorm(2, WeightSequence.explicit([2.0]))) == 4

    def test_p_must_exceed_one(self):
        with pytest.raises(DomainError):
            ModularNorm(1.0, WeightSequence.identity())

    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=30))
    def test_matches_distance(self, c):
        assert modular_norm_sq(c, ModularNorm(2, WeightSequence.identity())) == pytest.approx(
            l2_distance_on_spectrum(c, [0.0]))

    def test_b_norm_stabilizes(self):
        # sum c^2 w^4 for delta = 3, theta = 1 through the w^2 modular norm
        w2 = WeightSequence.power_law(1.0).squared()
        k = np.arange(1, 10 ** 5 + 1, dtype=float)
        c = k ** -3.0
        a = modular_norm_sq(c[:50000], ModularNorm(2, w2))
        b = modular_norm_sq(c, ModularNorm(2, w2))
        assert abs(a - b) < 1e-6 * b
