import math

import numpy as np
import pytest

from spectral_cutoff import (ConfigError, DomainError, ModelError, N_plus, SignalSpectrum,
                             WeightSequence, b_norm_sq, energy, gamma_limit, oracle_risk, rho,
                             rho2)
from spectral_cutoff.signal import tail_array, weighted_tail
from spectral_cutoff.spectrum import S


def brute_tail(delta, theta, N, K=10 ** 7, wpow=2):
    # direct summation to K plus the leading integral remainder
    a, b = 2 * delta, theta * wpow
    k = np.arange(N + 1, K + 1, dtype=np.float64)
    m = np.maximum(k // 2, 1)
    return float(np.sum((k ** -a * m ** b)[::-1])) + 2.0 ** -b * K ** (b - a + 1) / (a - b - 1)


# frozen from brute_tail (independent of the closed forms)
FROZEN_TAILS = [
    (3.0, 1.0, 0, 2, 1.0186806961904502),
    (3.0, 1.0, 5, 2, 0.000451391577967417),
    (3.0, 1.0, 20, 2, 9.281733359688363e-06),
    (3.0, 1.0, 0, 4, 1.0318221950547),
    (2.0, 0.4, 0, 2, 1.090289344480254),
    (2.0, 0.4, 7, 2, 0.002995520298209175),
    (1.5, 0.0, 10, 2, 0.004524917485401035),
]


class TestSignalSpectrum:
    def test_alternating(self):
        c = SignalSpectrum.power_law(2.0, 3.0).coefficients(4)
        np.testing.assert_allclose(c, [3, -3 / 4, 3 / 9, -3 / 16])

    def test_explicit_padding(self):
        c = SignalSpectrum.trig_poly([1, 2]).coefficients(4)
        np.testing.assert_array_equal(c, [1, 2, 0, 0])

    def test_support(self):
        assert SignalSpectrum.trig_poly([1, 0, 2, 0, 0]).support == 3

    def test_bad_delta(self):
        with pytest.raises(ConfigError, match="signal.delta"):
            SignalSpectrum.from_config({"model": "power_law", "delta": -1})

    def test_roundtrip(self):
        for s in (SignalSpectrum.power_law(3), SignalSpectrum.trig_poly([1, 2, 3])):
            assert SignalSpectrum.from_config(s.to_config()) == s


class TestTails:
    @pytest.mark.parametrize("delta,theta,N,wpow,expect", FROZEN_TAILS)
    def test_frozen(self, delta, theta, N, wpow, expect):
        sig = SignalSpectrum.power_law(delta)
        w = WeightSequence.power_law(theta)
        assert weighted_tail(sig, w, N, wpow) == pytest.approx(expect, rel=1e-11)

    def test_brute_force_live(self):
        sig, w = SignalSpectrum.power_law(2.5), WeightSequence.power_law(0.7)
        assert rho(sig, w, 13) == pytest.approx(brute_tail(2.5, 0.7, 13, K=10 ** 6), rel=1e-9)

    def test_trig_poly_empty_tail(self):
        sig = SignalSpectrum.trig_poly([1, 2, 3])
        assert rho(sig, WeightSequence.power_law(1.0), 3) == 0.0

    def test_geometric(self):
        c = 2.0 ** -np.arange(1, 60)
        sig = SignalSpectrum.explicit(c)
        for N in (1, 3, 10):
            assert rho(sig, WeightSequence.identity(), N) == pytest.approx(4.0 ** -N / 3, rel=1e-12)

    def test_dyadic_ratio(self, d3t1):
        sig, w = d3t1
        assert rho(sig, w, 2 * 10 ** 4) / rho(sig, w, 10 ** 4) == pytest.approx(0.125, rel=0.01)

    def test_rho2_explicit(self):
        sig = SignalSpectrum.explicit([0, 0, 1, 1])
        assert rho2(sig, WeightSequence.explicit([1, 1, 2, 2]), 2) == 32

    def test_rho2_trig_poly(self):
        assert rho2(SignalSpectrum.trig_poly([1, 1]), WeightSequence.power_law(1.0), 2) == 0

    def test_rho2_bounded_ratio(self, d3t1):
        sig, w = d3t1
        r = [rho2(sig, w, N) / rho(sig, w, N) for N in (100, 1000, 10000)]
        assert max(r) / min(r) < 1e8 and all(np.isfinite(r))

    def test_tail_array(self, d3t1):
        sig, w = d3t1
        t = tail_array(sig, w, 30)
        np.testing.assert_allclose(t, [rho(sig, w, N) for N in range(31)], rtol=1e-12)

    def test_divergent(self):
        with pytest.raises(ModelError):
            rho(SignalSpectrum.power_law(1.0), WeightSequence.power_law(1.0), 5)

    def test_energy_and_bnorm_identity(self):
        sig = SignalSpectrum.power_law(2.0)
        w = WeightSequence.identity()
        assert energy(sig, w) == pytest.approx(math.pi ** 4 / 90, rel=1e-13)
        assert b_norm_sq(sig, w) == energy(sig, w)


class TestGamma:
    def test_d3t1(self, d3t1):
        assert gamma_limit(*d3t1).value == 0.125

    def test_d15t0(self):
        assert gamma_limit(SignalSpectrum.power_law(1.5), WeightSequence.identity()).value == 0.25

    def test_trig_poly(self):
        g = gamma_limit(SignalSpectrum.trig_poly([1, 2]), WeightSequence.identity())
        assert not g.available

    def test_matches_tail_ratio(self):
        sig, w = SignalSpectrum.power_law(1.5), WeightSequence.identity()
        r = rho(sig, w, 2 * 10 ** 4) / rho(sig, w, 10 ** 4)
        assert r == pytest.approx(0.25, rel=1e-3)


class TestNPlus:
    @pytest.mark.parametrize("n,theta,expect", [(1000, 1.0, 12), (1000, 0.0, 144), (16, 2.0, 1),
                                                (256, 1.0, 6), (4096, 1.0, 22),
                                                (16384, 1.0, 41), (65536, 1.0, 76)])
    def test_values(self, n, theta, expect):
        assert N_plus(n, WeightSequence.power_law(theta)) == expect

    def test_capped(self):
        assert N_plus(16, WeightSequence.identity()) == 5

    def test_small_n(self):
        with pytest.raises(DomainError):
            N_plus(15, WeightSequence.identity())


class TestOracle:
    def test_brute_force(self, d3t1):
        sig, w = d3t1
        n, sigma = 4096, 0.5
        o = oracle_risk(sig, w, n, sigma)
        # recompute S and rho from scratch with plain sums
        k = np.arange(1, 2 * 10 ** 6 + 1, dtype=np.float64)
        terms = (k ** -6.0) * np.maximum(k // 2, 1) ** 2
        A = []
        for N in range(1, o.N_plus + 1):
            SN = sum(max(j // 2, 1) ** 2 for j in range(1, N + 1))
            A.append(sigma ** 2 * SN / n + float(np.sum(terms[N:][::-1])))
        assert o.N0 == int(np.argmin(A)) + 1
        assert o.A_star == pytest.approx(min(A), rel=1e-9)

    def test_noiseless(self, d3t1):
        o = oracle_risk(*d3t1, 1024, 0.0)
        assert o.N0 == o.N_plus
        np.testing.assert_allclose(o.A_curve, tail_array(*d3t1, o.N_plus)[1:])

    def test_trig_poly_exact(self):
        sig = SignalSpectrum.trig_poly(np.ones(7))
        o = oracle_risk(sig, WeightSequence.identity(), 256, 0.0)
        assert (o.N0, o.A_star) == (7, 0.0)

    def test_decomposition(self, d3t1):
        sig, w = d3t1
        o = oracle_risk(sig, w, 2048, 0.3)
        for N in range(1, o.N_plus + 1):
            assert o.A(N) >= max(0.09 * S(w, N) / 2048, rho(sig, w, N)) - 1e-18
            assert o.A_star <= o.A(N)

    def test_U(self, d3t1):
        o = oracle_risk(*d3t1, 4096, 0.5)
        assert o.U == pytest.approx(min(1 - 0.125, 8 - 1))

    def test_A_star_decreases(self):
        for d, t in ((3.0, 1.0), (2.0, 0.4), (1.5, 0.0)):
            sig, w = SignalSpectrum.power_law(d), WeightSequence.power_law(t)
            a = [oracle_risk(sig, w, 2 ** j, 0.5).A_star for j in range(8, 17)]
            assert all(b <= x * 1.05 for x, b in zip(a, a[1:]))
            assert a[-1] < a[0] / 4
