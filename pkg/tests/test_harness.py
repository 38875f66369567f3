import json

import numpy as np
import pytest

from spectral_cutoff import ConfigError, PreconditionError
from spectral_cutoff.harness import (ExperimentConfig, fit_loglog_slope, run_coverage_experiment,
                                     run_energy_experiment, run_gamma_experiment,
                                     run_risk_experiment)

BASE = {"scenario": "t", "kernel": {"model": "power_law", "theta": 1},
        "signal": {"model": "power_law", "delta": 3}, "sigma": 0.5,
        "n_grid": [256, 1024, 4096], "replications": 30, "seed": 7}


def cfg(**kw):
    return ExperimentConfig.from_dict({**BASE, **kw})


class TestConfig:
    @pytest.mark.parametrize("bad,field", [({"replications": 0}, "replications"),
                                           ({"n_grid": [258]}, "n_grid"),
                                           ({"n_grid": [8]}, "n_grid"),
                                           ({"kernel": {"model": "power_law", "theta": -1}}, "kernel.theta"),
                                           ({"signal": {"model": "power_law", "delta": 2.4}}, "signal.delta"),
                                           ({"variants": ["bogus"]}, "variants"),
                                           ({"sigma": "estimate"}, "true_sigma"),
                                           ({"unknown_key": 1}, "unknown_key")])
    def test_rejects(self, bad, field):
        with pytest.raises(ConfigError, match=field):
            cfg(**bad)

    def test_rate_condition(self):
        c = cfg(signal={"model": "power_law", "delta": 2.7})
        with pytest.raises(ConfigError, match="2\\*theta \\+ 1"):
            run_risk_experiment(c, rate=True)

    def test_roundtrip(self):
        c = cfg(variants=["adaptive", "adaptive_p(4)"])
        assert ExperimentConfig.from_dict(c.to_dict()) == c


class TestSlope:
    def test_exact_power(self):
        ns = [2 ** j for j in range(8, 15)]
        s, lo, hi = fit_loglog_slope(ns, [3 * n ** -0.5 for n in ns])
        assert s == pytest.approx(-0.5) and lo <= s <= hi

    def test_band_contains_estimate(self, rng):
        ns = [2 ** j for j in range(8, 15)]
        s, lo, hi = fit_loglog_slope(ns, [n ** -0.5 * np.exp(rng.normal(0, 0.1)) for n in ns])
        assert lo < s < hi


class TestRisk:
    def test_rows_and_invariants(self, tmp_path):
        r = run_risk_experiment(cfg(variants=["projection_fixed", "adaptive", "penalized",
                                              "plug_in", "adaptive_p(4)"]), tmp_path)
        assert len(r.rows) == 15
        for row in r.rows:
            assert row["mean_risk"] >= 0 and row["se"] >= 0
        header = (tmp_path / "risk.csv").read_text().splitlines()[0]
        assert header == "n,variant,mean_risk,se,a_star,ratio,mean_M,mean_gamma_hat,clamp_rate"
        summary = json.loads((tmp_path / "risk_summary.json").read_text())
        assert summary["witnesses"]["gamma"] == 0.125 and summary["witnesses"]["Gamma"] == 8.0
        assert summary["witnesses"]["delta_gt_2theta_plus_half"] is True
        assert json.loads((tmp_path / "config.json").read_text())["seed"] == 7
        assert summary["checks"]["oracle_dominance"]

    def test_noiseless_skips_slope(self):
        r = run_risk_experiment(cfg(sigma=0.0, replications=2))
        assert r.slopes["adaptive"]["skipped"]
        for row in r.rows:
            assert row["se"] == 0.0

    def test_byte_identical(self, tmp_path):
        run_risk_experiment(cfg(), tmp_path / "a")
        run_risk_experiment(cfg(), tmp_path / "b")
        assert (tmp_path / "a/risk.csv").read_bytes() == (tmp_path / "b/risk.csv").read_bytes()

    def test_workers_identical(self, tmp_path):
        run_risk_experiment(cfg(replications=12), tmp_path / "a")
        run_risk_experiment(cfg(replications=12, workers=3), tmp_path / "b")
        assert (tmp_path / "a/risk.csv").read_bytes() == (tmp_path / "b/risk.csv").read_bytes()

    def test_single_replication_flag(self):
        assert run_risk_experiment(cfg(replications=1)).summary["unreliable"]

    def test_fixed_N_matches_oracle_curve(self):
        r = run_risk_experiment(cfg(variants=["projection_fixed"], n_grid=[4096],
                                    replications=300))
        row = r.row(4096, "projection_fixed")
        assert row["ratio"] == pytest.approx(1.0, abs=0.1)


class TestOtherExperiments:
    def test_energy(self, tmp_path):
        rep = run_energy_experiment(cfg(replications=50), tmp_path)
        rows = rep["rows"]
        assert rows[0]["target"] == pytest.approx(4 * 0.25 * 1.0318221950547)
        assert (tmp_path / "energy.csv").exists()
        assert rows[-1]["rho_N0_over_sqrt_n"] < rows[0]["rho_N0_over_sqrt_n"]

    def test_energy_noiseless(self):
        rep = run_energy_experiment(cfg(sigma=0.0, replications=1))
        assert rep["rows"][-1]["n_mse"] < 1e-6

    def test_identity_target(self):
        c = cfg(kernel={"model": "identity"}, signal={"model": "power_law", "delta": 1.5},
                replications=2)
        rep = run_energy_experiment(c)
        assert rep["summary"]["target"] == pytest.approx(4 * 0.25 * rep["summary"]["H"])

    def test_coverage_noiseless_trig(self, tmp_path):
        c = cfg(signal={"model": "trig_poly", "values": [1, -0.5, 0.25, 2]},
                kernel={"model": "identity"}, sigma=0.0, replications=2,
                ci_kinds=["function_l2", "energy", "energy_fisher"], n_grid=[256])
        rows = run_coverage_experiment(c, outdir=tmp_path)["rows"]
        assert rows and all(r["coverage"] == 1.0 for r in rows)

    def test_coverage_table(self, tmp_path):
        rep = run_coverage_experiment(cfg(replications=20), ci_kinds=["function_l2", "energy"],
                                      levels=[0.9, 0.95], outdir=tmp_path)
        assert len(rep["rows"]) == 3 * 2 * 2
        for r in rep["rows"]:
            assert 0 <= r["coverage"] <= 1

    def test_gamma_flags(self):
        c = cfg(signal={"model": "trig_poly", "values": [1, 2, 3]}, kernel={"model": "identity"},
                n_grid=[4096], replications=3)
        rep = run_gamma_experiment(c)
        assert rep["rows"][0]["applicable"] == "no"

    def test_gamma_small_n(self):
        with pytest.raises(PreconditionError, match="n too small"):
            run_gamma_experiment(cfg(n_grid=[64], replications=2))
