"""Command-line entry point.

Exit status: 0 success, 2 invalid configuration or input, 3 a statistical
precondition failed (for example n too small for the gamma plug-in),
1 anything unexpected.
"""
import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import estimators as est
from . import harness
from . import inference as inf
from .basis import UniformGrid, raw_coefficients
from .errors import (ConfigError, DomainError, InputError, ModelError, PreconditionError,
                     RangeError)
from .io import read_observations, write_csv, write_json, write_observations, write_selection
from .simulate import NoiseModel, estimate_sigma, forward, observe
from .spectrum import WeightSequence
from .signal import SignalSpectrum

OUT_ENV = "SPECTRAL_CUTOFF_OUT"

CONFIG_KEYS = """\
configuration keys (JSON object):
  scenario            free-form name echoed into outputs
  kernel              {"model": "identity"} | {"model": "power_law", "theta": t, "scale": C2}
                      | {"model": "explicit", "values": [w1, w2, ...]}
  signal              {"model": "power_law", "delta": d, "scale": C1,
                       "signs": "alternating" | "all-positive"}
                      | {"model": "explicit" | "trig_poly", "values": [c1, c2, ...]}
  noise               {"family": "gaussian"} | {"family": "subweibull", "q": q, "Q": Q}
                      | {"family": "student_t", "df": df}   (df >= 5)
  sigma               noise level (>= 0) or "estimate" (RSS estimate; needs true_sigma)
  true_sigma          simulation noise level when sigma = "estimate"
  n                   sample size for `simulate` (defaults to the first n_grid entry)
  n_grid              sample sizes, each >= 16 and divisible by 4
  replications        Monte Carlo replications per n (>= 1)
  seed                base seed; replication r uses seed + r
  variants            subset of projection_fixed, adaptive, penalized, plug_in, adaptive_p(p)
  fixed_N             cutoff for projection_fixed (default: the oracle N0)
  coefficient_method  "fft" (default) or "direct"
  ci_kinds            subset of function_l2, function_l2_sigma2, function_rough,
                      function_tail, energy, energy_fisher
  levels              nominal coverage levels in (0, 1)
  slope_band          [low, high] accepted range of the fitted log-log slope
  energy_selection    "M" (plain cutoff, default) or "M1" (penalized cutoff)
  workers             worker processes for replications (output is identical)
  thresholds          overrides for the summary pass/fail thresholds
  outputs             output directory (overridden by --out)
"""

EXIT_OK, EXIT_UNEXPECTED, EXIT_INPUT, EXIT_PRECONDITION = 0, 1, 2, 3


def _load_json(path, what="config"):
    try:
        d = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(what, f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(what, f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(d, dict):
        raise ConfigError(what, "expected a JSON object")
    return d


def _out_dir(args, cfg_outputs=None):
    out = args.out or cfg_outputs or os.environ.get(OUT_ENV) or "spectral_cutoff_out"
    return Path(out)


def _sigma_arg(value):
    if value is None or value == "estimate":
        return value
    try:
        s = float(value)
    except ValueError:
        raise ConfigError("--sigma", f"expected a number or \"estimate\", got {value!r}") from None
    if not s >= 0:
        raise ConfigError("--sigma", "must be >= 0")
    return s


# -- subcommands -----------------------------------------------------------

def cmd_simulate(args):
    d = _load_json(args.config)
    if args.seed is not None:
        d["seed"] = args.seed
    for key in ("kernel", "signal"):
        if key not in d:
            raise ConfigError(key, "missing")
    kernel = WeightSequence.from_config(d["kernel"])
    signal = SignalSpectrum.from_config(d["signal"])
    noise = NoiseModel.from_config(d.get("noise"))
    n = args.n or d.get("n") or (d.get("n_grid") or [None])[0]
    if not isinstance(n, int) or n < 16:
        raise ConfigError("n", "need an integer sample size >= 16")
    sigma = d.get("true_sigma") if d.get("sigma") == "estimate" else d.get("sigma", 0.5)
    if not isinstance(sigma, (int, float)) or sigma < 0:
        raise ConfigError("sigma", "must be a number >= 0")
    seed = d.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed", "must be a non-negative integer")
    obs = observe(forward(signal, kernel, UniformGrid(n)), float(sigma), noise, seed=seed,
                  provenance={"scenario": d.get("scenario", "unnamed")})
    out = _out_dir(args, d.get("outputs"))
    path = out / "observations.csv"
    write_observations(obs, path, signal=signal, kernel=kernel)
    write_json(out / "config.json", {**d, "n": n})
    print(path)
    return EXIT_OK


def _kernel_for(args, meta):
    if args.kernel:
        block = _load_json(args.kernel, "kernel")
        block = block.get("kernel", block)
        return WeightSequence.from_config(block)
    if meta.get("kernel") is not None:
        return WeightSequence.from_config(meta["kernel"])
    raise ConfigError("kernel", "no --kernel given and the observation sidecar has none")


def _select(obs, kernel, variant, sigma, coeffs):
    if variant == "plain":
        return est.select_adaptive(obs, kernel, coeffs=coeffs)
    if variant == "penalized":
        return est.select_penalized(obs, kernel, sigma=sigma, coeffs=coeffs)
    if variant == "plug_in":
        return est.select_unweighted(obs, coeffs=coeffs)
    if variant.startswith("p="):
        try:
            p = float(variant[2:])
        except ValueError:
            raise ConfigError("--variant", f"bad exponent in {variant!r}") from None
        return est.select_adaptive_p(obs, kernel, p, coeffs=coeffs)
    raise ConfigError("--variant", f"unknown variant {variant!r}")


def _prepare(args):
    obs = read_observations(args.obs)
    meta = obs.provenance
    kernel = _kernel_for(args, meta)
    sigma = _sigma_arg(args.sigma)
    if sigma in (None, "estimate"):
        sigma, origin = estimate_sigma(obs), "RSS"
    else:
        origin = "known"
    L = max((2 * obs.n) // 3, 1)
    coeffs = raw_coefficients(obs, L, "fft" if args.fft else "direct")
    return obs, meta, kernel, sigma, origin, coeffs


def cmd_estimate(args):
    obs, meta, kernel, sigma, origin, coeffs = _prepare(args)
    sel = _select(obs, kernel, args.variant, sigma, coeffs)
    f = coeffs[:sel.M] * kernel.values(sel.M)
    report = {
        "n": obs.n, "variant": args.variant, "M": sel.M,
        "selection": sel.summary(), "sigma_used": sigma, "sigma_origin": origin,
        "coefficients": f.tolist(), "kernel": kernel.to_config(),
    }
    if args.energy or args.ci:
        plain = sel if sel.variant == "plain" else est.select_adaptive(obs, kernel, coeffs=coeffs)
        e = inf.energy_estimate(obs, kernel, plain, sigma=sigma, coeffs=coeffs)
        report["energy"] = e.to_json()
        regions = [inf.energy_ci(e, sigma, obs.n, args.level).to_json()]
        if kernel.is_identity and e.H_hat > 0:
            regions.append(inf.energy_ci_fisher(e, sigma, obs.n, args.level).to_json())
        if args.ci:
            pen = sel if sel.penalized else est.select_penalized(obs, kernel, sigma=sigma,
                                                                 coeffs=coeffs)
            regions.append(inf.function_ci(pen, sigma, args.level).to_json())
        report["confidence_regions"] = regions
    out = _out_dir(args)
    write_json(out / "estimate.json", report)
    plain = sel if sel.variant == "plain" else None
    if sel.penalized:
        plain = est.select_adaptive(obs, kernel, coeffs=coeffs)
    write_selection(out, sel, plain=plain)
    if args.grid:
        if args.grid < 1:
            raise ConfigError("--grid", "must be >= 1")
        t = np.arange(args.grid, dtype=np.float64) / args.grid
        fhat = est.EstimateReport(f)(t)
        write_csv(out / "f_hat.csv", ("t", "f_hat"), zip(t, fhat))
    print(json.dumps({"M": sel.M, "sigma_used": sigma, "sigma_origin": origin}))
    return EXIT_OK


def cmd_energy(args):
    obs, meta, kernel, sigma, origin, coeffs = _prepare(args)
    if args.variant == "penalized":
        sel = est.select_penalized(obs, kernel, sigma=sigma, coeffs=coeffs)
    else:
        sel = est.select_adaptive(obs, kernel, coeffs=coeffs)
    e = inf.energy_estimate(obs, kernel, sel, sigma=sigma, coeffs=coeffs)
    regions = [inf.energy_ci(e, sigma, obs.n, args.level).to_json()]
    if kernel.is_identity and e.H_hat > 0:
        regions.append(inf.energy_ci_fisher(e, sigma, obs.n, args.level).to_json())
    report = {**e.to_json(), "sigma_origin": origin, "confidence_regions": regions}
    write_json(_out_dir(args) / "energy.json", report)
    print(json.dumps({"H_hat": e.H_hat, "M": e.M_used}))
    return EXIT_OK


def _experiment_config(args):
    d = _load_json(args.config)
    if args.seed is not None:
        d["seed"] = args.seed
    if args.replications is not None:
        d["replications"] = args.replications
    if args.workers is not None:
        d["workers"] = args.workers
    out = _out_dir(args, d.get("outputs"))
    d["outputs"] = str(out)
    return harness.ExperimentConfig.from_dict(d), out


def _report_summary(summary):
    print(json.dumps({k: summary[k] for k in ("experiment", "scenario", "checks", "unreliable")
                      if k in summary}, default=str))
    if summary.get("unreliable"):
        print("warning: replications = 1, statistics are unreliable", file=sys.stderr)


def cmd_mc_risk(args):
    cfg, out = _experiment_config(args)
    rep = harness.run_risk_experiment(cfg, out)
    _report_summary(rep.summary)
    return EXIT_OK


def cmd_mc_coverage(args):
    cfg, out = _experiment_config(args)
    _report_summary(harness.run_coverage_experiment(cfg, outdir=out)["summary"])
    return EXIT_OK


def cmd_mc_energy(args):
    cfg, out = _experiment_config(args)
    _report_summary(harness.run_energy_experiment(cfg, out)["summary"])
    return EXIT_OK


def cmd_mc_gamma(args):
    cfg, out = _experiment_config(args)
    _report_summary(harness.run_gamma_experiment(cfg, out)["summary"])
    return EXIT_OK


def cmd_rate_check(args):
    cfg, out = _experiment_config(args)
    rep = harness.run_risk_experiment(cfg, out, rate=True)
    _report_summary(rep.summary)
    ok = rep.summary["checks"].get("slope_in_band")
    return EXIT_OK if ok else EXIT_UNEXPECTED


# -- parser ----------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(
        prog="spectral-cutoff",
        description="Adaptive spectral cut-off estimation for periodic deconvolution.",
        epilog=CONFIG_KEYS + f"\ndefault output directory: ${OUT_ENV} or ./spectral_cutoff_out\n"
               "exit status: 0 ok, 2 invalid config/input, 3 statistical precondition, 1 other",
        formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="experiment/simulation JSON config")
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV})")
        sp.add_argument("--seed", type=int, help="override the config seed")

    sp = sub.add_parser("simulate", help="write simulated observations + metadata sidecar",
                        epilog=CONFIG_KEYS, formatter_class=argparse.RawDescriptionHelpFormatter)
    common(sp)
    sp.add_argument("--n", type=int, help="sample size (overrides config n)")
    sp.set_defaults(func=cmd_simulate)

    for name, func, helptext in (("estimate", cmd_estimate, "adaptive estimate from an observation CSV"),
                                 ("energy", cmd_energy, "energy estimate and its intervals")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--obs", required=True, help="observation CSV (header i,t,y)")
        sp.add_argument("--kernel", help="kernel JSON (default: from the sidecar)")
        sp.add_argument("--sigma", default="estimate",
                        help="noise level or \"estimate\" for the RSS estimate")
        sp.add_argument("--variant", default="plain",
                        help="plain | penalized | plug_in | p=<exponent>")
        sp.add_argument("--level", type=float, default=0.95)
        sp.add_argument("--fft", action="store_true", help="FFT coefficients instead of direct sums")
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV})")
        if name == "estimate":
            sp.add_argument("--grid", type=int, help="write f_hat on this many points to f_hat.csv")
            sp.add_argument("--energy", action="store_true", help="add the energy estimate")
            sp.add_argument("--ci", action="store_true", help="add confidence regions")
        sp.set_defaults(func=func)

    for name, func in (("mc-risk", cmd_mc_risk), ("mc-coverage", cmd_mc_coverage),
                       ("mc-energy", cmd_mc_energy), ("mc-gamma", cmd_mc_gamma),
                       ("rate-check", cmd_rate_check)):
        sp = sub.add_parser(name, help=f"Monte Carlo: {name}", epilog=CONFIG_KEYS,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        common(sp)
        sp.add_argument("--replications", type=int)
        sp.add_argument("--workers", type=int)
        sp.set_defaults(func=func)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InputError, DomainError, RangeError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except Exception as exc:  # noqa: BLE001
        if args.verbose:
            raise
        print(f"unexpected error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
