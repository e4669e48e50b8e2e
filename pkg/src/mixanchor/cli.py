"""Command-line entry point: simulate, fit, prior-sample, summarize, oracle-check.

Configuration is one declarative JSON file; command-line flags override it.
Every effective setting is echoed into the run manifest so no default stays
implicit.  Exit codes: 0 success, 2 validation failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .chainio import CHAIN_FORMAT_VERSION, chain_from_csv, chain_to_csv
from .likelihood import Dataset
from .oracles import gaussian_pair_closed, gaussian_pair_quad, marginal_one_obs_mc, n1_divergence_probe
from .postprocess import (
    density_curve,
    detect_switching,
    find_map,
    kmeans_summary,
    pool_draws,
    relabel_map,
    summarise,
)
from .priors import PriorSpec, prior_quantile_study, sample_prior
from .sampler import RunConfig, gelman_rubin, mwg_exponential, mwg_gaussian, mwg_gaussian_k2, mwg_poisson

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _load_config(path):
    if path is None:
        return {}
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def _prior_from_config(cfg: dict) -> PriorSpec:
    prior = cfg.get("prior", {})
    return PriorSpec(
        kind=prior.get("kind", "double_uniform"),
        alpha0=float(prior.get("alpha0", 1.0)),
        phi_beta=tuple(prior.get("phi_beta", (1.0, 1.0))),
        gamma_dirichlet_alpha=float(prior.get("gamma_dirichlet_alpha", 1.0)),
    )


def _run_config(cfg: dict, args) -> RunConfig:
    run = dict(cfg.get("run", {}))
    if args.iters is not None:
        run["iterations"] = args.iters
    if args.burnin is not None:
        run["burn_in"] = args.burnin
    if args.chains is not None:
        run["n_chains"] = args.chains
    if args.seed is not None:
        run["seed"] = args.seed
    if getattr(args, "proposal", None) is not None:
        run["proposal"] = args.proposal
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(run) - known
    if unknown:
        raise ValueError(f"unknown run options: {sorted(unknown)}")
    if "iterations" not in run:
        raise ValueError("the run configuration must set 'iterations'")
    if "adapt_horizon" in run and run["adapt_horizon"] is None:
        del run["adapt_horizon"]
    return RunConfig(**run)


def _read_data_csv(path) -> Dataset:
    values = []
    with open(path, newline="", encoding="utf-8") as handle:
        for row in csv.reader(handle):
            if not row:
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                continue  # header line
    if not values:
        raise ValueError(f"no observations found in {path}")
    return Dataset(np.array(values))


def _write_value_csv(path, values) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["value"])
        for v in values:
            writer.writerow([repr(float(v))])


# --------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    model = cfg.get("model", {})
    family = args.family or model.get("family") or cfg.get("family")
    if family not in ("gaussian", "poisson", "exponential"):
        raise ValueError("simulate needs a family (gaussian, poisson, exponential)")
    weights = np.asarray(model["weights"], dtype=float)
    locs = np.asarray(model["locs"], dtype=float)
    if abs(weights.sum() - 1.0) > 1e-9 or np.any(weights < 0):
        raise ValueError("model weights must form a simplex")
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    n = args.n
    if n < 0:
        raise ValueError("n must be nonnegative")
    comp = rng.choice(len(weights), size=n, p=weights)
    if family == "gaussian":
        scales = np.asarray(model["scales"], dtype=float)
        values = rng.normal(locs[comp], scales[comp])
    elif family == "poisson":
        values = rng.poisson(locs[comp]).astype(float)
    else:
        values = rng.exponential(locs[comp])
    _write_value_csv(args.out, values)
    return EXIT_OK


# --------------------------------------------------------------------------
# fit


def _select_sampler(family: str, k: int, config: RunConfig, args):
    if family == "gaussian":
        if k == 2 and getattr(args, "proposal", None) is not None:
            return "gaussian_k2", lambda data, spec: mwg_gaussian_k2(data, spec, config)
        return "gaussian", lambda data, spec: mwg_gaussian(data, k, spec, config)
    if family == "poisson":
        return "poisson", lambda data, spec: mwg_poisson(data, k, spec, config)
    if family == "exponential":
        return "exponential", lambda data, spec: mwg_exponential(data, k, spec, config)
    raise ValueError(f"unknown family {family!r}")


def _summary_payload(pooled, family: str) -> dict:
    map_params, map_index = find_map(pooled)
    relabelled, trace = relabel_map(pooled, map_params)
    report = detect_switching(trace)
    km = kmeans_summary(pooled)
    return {
        "parameters": summarise(pooled).table(),
        "map_relabelled": {
            "parameters": summarise(relabelled).table(),
            "map_index": map_index,
            "switching": {
                "distinct_permutations": report.distinct_permutations,
                "transitions": report.transitions,
                "longest_constant_run": report.longest_constant_run,
            },
        },
        "kmeans": {
            "columns": km["columns"],
            "centres": np.asarray(km["centres"]).tolist(),
            "medians": np.asarray(km["medians"]).tolist(),
        },
        "family": family,
    }


def _density_grid(pooled) -> np.ndarray:
    if pooled.family == "poisson":
        top = int(np.ceil(pooled.locs.max() * 3 + 10))
        return np.arange(0, top + 1, dtype=float)
    if pooled.family == "exponential":
        return np.linspace(1e-9, float(pooled.locs.max() * 6), 512)
    spread = float(pooled.scales.max())
    lo = float(pooled.locs.min()) - 4 * spread
    hi = float(pooled.locs.max()) + 4 * spread
    return np.linspace(lo, hi, 512)


def _write_density_csv(path, grid, curve) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["x", "density"])
        for x, d in zip(grid, curve):
            writer.writerow([repr(float(x)), repr(float(d))])


def cmd_fit(args) -> int:
    cfg = _load_config(args.config)
    family = args.family or cfg.get("family")
    if family not in ("gaussian", "poisson", "exponential"):
        raise ValueError("fit needs a family (gaussian, poisson, exponential)")
    k = args.k if args.k is not None else cfg.get("k")
    if k is None or int(k) < 2:
        raise ValueError("fit needs a component count k >= 2")
    k = int(k)
    prior = _prior_from_config(cfg)
    config = _run_config(cfg, args)
    data = _read_data_csv(args.data)
    data.check_family(family)

    sampler_name, runner = _select_sampler(family, k, config, args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    start = time.perf_counter()
    result = runner(data, prior)
    wall = time.perf_counter() - start

    chain_paths = []
    for i, chain in enumerate(result.chains):
        path = out_dir / f"chain_{i}.csv"
        chain_to_csv(chain, path)
        chain_paths.append(str(path))

    pooled = pool_draws(result.chains)
    summary = _summary_payload(pooled, family)
    summary_path = out_dir / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2), encoding="utf-8")

    grid = _density_grid(pooled)
    density_path = out_dir / "density.csv"
    _write_density_csv(density_path, grid, density_curve(pooled, grid))

    psrf = {}
    if config.n_chains >= 2:
        names = ("mu", "sigma") if family == "gaussian" else ("lam",)
        psrf = {name: gelman_rubin(result.chains, name) for name in names}

    manifest = {
        "chain_format_version": CHAIN_FORMAT_VERSION,
        "package_version": __version__,
        "family": family,
        "k": k,
        "sampler": sampler_name,
        "seed": config.seed,
        "config": {
            "prior": dataclasses.asdict(prior),
            "run": dataclasses.asdict(config),
        },
        "wall_clock_s": wall,
        "n_observations": data.n,
        "chains": [
            {
                "file": path,
                "final_scales": result.banks[i].scales,
                "acceptance_rates": rates,
            }
            for i, (path, rates) in enumerate(zip(chain_paths, result.acceptance_rates()))
        ],
        "psrf": psrf,
        "outputs": chain_paths + [str(summary_path), str(density_path)],
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    for path in manifest["outputs"]:
        if not Path(path).exists():
            raise RuntimeError(f"declared output missing: {path}")
    return EXIT_OK


# --------------------------------------------------------------------------
# prior-sample


def cmd_prior_sample(args) -> int:
    cfg = _load_config(args.config)
    family = args.family or cfg.get("family", "gaussian")
    k = int(args.k if args.k is not None else cfg.get("k", 2))
    prior = _prior_from_config(cfg)
    if args.kind is not None:
        prior = dataclasses.replace(prior, kind=args.kind)
    seed = args.seed if args.seed is not None else 0
    draws = sample_prior(prior, k, family, args.n, seed)
    out = Path(args.out)
    with open(out, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        if family == "gaussian":
            header = [f"p{i + 1}" for i in range(k)] + ["phi_sq", "phi_sign"]
            header += [f"varpi{i + 1}" for i in range(k - 2)]
            header += [f"xi{i + 1}" for i in range(k - 1)]
            writer.writerow(header)
            for i in range(draws.n):
                row = list(draws.weights[i]) + [draws.phi_sq[i], draws.phi_sign[i]]
                row += list(draws.varpi[i]) + list(draws.xi[i])
                writer.writerow([repr(float(v)) for v in row])
        else:
            header = [f"p{i + 1}" for i in range(k)] + [f"gamma{i + 1}" for i in range(k)]
            writer.writerow(header)
            for i in range(draws.n):
                row = list(draws.weights[i]) + list(draws.gamma[i])
                writer.writerow([repr(float(v)) for v in row])
    if args.quantiles:
        levels = [float(q) for q in args.quantiles.split(",")]
        table = prior_quantile_study(prior, k, args.n, levels, seed)
        qpath = args.quantile_out or str(out.with_name(out.stem + "_quantiles.csv"))
        with open(qpath, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow([f"q{level}" for level in levels])
            for row in table:
                writer.writerow([repr(float(v)) for v in row])
    return EXIT_OK


# --------------------------------------------------------------------------
# summarize


def cmd_summarize(args) -> int:
    family = args.family
    burn_in = args.burnin if args.burnin is not None else 0
    if args.manifest:
        manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        family = family or manifest["family"]
        if args.burnin is None:
            burn_in = manifest["config"]["run"]["burn_in"]
    if not args.data:
        raise ValueError("summarize needs at least one chain CSV via --data")
    chains = [chain_from_csv(path, family=family, burn_in=burn_in) for path in args.data]
    family = chains[0].family
    pooled = pool_draws(chains)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = _summary_payload(pooled, family)
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    grid = _density_grid(pooled)
    _write_density_csv(out_dir / "density.csv", grid, density_curve(pooled, grid))
    return EXIT_OK


# --------------------------------------------------------------------------
# oracle-check


def cmd_oracle_check(args) -> int:
    rng = np.random.default_rng(33)
    worst_rel = 0.0
    for _ in range(20):
        ti, tj = rng.uniform(0.1, 2.0, 2)
        ai, aj = rng.uniform(-3.0, 3.0, 2)
        dx = rng.uniform(0.1, 10.0) * rng.choice([-1.0, 1.0])
        x1 = rng.uniform(-5.0, 5.0)
        pi_, pj_ = rng.dirichlet([1.0, 1.0])
        closed = gaussian_pair_closed(pi_, pj_, ai, aj, ti, tj, x1, x1 - dx)
        quad = gaussian_pair_quad(pi_, pj_, ai, aj, ti, tj, x1, x1 - dx)
        worst_rel = max(worst_rel, abs(quad.value - closed) / closed)
    checks = {
        "gaussian_pair_agreement": {
            "pass": bool(worst_rel < 1e-5),
            "worst_relative_error": worst_rel,
            "cases": 20,
        }
    }

    marginal = {"pass": True, "cases": []}
    for family, points in (("poisson", (1.0, 3.0, 7.0)), ("exponential", (0.5, 2.0))):
        for x1 in points:
            for k in (2, 5):
                est = marginal_one_obs_mc(family, k, x1, n_mc=args.n_mc, seed=5)
                ok = abs(est.estimate - 1.0 / x1) < 3.0 * est.std_error + 1e-12
                marginal["pass"] = marginal["pass"] and bool(ok)
                marginal["cases"].append(
                    {
                        "family": family,
                        "k": k,
                        "x1": x1,
                        "estimate": est.estimate,
                        "std_error": est.std_error,
                        "target": 1.0 / x1,
                        "pass": bool(ok),
                    }
                )
    checks["rate_marginal_identity"] = marginal

    growth_ok = all(
        n1_divergence_probe(L * L) / n1_divergence_probe(L) == 2.0 for L in (2.0, 10.0, 1e3)
    )
    checks["single_observation_divergence"] = {
        "pass": bool(growth_ok),
        "probe_at_e": n1_divergence_probe(math.e),
    }

    payload = {"all_pass": all(c["pass"] for c in checks.values()), "checks": checks}
    text = json.dumps(payload, indent=2)
    print(text)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    return EXIT_OK if payload["all_pass"] else EXIT_NUMERICAL


# --------------------------------------------------------------------------
# argument wiring


def _add_common(parser, *names):
    if "config" in names:
        parser.add_argument("--config", help="declarative JSON configuration file")
    if "data" in names:
        parser.add_argument("--data", help="input CSV of observations")
    if "out" in names:
        parser.add_argument("--out", required=True, help="output file or directory")
    if "seed" in names:
        parser.add_argument("--seed", type=int, default=None)
    if "family" in names:
        parser.add_argument(
            "--family", choices=("gaussian", "poisson", "exponential"), default=None
        )
    if "k" in names:
        parser.add_argument("--k", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixanchor",
        description="Moment-anchored mixture estimation with weakly informative priors",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="draw a dataset from a mixture model")
    _add_common(sim, "config", "out", "seed", "family")
    sim.add_argument("--n", type=int, required=True)
    sim.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit", help="run the posterior sampler on a dataset")
    _add_common(fit, "config", "data", "out", "seed", "family", "k")
    fit.add_argument("--chains", type=int, default=None)
    fit.add_argument("--iters", type=int, default=None)
    fit.add_argument("--burnin", type=int, default=None)
    fit.add_argument("--proposal", type=int, choices=(1, 2), default=None)
    fit.set_defaults(func=cmd_fit)

    pri = sub.add_parser("prior-sample", help="draw from the weakly informative prior")
    _add_common(pri, "config", "out", "seed", "family", "k")
    pri.add_argument("--n", type=int, required=True)
    pri.add_argument("--kind", choices=("single_uniform", "double_uniform"), default=None)
    pri.add_argument("--quantiles", help="comma-separated levels for the quantile table")
    pri.add_argument("--quantile-out", dest="quantile_out", default=None)
    pri.set_defaults(func=cmd_prior_sample)

    summ = sub.add_parser("summarize", help="summarise previously written chains")
    summ.add_argument("--data", nargs="+", help="chain CSV files")
    summ.add_argument("--manifest", help="run manifest to read family and burn-in from")
    summ.add_argument("--out", required=True)
    summ.add_argument("--family", choices=("gaussian", "poisson", "exponential"))
    summ.add_argument("--burnin", type=int, default=None)
    summ.set_defaults(func=cmd_summarize)

    orc = sub.add_parser("oracle-check", help="run the propriety verification suite")
    orc.add_argument("--out", default=None)
    orc.add_argument("--n-mc", dest="n_mc", type=int, default=200_000)
    orc.set_defaults(func=cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (RuntimeError, ArithmeticError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
