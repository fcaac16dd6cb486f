"""Command-line entry point with the four subcommands.

    shrinkreg fit      --data.path=... --prior.family=horseshoe_ms ...
    shrinkreg simulate --simulate.study=conj_vs_ind_table --full ...
    shrinkreg evidence --data.path=...
    shrinkreg quantile --data.path=... --levels 0.25,0.5,0.75

Any `--section.key=value` flag overrides the same key from `--config`.
Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, parse_config
from .data import CsvFormatError, load_csv
from .kernels import PositiveDefiniteError, SingularInnerSystemError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _split_overrides(extras):
    overrides = {}
    for item in extras:
        if not item.startswith("--") or "=" not in item:
            raise ConfigError(f"unrecognized argument {item!r} (expected --section.key=value)")
        key, val = item[2:].split("=", 1)
        overrides[key] = val
    return overrides


def _base_parser(name):
    p = argparse.ArgumentParser(prog=f"shrinkreg {name}", add_help=True)
    p.add_argument("--config", default=None, help="flat section.key = value config file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None, help="output directory")
    return p


def _load_dataset(cfg: RunConfig):
    path = cfg.values.get("data.path")
    if not path:
        raise ConfigError("data.path is required")
    return load_csv(path, cfg.values["data.response"], cfg.values["data.standardize"])


def cmd_fit(argv) -> int:
    parser = _base_parser("fit")
    parser.add_argument("--legacy-dof", action="store_true")
    args, extras = parser.parse_known_args(argv)
    overrides = _split_overrides(extras)
    if args.seed is not None:
        overrides["sampler.seed"] = args.seed
    if args.out is not None:
        overrides["output.directory"] = args.out
    if args.legacy_dof:
        overrides["sampler.legacy_dof"] = True
    cfg = parse_config(args.config, overrides)
    dataset = _load_dataset(cfg)
    from .engine import run_chains
    from .output import write_outputs

    plan = cfg.sampler_plan()
    store = run_chains(plan, dataset.to_regression_data(), n_jobs=args.threads)
    paths = write_outputs(store, cfg, cfg.values["output.directory"], dataset.column_names)
    print(f"retained {store.n_draws} draws over {plan.chains} chain(s)")
    for k, v in paths.items():
        print(f"  {k}: {v}")
    return EXIT_OK


def cmd_simulate(argv) -> int:
    parser = _base_parser("simulate")
    parser.add_argument("--full", action="store_true",
                        help="run the full 100-replication protocol")
    args, extras = parser.parse_known_args(argv)
    overrides = _split_overrides(extras)
    if args.seed is not None:
        overrides["sampler.seed"] = args.seed
    cfg = parse_config(args.config, overrides)
    from .simulate import SimConfig, format_table, run_study, table_to_csv

    sim = SimConfig(
        n=cfg.values["simulate.n"], p=cfg.values["simulate.p"],
        r2_pop=cfg.values["simulate.r2_pop"],
        replications=cfg.values["simulate.replications"],
        seed=cfg.values["sampler.seed"],
    )
    rows = run_study(cfg.values["simulate.study"], sim,
                     iterations=cfg.values["sampler.iterations"],
                     burn_in=cfg.values["sampler.burn_in"],
                     full=args.full, n_jobs=args.threads)
    print(format_table(rows))
    outdir = Path(args.out or cfg.values["output.directory"])
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / f"{cfg.values['simulate.study']}_p{sim.p}_r{sim.r2_pop}.csv"
    table_to_csv(rows, csv_path)
    print(f"table written to {csv_path}")
    return EXIT_OK


def cmd_evidence(argv) -> int:
    parser = _base_parser("evidence")
    parser.add_argument("--sddr-at", type=float, default=None,
                        help="Savage-Dickey ratio at this restriction (p=1 data)")
    args, extras = parser.parse_known_args(argv)
    cfg = parse_config(args.config, _split_overrides(extras))
    dataset = _load_dataset(cfg)
    from .evidence import ConjugateModel, bma_enumerate_gprior, log_marginal_conjugate, sddr

    v = cfg.values
    model = ConjugateModel(d=np.eye(dataset.p) * v["evidence.prior_variance"],
                           v0=v["evidence.v0"], s0=v["evidence.s0"])
    out = {"log_marginal": log_marginal_conjugate(model, dataset.x, dataset.y)}
    if dataset.p <= 25:
        bma = bma_enumerate_gprior(dataset.x, dataset.y, g_rule=v["evidence.g_rule"],
                                   g=v["evidence.g"], model_prior_pi0=v["evidence.model_prior_pi0"])
        out["median_probability_model"] = [dataset.column_names[j] for j in bma.median_model]
        out["pip"] = {dataset.column_names[j]: float(bma.pip[j]) for j in range(dataset.p)}
        out["top_models"] = [{"columns": [dataset.column_names[j] for j in cols],
                              "probability": pr} for cols, pr in bma.models[:5]]
    if args.sddr_at is not None:
        if dataset.p != 1:
            raise ConfigError("--sddr-at needs a single-covariate dataset")
        out["sddr"] = sddr(model, dataset.x, dataset.y, args.sddr_at)
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_quantile(argv) -> int:
    parser = _base_parser("quantile")
    parser.add_argument("--levels", default=None, help="comma-separated levels in (0,1)")
    args, extras = parser.parse_known_args(argv)
    overrides = _split_overrides(extras)
    if args.levels:
        overrides["quantile.levels"] = args.levels
    if args.seed is not None:
        overrides["sampler.seed"] = args.seed
    cfg = parse_config(args.config, overrides)
    dataset = _load_dataset(cfg)
    from .quantile import run_quantile_grid

    spec = cfg.quantile_spec()
    result = run_quantile_grid(dataset.to_regression_data(), spec,
                               iterations=cfg.values["sampler.iterations"],
                               burn_in=cfg.values["sampler.burn_in"],
                               seed=cfg.values["sampler.seed"], n_jobs=args.threads)
    out = {"levels": {}}
    for r, draws in sorted(result.draws.items()):
        std_means = draws.beta.mean(axis=0)
        coef, intercept = dataset.destandardize(std_means)
        out["levels"][f"{r:g}"] = {
            "coefficients": {n: float(c) for n, c in zip(dataset.column_names, coef)},
            "intercept": float(intercept),
            "sigma2_mean": float(draws.sigma2.mean()),
        }
    if result.crossing_rate is not None:
        out["quantile_crossing_rate"] = result.crossing_rate
    if result.failures:
        out["failures"] = result.failures
    print(json.dumps(out, indent=2))
    return EXIT_OK


COMMANDS = {"fit": cmd_fit, "simulate": cmd_simulate,
            "evidence": cmd_evidence, "quantile": cmd_quantile}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(__doc__)
        return EXIT_OK
    cmd = argv[0]
    if cmd not in COMMANDS:
        print(f"unknown subcommand {cmd!r}; choose from {sorted(COMMANDS)}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[cmd](argv[1:])
    except (ConfigError, CsvFormatError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PositiveDefiniteError, SingularInnerSystemError, FloatingPointError,
            np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
