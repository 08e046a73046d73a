"""Command-line entry point: ``mixedadc <verb> --config FILE [--seed N] [--out DIR]``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .experiment import (
    ConfigError,
    ExperimentConfig,
    VerificationFailed,
    compare_scenarios,
    run_experiment,
)
from .scenario import ScenarioRecipe

log = logging.getLogger("mixedadc")

OUT_ENV = "MIXEDADC_OUT"
EXIT_OK, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2


def _load(path, seed):
    config = ExperimentConfig.load(path) if path else ExperimentConfig()
    if seed is not None:
        config = config.replace(base_seed=seed)
    return config


def _gen_topo(args, config):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    recipe: ScenarioRecipe = config.recipe
    (out / "resolved_config.json").write_text(config.to_json())
    for t in range(config.n_topologies):
        seed = config.topology_seed(t)
        recipe.topology(config.m_low, seed).save(out / f"topology_{t:04d}.tsv")
        recipe.beta(config.m_low, seed).save(out / f"beta_{t:04d}.tsv")
    log.info("wrote %d topologies to %s", config.n_topologies, out)


def _run(args, config, mode=None):
    if mode is not None:
        config = config.replace(mode=mode)
    paths = run_experiment(config, args.out, workers=args.workers)
    for role, path in paths.items():
        log.info("%s: %s", role, path)


def _compare(args, config):
    other = _load(args.other, args.seed)
    cmp = compare_scenarios(config, other, workers=args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config_a.json").write_text(config.to_json())
    (out / "config_b.json").write_text(other.to_json())
    (out / "comparison.tsv").write_text(cmp.to_text())
    print(f"likely95 a={cmp.cdf_a.likely95:.6g} b={cmp.cdf_b.likely95:.6g} ratio={cmp.ratio:.6g}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixedadc", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)
    verbs = {
        "gen-topo": "draw and save topologies and beta matrices",
        "run": "run the mode named in the config",
        "verify": "term-wise Monte Carlo check of the closed form",
        "ee-grid": "energy-efficiency grid over (M_l, B)",
        "compare": "compare 95%%-likely throughput of two configs",
    }
    for verb, text in verbs.items():
        p = sub.add_parser(verb, help=text)
        p.add_argument("--config", help="JSON experiment config (defaults if omitted)")
        p.add_argument("--seed", type=int, help="override base_seed")
        p.add_argument("--out", default=os.environ.get(OUT_ENV, "out"), help=f"output directory (env {OUT_ENV})")
        p.add_argument("--workers", type=int, default=1, help="threads for Monte Carlo blocks")
        p.add_argument("-v", "--verbose", action="store_true")
        if verb == "compare":
            p.add_argument("--other", required=True, help="config of the second scenario")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; keep 2 for failed verification
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        config = _load(args.config, args.seed)
        if args.verb == "gen-topo":
            _gen_topo(args, config)
        elif args.verb == "run":
            _run(args, config)
        elif args.verb == "verify":
            _run(args, config, "verify")
        elif args.verb == "ee-grid":
            _run(args, config, "ee_grid")
        elif args.verb == "compare":
            _compare(args, config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VerificationFailed as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_VERIFY
    except OSError as exc:
        print(f"config error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
