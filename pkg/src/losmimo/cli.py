"""Command line interface: ``losmimo {search,pattern,montecarlo,oracle}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from .array_model import ArrayConfig, beampattern, gain_at
from .beamforming import two_element
from .harness import (
    ConfigError,
    ExperimentConfig,
    OutputError,
    run_experiment,
    run_oracle_comparison,
    write_beampattern,
    write_experiment,
    write_oracle_table,
)
from .scenario import Scenario, ScenarioError, validate
from .selection import DEFAULT_N_MAX, SelectionError, build_selection

log = logging.getLogger("losmimo")


def _add_array_args(p):
    p.add_argument("--antennas", type=int, default=100, help="number of array elements")
    p.add_argument("--spacing", type=float, default=0.5, help="element spacing in wavelengths")
    p.add_argument("--virtual", action="store_true",
                   help="allow companion indices beyond the physical array")


def _add_experiment_args(p):
    # None means "not given" so config-file values survive
    p.add_argument("--config", type=Path, help="JSON file with ExperimentConfig fields")
    p.add_argument("--users", type=int, help="total transmitters K")
    p.add_argument("--chains", type=int, help="receive chains r")
    p.add_argument("--antennas", dest="num_antennas", type=int, help="array size N_r")
    p.add_argument("--trials", type=int)
    p.add_argument("--snr-db", type=float)
    p.add_argument("--sir-db", type=float, help="desired power over total interference power")
    p.add_argument("--delta", type=float)
    p.add_argument("--n-max", type=int)
    p.add_argument("--spacing", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=("physical", "virtual"))
    p.add_argument("--epsilon", type=float)
    p.add_argument("--separation-tol", type=float)
    p.add_argument("--workers", type=int, help="parallel worker processes")
    p.add_argument("--output", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="losmimo",
        description="Antenna selection and interference nulling for LOS massive MU-MIMO.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="ergodic companion search for a scenario")
    p.add_argument("--scenario-file", type=Path, required=True)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--n-max", type=int, default=DEFAULT_N_MAX)
    _add_array_args(p)

    p = sub.add_parser("pattern", help="beam pattern of a two-element beamformer")
    p.add_argument("--scenario-file", type=Path, required=True)
    p.add_argument("--companion", type=int, required=True)
    p.add_argument("--grid", type=int, default=1801)
    p.add_argument("--output", type=Path, required=True)
    _add_array_args(p)

    p = sub.add_parser("montecarlo", help="Monte Carlo experiment")
    _add_experiment_args(p)
    p.add_argument("--method", choices=("ergodic", "pairwise", "joint", "oracle"))

    p = sub.add_parser("oracle", help="heuristics against exhaustive subset search")
    _add_experiment_args(p)
    return parser


def experiment_config(args, **overrides) -> ExperimentConfig:
    base = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    given = {
        f.name: getattr(args, f.name)
        for f in fields(ExperimentConfig)
        if getattr(args, f.name, None) is not None
    }
    given.update(overrides)
    try:
        return replace(base, **given)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _load_scenario(path) -> Scenario:
    try:
        return Scenario.load(path)
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario {path} is not valid JSON: {exc}") from None


def cmd_search(args) -> int:
    s = _load_scenario(args.scenario_file)
    cfg = ArrayConfig(args.antennas, args.spacing)
    report = validate(s)
    for v in report.violations:
        log.warning("sources %d and %d have cosines %.3g apart", v.first, v.second, v.cos_gap)
    sel, outcomes = build_selection(cfg, s, args.delta, args.n_max, virtual=args.virtual)
    doc = {
        "selection": sel.to_dict(),
        "support": list(sel.support),
        "outcomes": [o.to_dict() for o in outcomes],
        "mode": "virtual" if args.virtual else "physical",
    }
    print(json.dumps(doc, indent=2))
    return 0


def cmd_pattern(args) -> int:
    s = _load_scenario(args.scenario_file)
    num = args.antennas
    if args.companion >= num:
        if not args.virtual:
            raise ConfigError(
                f"companion {args.companion} is outside a {num}-element array (use --virtual)"
            )
        num = args.companion + 1
    cfg = ArrayConfig(num, args.spacing)
    w = two_element(args.companion)
    path = write_beampattern(beampattern(cfg, w, args.grid), args.output)
    doc = {
        "output": str(path),
        "desired_gain": gain_at(cfg.spacing, w, np.array(s.desired)).tolist(),
        "interferer_gain": gain_at(cfg.spacing, w, np.array(s.interferers)).tolist()
        if s.interferers else [],
    }
    print(json.dumps(doc, indent=2))
    return 0


def cmd_montecarlo(args) -> int:
    config = experiment_config(args, **({"method": args.method} if args.method else {}))
    start = time.perf_counter()
    records, summary = run_experiment(config)
    paths = write_experiment(records, summary, config.output)
    log.info("%d trials in %.2f s", len(records), time.perf_counter() - start)
    print(json.dumps({**{k: str(v) for k, v in paths.items()},
                      "median_sum_rate": summary.get("median_sum_rate"),
                      "errors": summary["errors"]}, indent=2))
    return 0


def cmd_oracle(args) -> int:
    overrides = {}
    if args.num_antennas is None and not args.config:
        overrides["num_antennas"] = 16
    if args.trials is None and not args.config:
        overrides["trials"] = 50
    config = experiment_config(args, **overrides)
    rows, summary = run_oracle_comparison(config)
    path = write_oracle_table(rows, Path(config.output) / "regret.csv")
    print(json.dumps({"output": str(path), **summary}, indent=2))
    return 0


COMMANDS = {
    "search": cmd_search,
    "pattern": cmd_pattern,
    "montecarlo": cmd_montecarlo,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ScenarioError, SelectionError, OutputError, ValueError) as exc:
        print(f"losmimo: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
