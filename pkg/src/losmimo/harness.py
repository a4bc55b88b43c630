"""Monte Carlo experiments over random scenarios and their CSV output."""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .array_model import ArrayConfig
from .beamforming import covariance_beamformer, sinr, two_element
from .metrics import main_theorem_check, rate_report, rates_from_sinr
from .scenario import DEFAULT_SEPARATION_TOL, ScenarioError, random_scenario
from .selection import (
    SelectionError,
    achieved_delta,
    build_selection,
    exhaustive_oracle,
    pairwise_selection,
)

log = logging.getLogger(__name__)

METHODS = ("ergodic", "pairwise", "joint", "oracle")
MODES = ("physical", "virtual")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class OutputError(OSError):
    """A result file could not be written."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of a Monte Carlo run; defaults follow the reference setup."""

    num_antennas: int = 100
    chains: int = 3
    users: int = 5
    trials: int = 500
    snr_db: float = 10.0
    sir_db: float = -7.0
    delta: float = 0.1
    n_max: int = 100_000
    spacing: float = 0.5
    seed: int = 0
    mode: str = "physical"
    method: str = "joint"
    output: str = "results"
    epsilon: float = 0.1
    separation_tol: float = DEFAULT_SEPARATION_TOL
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.chains < 2:
            raise ConfigError("chains must be >= 2")
        if self.users < self.chains - 1:
            raise ConfigError("users must be >= chains - 1")
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if self.n_max < 1:
            raise ConfigError("n_max must be >= 1")
        if self.num_antennas < self.chains:
            raise ConfigError("num_antennas must be >= chains")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.mode == "virtual" and self.method in ("pairwise", "oracle"):
            raise ConfigError(f"method {self.method!r} only runs on the physical array")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    @property
    def array(self) -> ArrayConfig:
        return ArrayConfig(self.num_antennas, self.spacing)

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(data)


@dataclass
class TrialRecord:
    trial_index: int
    desired_deg: tuple[float, ...] = ()
    interferers_deg: tuple[float, ...] = ()
    reference: int = 0
    companions: tuple[int, ...] = ()
    achieved_delta: tuple[float, ...] = ()
    satisfied: tuple[bool, ...] = ()
    sinr: tuple[float, ...] = ()
    rate: tuple[float, ...] = ()
    sum_rate: float = 0.0
    logdet_rate: float = 0.0
    bound_status: str = "n/a"
    meets_target: bool = False
    error: str = ""
    # excluded from the CSV so that records do not depend on scheduling
    wall_time: float = field(default=0.0, compare=False)

    @property
    def sinr_db(self) -> tuple[float, ...]:
        return tuple(10 * math.log10(x) for x in self.sinr)

    @property
    def ok(self) -> bool:
        return not self.error


def run_trial(config: ExperimentConfig, trial_index: int) -> TrialRecord:
    """Generate, select, beamform and evaluate a single trial."""
    start = time.perf_counter()
    try:
        record = _run_trial(config, trial_index)
    except (SelectionError, ScenarioError, np.linalg.LinAlgError) as exc:
        record = TrialRecord(trial_index, error=f"{type(exc).__name__}: {exc}")
    record.wall_time = time.perf_counter() - start
    return record


def _run_trial(config: ExperimentConfig, t: int) -> TrialRecord:
    cfg = config.array
    r, K = config.chains, config.users
    s = random_scenario(
        config.seed, t, r, K, config.snr_db, config.sir_db, config.separation_tol
    )
    virtual = config.mode == "virtual"
    if config.method in ("ergodic", "joint"):
        sel, outcomes = build_selection(cfg, s, config.delta, config.n_max, virtual=virtual)
        deltas = [o.achieved_delta for o in outcomes]
        if config.method == "ergodic":
            W = [two_element(n) for n in sel.companions]
        else:
            W = [covariance_beamformer(cfg, s, sel, i) for i in range(s.num_desired)]
    elif config.method == "pairwise":
        limit = min(config.n_max, cfg.num_antennas - 1)
        sel, _ = pairwise_selection(cfg, s, limit)
        deltas = [achieved_delta(cfg, s, i, n) for i, n in enumerate(sel.companions)]
        W = [covariance_beamformer(cfg, s, (0, n), i) for i, n in enumerate(sel.companions)]
    else:
        sel, _ = exhaustive_oracle(cfg, s, r)
        deltas = []
        W = [covariance_beamformer(cfg, s, sel, i) for i in range(s.num_desired)]

    report = rate_report(cfg, s, W, r=r)
    if deltas:
        worst = max(deltas)
        check = main_theorem_check(report, config.epsilon, worst, K, r, s.snr)
        if not check.precondition_ok:
            status = "precondition"
        else:
            status = "pass" if check.in_sandwich else "fail"
        meets = check.meets_target
    else:
        status = "n/a"
        target = (r - 1) * math.log2(1 + s.snr) - config.epsilon
        meets = report.sum_rate >= target
    return TrialRecord(
        trial_index=t,
        desired_deg=tuple(float(np.degrees(x)) for x in s.desired),
        interferers_deg=tuple(float(np.degrees(x)) for x in s.interferers),
        reference=sel.reference,
        companions=sel.companions,
        achieved_delta=tuple(deltas),
        satisfied=tuple(d < config.delta for d in deltas),
        sinr=report.sinr,
        rate=report.per_user_rate,
        sum_rate=report.sum_rate,
        logdet_rate=report.logdet_rate,
        bound_status=status,
        meets_target=bool(meets),
    )


def _map_trials(func, config: ExperimentConfig, indices) -> list:
    indices = list(indices)
    if config.workers == 1 or len(indices) == 1:
        return [func(config, t) for t in indices]
    chunksize = max(1, len(indices) // (4 * config.workers))
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(func, [config] * len(indices), indices, chunksize=chunksize))


def empirical_cdf(values) -> list[tuple[float, float]]:
    """Sorted ``(value, i/N)`` pairs, ``i = 1..N``."""
    values = sorted(float(v) for v in values)
    n = len(values)
    return [(v, (i + 1) / n) for i, v in enumerate(values)]


def summarize(config: ExperimentConfig, records: list[TrialRecord]) -> dict:
    good = [rec for rec in records if rec.ok]
    sums = np.array([rec.sum_rate for rec in good])
    status_counts: dict[str, int] = {}
    for rec in good:
        status_counts[rec.bound_status] = status_counts.get(rec.bound_status, 0) + 1
    summary = {
        # scheduling and destination do not affect results
        "config": {k: v for k, v in asdict(config).items() if k not in ("workers", "output")},
        "trials": len(records),
        "errors": len(records) - len(good),
        "unsatisfied_trials": sum(1 for rec in good if not all(rec.satisfied)),
        "bound_status": dict(sorted(status_counts.items())),
        "meets_target": sum(rec.meets_target for rec in good),
    }
    if good:
        min_sinr = np.array([min(rec.sinr_db) for rec in good])
        summary.update(
            median_sum_rate=float(np.median(sums)),
            mean_sum_rate=float(np.mean(sums)),
            median_min_sinr_db=float(np.median(min_sinr)),
        )
    return summary


def run_experiment(config: ExperimentConfig) -> tuple[list[TrialRecord], dict]:
    """Run every trial, in parallel when ``config.workers > 1``.

    Trials draw from independent streams keyed by their index, so the
    records are identical for any worker count.
    """
    records = _map_trials(run_trial, config, range(config.trials))
    records.sort(key=lambda rec: rec.trial_index)
    for rec in records:
        if rec.error:
            log.warning("trial %d failed: %s", rec.trial_index, rec.error)
    return records, summarize(config, records)


# -- oracle comparison -------------------------------------------------------


def compare_with_oracle(config: ExperimentConfig, t: int) -> dict:
    """Sum rates of the pairwise and joint heuristics against the exhaustive optimum."""
    cfg = config.array
    r, K = config.chains, config.users
    s = random_scenario(config.seed, t, r, K, config.snr_db, config.sir_db, config.separation_tol)
    best_sel, best_sinrs = exhaustive_oracle(cfg, s, r)
    _, oracle_sum = rates_from_sinr(best_sinrs)

    limit = min(config.n_max, cfg.num_antennas - 1)
    pair_sel, pair_sinrs = pairwise_selection(cfg, s, limit)
    _, pair_sum = rates_from_sinr(pair_sinrs)

    joint_sel, _ = build_selection(cfg, s, config.delta, config.n_max)
    joint_sinrs = []
    for i in range(s.num_desired):
        w = covariance_beamformer(cfg, s, joint_sel, i)
        joint_sinrs.append(sinr(cfg, s, w, i))
    _, joint_sum = rates_from_sinr(joint_sinrs)
    return {
        "trial_index": t,
        "oracle_support": best_sel.support,
        "oracle_sum_rate": oracle_sum,
        "pairwise_support": pair_sel.support,
        "pairwise_sum_rate": pair_sum,
        "pairwise_regret": oracle_sum - pair_sum,
        "joint_support": joint_sel.support,
        "joint_sum_rate": joint_sum,
        "joint_regret": oracle_sum - joint_sum,
    }


def run_oracle_comparison(config: ExperimentConfig) -> tuple[list[dict], dict]:
    rows = _map_trials(compare_with_oracle, config, range(config.trials))
    rows.sort(key=lambda row: row["trial_index"])
    pair = np.array([row["pairwise_regret"] for row in rows])
    joint = np.array([row["joint_regret"] for row in rows])
    # same support scored by the batched and the single-solve path differs by rounding
    tol = 1e-12
    summary = {
        "trials": len(rows),
        "pairwise_mean_regret": float(pair.mean()),
        "pairwise_dominated": int(np.sum(pair >= -tol)),
        "joint_mean_regret": float(joint.mean()),
        "joint_dominated": int(np.sum(joint >= -tol)),
    }
    return rows, summary


# -- CSV output ----------------------------------------------------------------


def fmt(x) -> str:
    """Number formatting shared by every CSV: 9 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.9g}"
    if isinstance(x, (tuple, list)):
        return ";".join(fmt(v) for v in x)
    return str(x)


def emit_csv(path, header, rows) -> Path:
    """Write a UTF-8 CSV with a header row; values go through :func:`fmt`."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt(v) for v in row])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None
    return path


RECORD_COLUMNS = (
    "trial_index",
    "desired_deg",
    "interferers_deg",
    "reference",
    "companions",
    "achieved_delta",
    "satisfied",
    "sinr_db",
    "rate",
    "sum_rate",
    "logdet_rate",
    "bound_status",
    "meets_target",
    "error",
)


def write_records(records, path) -> Path:
    rows = ([getattr(rec, col) for col in RECORD_COLUMNS] for rec in records)
    return emit_csv(path, RECORD_COLUMNS, rows)


def write_cdf(values, path) -> Path:
    return emit_csv(path, ("value", "cumulative_probability"), empirical_cdf(values))


def write_beampattern(pattern, path) -> Path:
    return emit_csv(path, ("theta_rad", "gain"), pattern)


def write_experiment(records, summary, outdir) -> dict[str, Path]:
    """records.csv, sumrate_cdf.csv, sinr_cdf.csv and summary.json under ``outdir``."""
    outdir = Path(outdir)
    good = [rec for rec in records if rec.ok]
    paths = {
        "records": write_records(records, outdir / "records.csv"),
        "sumrate_cdf": write_cdf([rec.sum_rate for rec in good], outdir / "sumrate_cdf.csv"),
        "sinr_cdf": write_cdf([min(rec.sinr_db) for rec in good], outdir / "sinr_cdf.csv"),
    }
    summary_path = outdir / "summary.json"
    try:
        summary_path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {summary_path}: {exc.strerror or exc}") from None
    paths["summary"] = summary_path
    return paths


ORACLE_COLUMNS = (
    "trial_index",
    "oracle_support",
    "oracle_sum_rate",
    "pairwise_support",
    "pairwise_sum_rate",
    "pairwise_regret",
    "joint_support",
    "joint_sum_rate",
    "joint_regret",
)


def write_oracle_table(rows, path) -> Path:
    return emit_csv(path, ORACLE_COLUMNS, ([row[c] for c in ORACLE_COLUMNS] for row in rows))
