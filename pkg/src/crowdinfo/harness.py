"""Experiment grid: campaigns x policy groups x paired replications.

Replication ``r`` of campaign ``i`` runs every group with the same seed, so
groups see identical arrivals and backers and differ only in disclosures.
Revenue aggregates are normalized per campaign by its goal before averaging.
"""

from __future__ import annotations

import configparser
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import stats

from crowdinfo.backers import EstimatorParams
from crowdinfo.data_io import (
    CampaignRecord,
    RunRecord,
    SyntheticSpec,
    _write_csv,
    _write_text,
    generate_synthetic,
    load_campaigns,
    write_results,
)
from crowdinfo.engine import PolicyParams, SimConfig, run_campaign
from crowdinfo.policies import POLICY_NAMES

log = logging.getLogger(__name__)

SUMMARY_SCHEMA = "crowdinfo.summary/1"
COMPARE_SCHEMA = "crowdinfo.compare/1"
TRAJECTORY_SCHEMA = "crowdinfo.trajectory/1"
TRAJECTORY_STEP = 24


@dataclass(frozen=True)
class ExperimentConfig:
    groups: tuple[str, ...] = POLICY_NAMES
    replications: int = 30
    seed: int = 0
    campaigns: str | None = None
    traces: str | None = None
    synthetic: SyntheticSpec = SyntheticSpec(200)
    arrival_rate: float = 0.1
    spread_range: tuple[float, float] = (0.05, 0.5)
    max_patience: int = 48
    estimator: EstimatorParams = EstimatorParams()
    policy: PolicyParams = PolicyParams()
    out: str | None = None
    format: str = "csv"
    workers: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.groups:
            raise ValueError("at least one policy group is required")
        unknown = [g for g in self.groups if g not in POLICY_NAMES]
        if unknown:
            raise ValueError(f"unknown policy groups {unknown}; choose from {POLICY_NAMES}")
        if len(set(self.groups)) != len(self.groups):
            raise ValueError(f"duplicate policy groups in {self.groups}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        lo, hi = self.spread_range
        if not 0.05 <= lo <= hi <= 0.5:
            raise ValueError(f"valuation spread range must lie in [0.05, 0.5], got {self.spread_range}")
        if self.arrival_rate < 0:
            raise ValueError("arrival rate must be non-negative")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class GroupSummary:
    group: str
    runs: int
    expected_revenue: float  # mean M(T)/G over all runs
    actual_revenue: float  # mean settled/G, failures count as 0
    success_revenue: float  # mean M(T)/G over successful runs only
    success_rate: float
    expected_normalized: float = 0.0
    actual_normalized: float = 0.0


@dataclass
class Comparison:
    first: str
    second: str
    metric: str
    n: int
    mean_diff: float
    ci_low: float
    ci_high: float
    p_value: float


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    campaigns: list[CampaignRecord]
    runs: list[RunRecord]
    groups: dict[str, GroupSummary]
    trajectories: dict[str, np.ndarray] = field(repr=False, default_factory=dict)
    policy_ms: dict[str, float] = field(default_factory=dict)
    seconds: float = 0.0

    def per_campaign(self, group: str, metric: str = "settled") -> np.ndarray:
        """Mean goal-normalized revenue per campaign, in campaign order."""
        if metric not in ("settled", "revenue"):
            raise ValueError(f"unknown metric {metric!r}")
        index = {c.project_id: i for i, c in enumerate(self.campaigns)}
        sums = np.zeros(len(self.campaigns))
        counts = np.zeros(len(self.campaigns))
        for r in self.runs:
            if r.policy == group:
                i = index[r.campaign_id]
                sums[i] += getattr(r, metric) / r.goal
                counts[i] += 1
        if not counts.all():
            raise ValueError(f"group {group!r} lacks runs for some campaigns")
        return sums / counts


def replication_seed(master: int, campaign: int, replication: int) -> int:
    return int(np.random.SeedSequence([master, campaign, replication]).generate_state(1, np.uint64)[0])


def campaign_spreads(config: ExperimentConfig, count: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0x5EED]))
    return rng.uniform(*config.spread_range, size=count)


def load_campaign_source(config: ExperimentConfig) -> list[CampaignRecord]:
    if config.campaigns:
        return load_campaigns(config.campaigns, traces=config.traces)
    return generate_synthetic(config.seed, config.synthetic)


def _run_campaign_block(args):
    config, index, record, spread = args
    rows, trajectories, policy_seconds = [], {}, {}
    checkpoints = np.arange(TRAJECTORY_STEP, record.deadline + 1, TRAJECTORY_STEP) - 1
    for rep in range(config.replications):
        seed = replication_seed(config.seed, index, rep)
        for group in config.groups:
            sim = SimConfig(
                campaign=record.params(),
                policy=group,
                arrival_rate=config.arrival_rate,
                valuation_spread=float(spread),
                max_patience=config.max_patience,
                estimator=config.estimator,
                policy_params=config.policy,
                seed=seed,
            )
            res = run_campaign(sim, record_events=False)
            rows.append(RunRecord(record.project_id, group, rep, seed, record.goal, res.revenue, res.settled, res.success, 1000 * res.policy_seconds))
            trajectories.setdefault(group, []).append(res.cumulative_revenue[checkpoints] / record.goal)
            policy_seconds[group] = policy_seconds.get(group, 0.0) + res.policy_seconds
    return index, rows, trajectories, policy_seconds


def run_experiment(config: ExperimentConfig, campaigns: Sequence[CampaignRecord] | None = None) -> ExperimentReport:
    started = time.perf_counter()
    campaigns = list(campaigns) if campaigns is not None else load_campaign_source(config)
    ids = [c.project_id for c in campaigns]
    if len(set(ids)) != len(ids):
        raise ValueError("campaign ids must be unique")
    spreads = campaign_spreads(config, len(campaigns))
    jobs = [(config, i, c, spreads[i]) for i, c in enumerate(campaigns)]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            blocks = list(pool.map(_run_campaign_block, jobs, chunksize=max(1, len(jobs) // (4 * config.workers))))
    else:
        blocks = [_run_campaign_block(job) for job in jobs]
    blocks.sort(key=lambda b: b[0])

    runs: list[RunRecord] = []
    per_group_traj: dict[str, list[np.ndarray]] = {g: [] for g in config.groups}
    seconds = {g: 0.0 for g in config.groups}
    for _, rows, traj, secs in blocks:
        runs.extend(rows)
        for g in config.groups:
            per_group_traj[g].extend(traj.get(g, []))
            seconds[g] += secs.get(g, 0.0)

    groups = {g: summarize(g, [r for r in runs if r.policy == g]) for g in config.groups}
    for metric, attr in (("expected_revenue", "expected_normalized"), ("actual_revenue", "actual_normalized")):
        scaled = normalize_revenue([getattr(s, metric) for s in groups.values()])
        for s, v in zip(groups.values(), scaled):
            setattr(s, attr, v)
    n_runs = {g: max(1, groups[g].runs) for g in config.groups}
    report = ExperimentReport(
        config=config,
        campaigns=campaigns,
        runs=runs,
        groups=groups,
        trajectories={g: np.mean(v, axis=0) if v else np.zeros(0) for g, v in per_group_traj.items()},
        policy_ms={g: 1000 * seconds[g] / n_runs[g] for g in config.groups},
        seconds=time.perf_counter() - started,
    )
    return report


def summarize(group: str, runs: Sequence[RunRecord]) -> GroupSummary:
    if not runs:
        return GroupSummary(group, 0, 0.0, 0.0, 0.0, 0.0)
    revenue = np.array([r.revenue / r.goal for r in runs])
    settled = np.array([r.settled / r.goal for r in runs])
    success = np.array([r.success for r in runs])
    return GroupSummary(
        group=group,
        runs=len(runs),
        expected_revenue=float(revenue.mean()),
        actual_revenue=float(settled.mean()),
        success_revenue=float(revenue[success].mean()) if success.any() else 0.0,
        success_rate=float(success.mean()),
    )


def normalize_revenue(values: Sequence[float]) -> list[float]:
    """Scale so the largest value maps to 1; all-zero input stays zero."""
    values = [float(v) for v in values]
    top = max(values, default=0.0)
    if top <= 0:
        return [0.0] * len(values)
    return [v / top for v in values]


def paired_test(a: Sequence[float], b: Sequence[float], confidence: float = 0.95) -> tuple[float, float, float, float]:
    """Paired t-test of ``a - b``: (mean diff, CI low, CI high, two-sided p)."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"paired samples need equal 1-d shapes, got {a.shape} and {b.shape}")
    if a.size < 2:
        raise ValueError("paired test needs at least two pairs")
    d = a - b
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0 or not math.isfinite(sd):
        # degenerate: every pair differs by the same amount
        return mean, mean, mean, 1.0 if mean == 0 else 0.0
    half = float(stats.t.ppf((1 + confidence) / 2, d.size - 1)) * sd / math.sqrt(d.size)
    p = float(stats.ttest_rel(a, b).pvalue)
    return mean, mean - half, mean + half, p


def compare(report: ExperimentReport, metric: str = "settled", pairs: Sequence[tuple[str, str]] | None = None) -> list[Comparison]:
    """Pairwise paired tests on per-campaign goal-normalized revenue."""
    names = list(report.groups)
    if len(names) < 2:
        raise ValueError("comparison needs at least two groups")
    if pairs is None:
        pairs = [(a, b) for i, a in enumerate(names) for b in names[i + 1 :]]
    samples = {g: report.per_campaign(g, metric) for g in names}
    out = []
    for a, b in pairs:
        mean, lo, hi, p = paired_test(samples[a], samples[b])
        out.append(Comparison(a, b, metric, len(samples[a]), mean, lo, hi, p))
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


def write_report(report: ExperimentReport, out: str | Path, format: str = "csv") -> list[Path]:
    """Write runs, summary, comparisons and trajectories; timing goes to a sidecar.

    Everything except ``timing.json`` is a deterministic function of the config.
    """
    out = Path(out)
    written = []
    comparisons = compare(report, "settled") + compare(report, "revenue") if len(report.groups) > 1 else []
    if format == "json":
        path = out / "report.json"
        doc = {
            "schema": "crowdinfo.report/1",
            "groups": {g: vars(s) for g, s in report.groups.items()},
            "comparisons": [vars(c) for c in comparisons],
            "runs": [{k: v for k, v in vars(r).items() if k != "policy_ms"} for r in report.runs],
        }
        _write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
        written.append(path)
    else:
        path = out / "runs.csv"
        write_results(report.runs, path, "csv")
        written.append(path)

        path = out / "summary.csv"
        header = [f.name for f in fields(GroupSummary)]
        rows = [[s.group, s.runs] + [_fmt(getattr(s, h)) for h in header[2:]] for s in report.groups.values()]
        _write_csv(path, SUMMARY_SCHEMA, header, rows)
        written.append(path)

        path = out / "comparisons.csv"
        header = [f.name for f in fields(Comparison)]
        rows = [[c.first, c.second, c.metric, c.n] + [_fmt(getattr(c, h)) for h in header[4:]] for c in comparisons]
        _write_csv(path, COMPARE_SCHEMA, header, rows)
        written.append(path)

        path = out / "trajectory.csv"
        names = list(report.trajectories)
        length = max((len(v) for v in report.trajectories.values()), default=0)
        rows = [[TRAJECTORY_STEP * (j + 1)] + [_fmt(report.trajectories[g][j]) for g in names] for j in range(length)]
        _write_csv(path, TRAJECTORY_SCHEMA, ["period"] + names, rows)
        written.append(path)

    path = out / "timing.json"
    timing = {"policy_ms_per_run": report.policy_ms, "wall_seconds": report.seconds}
    _write_text(path, json.dumps(timing, indent=2, sort_keys=True) + "\n")
    written.append(path)
    return written


# Config files are INI: [experiment], [synthetic], [population], [estimator], [policy].
_CONFIG_KEYS = {
    "experiment": {"groups", "replications", "seed", "campaigns", "traces", "out", "format", "workers"},
    "synthetic": {"count", "goal_min", "goal_max", "deadline", "price_fraction_min", "price_fraction_max", "reward_factor_min", "reward_factor_max"},
    "population": {"arrival_rate", "spread_min", "spread_max", "max_patience"},
    "estimator": {"rollouts", "prior_weight", "prior_scale", "optimism_min", "optimism_max"},
    "policy": {"learning_rate", "c", "mu", "sigma"},
}


def load_config(path: str | Path) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    path = Path(path)
    try:
        with open(path) as handle:
            parser.read_file(handle)
    except configparser.Error as exc:
        raise ValueError(f"{path}: {exc}") from None
    for section in parser.sections():
        if section not in _CONFIG_KEYS:
            raise ValueError(f"{path}: unknown section [{section}]")
        extra = set(parser[section]) - _CONFIG_KEYS[section]
        if extra:
            raise ValueError(f"{path}: unknown keys in [{section}]: {sorted(extra)}")

    def get(section, key, convert, default):
        if not parser.has_option(section, key):
            return default
        raw = parser.get(section, key).strip()
        try:
            return convert(raw)
        except ValueError as exc:
            raise ValueError(f"{path}: [{section}] {key} = {raw!r}: {exc}") from None

    base = ExperimentConfig()
    syn, est, pol = base.synthetic, base.estimator, base.policy
    groups = get("experiment", "groups", lambda s: tuple(g.strip() for g in s.split(",") if g.strip()), base.groups)
    synthetic = SyntheticSpec(
        count=get("synthetic", "count", int, syn.count),
        goal_range=(get("synthetic", "goal_min", int, syn.goal_range[0]), get("synthetic", "goal_max", int, syn.goal_range[1])),
        deadline=get("synthetic", "deadline", int, syn.deadline),
        price_fraction_range=(
            get("synthetic", "price_fraction_min", float, syn.price_fraction_range[0]),
            get("synthetic", "price_fraction_max", float, syn.price_fraction_range[1]),
        ),
        reward_factor_range=(
            get("synthetic", "reward_factor_min", float, syn.reward_factor_range[0]),
            get("synthetic", "reward_factor_max", float, syn.reward_factor_range[1]),
        ),
    )
    estimator = EstimatorParams(
        rollouts=get("estimator", "rollouts", int, est.rollouts),
        prior_weight=get("estimator", "prior_weight", float, est.prior_weight),
        prior_scale=get("estimator", "prior_scale", float, est.prior_scale),
        optimism=(get("estimator", "optimism_min", float, est.optimism[0]), get("estimator", "optimism_max", float, est.optimism[1])),
    )
    policy = PolicyParams(
        learning_rate=get("policy", "learning_rate", float, pol.learning_rate),
        c=get("policy", "c", float, pol.c),
        mu=get("policy", "mu", float, pol.mu),
        sigma=get("policy", "sigma", float, pol.sigma),
    )

    def relative(value):
        # file paths in a config are relative to the config's directory
        return str((path.parent / value).resolve()) if value else None

    return ExperimentConfig(
        groups=groups,
        replications=get("experiment", "replications", int, base.replications),
        seed=get("experiment", "seed", int, base.seed),
        campaigns=get("experiment", "campaigns", relative, None),
        traces=get("experiment", "traces", relative, None),
        synthetic=synthetic,
        arrival_rate=get("population", "arrival_rate", float, base.arrival_rate),
        spread_range=(get("population", "spread_min", float, base.spread_range[0]), get("population", "spread_max", float, base.spread_range[1])),
        max_patience=get("population", "max_patience", int, base.max_patience),
        estimator=estimator,
        policy=policy,
        out=get("experiment", "out", relative, None),
        format=get("experiment", "format", str, base.format),
        workers=get("experiment", "workers", int, base.workers),
    )


def with_overrides(config: ExperimentConfig, **overrides) -> ExperimentConfig:
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})
