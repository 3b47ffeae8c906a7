"""Campaign files, early-bird normalization, synthetic campaigns and result files.

File schemas (first line of every CSV is a ``# schema: <name>/<version>``
comment; readers accept files without it):

``campaigns.csv``
    project_id, goal, deadline_periods, reward_count, pledge_price
``traces.csv``
    project_id, period, cumulative_fraction
``runs.csv``
    campaign_id, policy, replication, seed, goal, revenue, settled, success

Money columns are integer minor units; fractions are decimal strings.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from crowdinfo.campaign import CampaignParams

log = logging.getLogger(__name__)

CAMPAIGNS_SCHEMA = "crowdinfo.campaigns/1"
TRACES_SCHEMA = "crowdinfo.traces/1"
RUNS_SCHEMA = "crowdinfo.runs/1"
REPORT_SCHEMA = "crowdinfo.report/1"

CAMPAIGN_FIELDS = ["project_id", "goal", "deadline_periods", "reward_count", "pledge_price"]
TRACE_FIELDS = ["project_id", "period", "cumulative_fraction"]
RUN_FIELDS = ["campaign_id", "policy", "replication", "seed", "goal", "revenue", "settled", "success"]


class CampaignFormatError(ValueError):
    pass


@dataclass
class CampaignRecord:
    project_id: str
    goal: int
    deadline: int
    rewards: int
    price: int
    trace: list[tuple[int, Fraction]] = field(default_factory=list)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.deadline <= 0:
            raise ValueError(f"deadline must be positive, got {self.deadline}")
        self.params()  # goal/price/reward checks
        last_period, last_fraction = 0, Fraction(0)
        for period, fraction in self.trace:
            if not 1 <= period <= self.deadline:
                raise ValueError(f"trace period {period} outside [1, {self.deadline}]")
            if period <= last_period:
                raise ValueError(f"trace periods must increase (period {period})")
            if fraction < last_fraction:
                raise ValueError(f"cumulative fraction decreases at period {period}")
            last_period, last_fraction = period, fraction

    def params(self) -> CampaignParams:
        return CampaignParams(goal=self.goal, deadline=self.deadline, rewards=self.rewards, price=self.price)


def normalize_early_bird(pledge_value: float, regular_price: float) -> float:
    """Weight of a discounted pledge in units of the regular pledge."""
    if pledge_value <= 0 or regular_price <= 0:
        raise ValueError(f"pledge value and price must be positive, got {pledge_value}, {regular_price}")
    return pledge_value / regular_price


def _data_lines(handle):
    """Yield (line number, line) skipping schema comments and blank lines."""
    for number, line in enumerate(handle, start=1):
        if line.startswith("#") or not line.strip():
            continue
        yield number, line


def _read_csv(path: Path, fields: Sequence[str]):
    with open(path, newline="") as handle:
        lines = list(_data_lines(handle))
    if not lines:
        return []
    numbers = [n for n, _ in lines]
    reader = csv.DictReader(line for _, line in lines)
    missing = [f for f in fields if f not in (reader.fieldnames or [])]
    if missing:
        raise CampaignFormatError(f"{path}:{numbers[0]}: missing columns {missing}")
    return [(numbers[i + 1], row) for i, row in enumerate(reader)]


def _field(path, line, row, name, convert):
    try:
        return convert(row[name])
    except (TypeError, ValueError, ArithmeticError) as exc:
        raise CampaignFormatError(f"{path}:{line}: bad {name} {row.get(name)!r}: {exc}") from None


def load_campaigns(path, format: str | None = None, traces: str | Path | None = None) -> list[CampaignRecord]:
    """Read campaign records from CSV (plus optional traces CSV) or JSON."""
    path = Path(path)
    format = (format or path.suffix.lstrip(".")).lower()
    if format == "json":
        return _load_campaigns_json(path)
    if format != "csv":
        raise ValueError(f"unsupported campaign format {format!r}")

    rows = _read_csv(path, CAMPAIGN_FIELDS)
    if not rows:
        log.warning("no campaigns in %s", path)
        return []
    partial = {}
    for line, row in rows:
        pid = row["project_id"]
        if pid in partial:
            raise CampaignFormatError(f"{path}:{line}: duplicate project_id {pid!r}")
        partial[pid] = (
            line,
            dict(
                project_id=pid,
                goal=_field(path, line, row, "goal", int),
                deadline=_field(path, line, row, "deadline_periods", int),
                rewards=_field(path, line, row, "reward_count", int),
                price=_field(path, line, row, "pledge_price", int),
                trace=[],
            ),
        )
    trace_lines: dict[str, list[int]] = {}
    if traces is not None:
        for line, row in _read_csv(Path(traces), TRACE_FIELDS):
            pid = row["project_id"]
            if pid not in partial:
                raise CampaignFormatError(f"{traces}:{line}: unknown project_id {pid!r}")
            period = _field(traces, line, row, "period", int)
            fraction = _field(traces, line, row, "cumulative_fraction", Fraction)
            trace = partial[pid][1]["trace"]
            if trace and period <= trace[-1][0]:
                raise CampaignFormatError(f"{traces}:{line}: project {pid!r}: trace periods must increase")
            if trace and fraction < trace[-1][1]:
                raise CampaignFormatError(f"{traces}:{line}: project {pid!r}: cumulative fraction decreases")
            trace.append((period, fraction))
            trace_lines.setdefault(pid, []).append(line)

    records = []
    for pid, (line, kwargs) in partial.items():
        try:
            records.append(CampaignRecord(**kwargs))
        except ValueError as exc:
            where = f"{path}:{line}"
            if pid in trace_lines:
                where += f" (traces {traces} lines {trace_lines[pid][0]}-{trace_lines[pid][-1]})"
            raise CampaignFormatError(f"{where}: project {pid!r}: {exc}") from None
    return records


def _load_campaigns_json(path: Path) -> list[CampaignRecord]:
    text = path.read_text()
    if not text.strip():
        log.warning("no campaigns in %s", path)
        return []
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CampaignFormatError(f"{path}:{exc.lineno}: {exc.msg}") from None
    items = doc.get("campaigns", []) if isinstance(doc, dict) else doc
    records = []
    for i, item in enumerate(items):
        try:
            records.append(
                CampaignRecord(
                    project_id=str(item["project_id"]),
                    goal=int(item["goal"]),
                    deadline=int(item["deadline_periods"]),
                    rewards=int(item["reward_count"]),
                    price=int(item["pledge_price"]),
                    trace=[(int(p), Fraction(str(f))) for p, f in item.get("trace", [])],
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CampaignFormatError(f"{path}: campaigns[{i}]: {exc!r}") from None
    return records


def write_campaigns(records: Sequence[CampaignRecord], path, traces: str | Path | None = None) -> None:
    path = Path(path)
    if path.suffix == ".json":
        doc = {
            "schema": CAMPAIGNS_SCHEMA,
            "campaigns": [
                {
                    "project_id": r.project_id,
                    "goal": r.goal,
                    "deadline_periods": r.deadline,
                    "reward_count": r.rewards,
                    "pledge_price": r.price,
                    "trace": [[p, str(f)] for p, f in r.trace],
                }
                for r in records
            ],
        }
        _write_text(path, json.dumps(doc, indent=2) + "\n")
        return
    rows = [[r.project_id, r.goal, r.deadline, r.rewards, r.price] for r in records]
    _write_csv(path, CAMPAIGNS_SCHEMA, CAMPAIGN_FIELDS, rows)
    if traces is not None:
        trace_rows = [[r.project_id, p, str(f)] for r in records for p, f in r.trace]
        _write_csv(Path(traces), TRACES_SCHEMA, TRACE_FIELDS, trace_rows)


@dataclass(frozen=True)
class SyntheticSpec:
    count: int
    goal_range: tuple[int, int] = (100_000, 2_000_000)
    deadline: int = 1440
    price_fraction_range: tuple[float, float] = (1 / 60, 1 / 10)
    reward_factor_range: tuple[float, float] = (1.5, 3.0)

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("count must be non-negative")
        lo, hi = self.goal_range
        if not 0 < lo <= hi:
            raise ValueError(f"bad goal range {self.goal_range}")
        if self.deadline < 1:
            raise ValueError("deadline must be >= 1")
        lo, hi = self.price_fraction_range
        if not 0 < lo <= hi <= 1:
            raise ValueError(f"bad price fraction range {self.price_fraction_range}")
        lo, hi = self.reward_factor_range
        if not 1 <= lo <= hi:
            raise ValueError(f"bad reward factor range {self.reward_factor_range}")


def generate_synthetic(seed: int, spec: SyntheticSpec) -> list[CampaignRecord]:
    """Random campaigns; goals are log-uniform and prices a random goal share."""
    rng = np.random.default_rng(seed)
    records = []
    for i in range(spec.count):
        lo, hi = spec.goal_range
        goal = int(round(math.exp(rng.uniform(math.log(lo), math.log(hi)))))
        price = max(1, int(round(goal * rng.uniform(*spec.price_fraction_range))))
        price = min(price, goal)
        needed = -(-goal // price)
        rewards = max(needed, int(math.ceil(needed * rng.uniform(*spec.reward_factor_range))))
        records.append(CampaignRecord(f"syn-{i:05d}", goal, spec.deadline, rewards, price))
    return records


@dataclass
class RunRecord:
    campaign_id: str
    policy: str
    replication: int
    seed: int
    goal: int
    revenue: int
    settled: int
    success: bool
    policy_ms: float = 0.0


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _write_csv(path: Path, schema: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as handle:
            handle.write(f"# schema: {schema}\n")
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def write_results(results: Sequence[RunRecord], path, format: str | None = None, groups: dict | None = None) -> None:
    """Persist per-run rows; JSON also carries timing and group aggregates."""
    path = Path(path)
    format = (format or path.suffix.lstrip(".")).lower()
    if format == "csv":
        rows = [
            [r.campaign_id, r.policy, r.replication, r.seed, r.goal, r.revenue, r.settled, int(r.success)]
            for r in results
        ]
        _write_csv(path, RUNS_SCHEMA, RUN_FIELDS, rows)
    elif format == "json":
        doc = {"schema": REPORT_SCHEMA, "runs": [asdict(r) for r in results], "groups": groups or {}}
        _write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        raise ValueError(f"unsupported result format {format!r}")


def load_results(path, format: str | None = None) -> list[RunRecord]:
    path = Path(path)
    format = (format or path.suffix.lstrip(".")).lower()
    if format == "json":
        return [RunRecord(**r) for r in json.loads(path.read_text())["runs"]]
    records = []
    for line, row in _read_csv(path, RUN_FIELDS):
        try:
            records.append(
                RunRecord(
                    campaign_id=row["campaign_id"],
                    policy=row["policy"],
                    replication=int(row["replication"]),
                    seed=int(row["seed"]),
                    goal=int(row["goal"]),
                    revenue=int(row["revenue"]),
                    settled=int(row["settled"]),
                    success=bool(int(row["success"])),
                )
            )
        except ValueError as exc:
            raise CampaignFormatError(f"{path}:{line}: {exc}") from None
    return records
