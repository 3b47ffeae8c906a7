"""Command line: ``simulate``, ``experiment`` and ``generate``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from crowdinfo.data_io import SyntheticSpec, generate_synthetic, load_campaigns, write_campaigns
from crowdinfo.engine import SimConfig, run_campaign
from crowdinfo.harness import (
    ExperimentConfig,
    compare,
    load_config,
    run_experiment,
    with_overrides,
    write_report,
)
from crowdinfo.policies import POLICY_NAMES

log = logging.getLogger("crowdinfo")


def _groups(text: str) -> tuple[str, ...]:
    return tuple(g.strip() for g in text.split(",") if g.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crowdinfo", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one campaign under one policy and print its trace")
    sim.add_argument("--config", help="experiment config supplying population and policy parameters")
    sim.add_argument("--campaigns", help="campaign file; the first campaign is simulated")
    sim.add_argument("--policy", default="immediate", choices=POLICY_NAMES)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--spread", type=float, default=0.25, help="valuation std as a share of the mean")
    sim.add_argument("--out", help="write the trace CSV here instead of stdout")

    exp = sub.add_parser("experiment", help="run the policy comparison grid")
    exp.add_argument("--config", help="experiment config file (INI)")
    exp.add_argument("--policy", type=_groups, help="comma-separated subset of policy groups")
    exp.add_argument("--runs", type=int, help="replications per campaign")
    exp.add_argument("--seed", type=int)
    exp.add_argument("--campaigns", help="campaign CSV or JSON file; default synthetic")
    exp.add_argument("--out", help="output directory")
    exp.add_argument("--format", choices=("csv", "json"))
    exp.add_argument("--workers", type=int)

    gen = sub.add_parser("generate", help="write synthetic campaigns")
    gen.add_argument("--config", help="experiment config whose [synthetic] section is used")
    gen.add_argument("--count", type=int)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.add_argument("--format", choices=("csv", "json"))
    return parser


def _base_config(path: str | None) -> ExperimentConfig:
    return load_config(path) if path else ExperimentConfig()


def cmd_simulate(args) -> int:
    config = _base_config(args.config)
    if args.campaigns:
        records = load_campaigns(args.campaigns)
    else:
        records = generate_synthetic(args.seed, SyntheticSpec(1, deadline=config.synthetic.deadline))
    if not records:
        raise ValueError("no campaign to simulate")
    record = records[0]
    sim = SimConfig(
        campaign=record.params(),
        policy=args.policy,
        arrival_rate=config.arrival_rate,
        valuation_spread=args.spread,
        max_patience=config.max_patience,
        estimator=config.estimator,
        policy_params=config.policy,
        seed=args.seed,
    )
    res = run_campaign(sim, record_events=False)
    handle = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["period", "arrivals", "disclosures", "pledges", "revenue"])
        for t in range(record.deadline):
            writer.writerow([t + 1, res.arrivals[t], res.disclosures[t], res.pledges[t], res.cumulative_revenue[t]])
    finally:
        if args.out:
            handle.close()
    print(
        f"# {record.project_id} policy={args.policy} revenue={res.revenue} goal={record.goal} "
        f"success={res.success} settled={res.settled}",
        file=sys.stderr,
    )
    return 0


def cmd_experiment(args) -> int:
    config = with_overrides(
        _base_config(args.config),
        groups=args.policy,
        replications=args.runs,
        seed=args.seed,
        campaigns=args.campaigns,
        out=args.out,
        format=args.format,
        workers=args.workers,
    )
    report = run_experiment(config)
    print(f"{'group':12s} {'expected':>9s} {'actual':>9s} {'success':>8s} {'policy ms':>10s}")
    for g, s in report.groups.items():
        print(f"{g:12s} {s.expected_revenue:9.4f} {s.actual_revenue:9.4f} {s.success_rate:8.3f} {report.policy_ms[g]:10.2f}")
    if len(report.groups) > 1:
        for c in compare(report, "revenue"):
            print(f"{c.first} - {c.second}: diff {c.mean_diff:+.4f} [{c.ci_low:+.4f}, {c.ci_high:+.4f}] p={c.p_value:.3g}")
    if config.out:
        for path in write_report(report, config.out, config.format):
            log.info("wrote %s", path)
    return 0


def cmd_generate(args) -> int:
    spec = _base_config(args.config).synthetic
    if args.count is not None:
        spec = SyntheticSpec(args.count, spec.goal_range, spec.deadline, spec.price_fraction_range, spec.reward_factor_range)
    records = generate_synthetic(args.seed, spec)
    out = Path(args.out)
    if args.format and out.suffix.lstrip(".") != args.format:
        out = out.with_suffix("." + args.format)
    write_campaigns(records, out)
    log.info("wrote %d campaigns to %s", len(records), out)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    handlers = {"simulate": cmd_simulate, "experiment": cmd_experiment, "generate": cmd_generate}
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"crowdinfo: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
