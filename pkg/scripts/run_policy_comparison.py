"""Run the six-group policy comparison and write plot-ready CSVs.

    python3 scripts/run_policy_comparison.py [--config scripts/policy_comparison.ini] [--workers N]

Outputs (under the config's ``out`` directory): runs.csv, summary.csv,
comparisons.csv, trajectory.csv and timing.json.
"""

import argparse
import os
from dataclasses import replace
from pathlib import Path

from crowdinfo.harness import compare, load_config, run_experiment, write_report

HERE = Path(__file__).resolve().parent


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--config", default=HERE / "policy_comparison.ini")
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--replications", type=int)
    parser.add_argument("--campaigns", type=int, help="use only this many synthetic campaigns")
    args = parser.parse_args()

    config = replace(load_config(args.config), workers=args.workers)
    if args.replications:
        config = replace(config, replications=args.replications)
    if args.campaigns:
        config = replace(config, synthetic=replace(config.synthetic, count=args.campaigns))

    report = run_experiment(config)
    print(f"{len(report.campaigns)} campaigns x {config.replications} replications in {report.seconds / 60:.1f} min")
    print(f"{'group':12s} {'expected':>9s} {'actual':>9s} {'succ-only':>9s} {'success':>8s} {'policy ms':>10s}")
    for g, s in sorted(report.groups.items(), key=lambda kv: -kv[1].expected_revenue):
        print(
            f"{g:12s} {s.expected_revenue:9.4f} {s.actual_revenue:9.4f} {s.success_revenue:9.4f} "
            f"{s.success_rate:8.3f} {report.policy_ms[g]:10.2f}"
        )
    pairs = [("meta", g) for g in report.groups if g != "meta"] if "meta" in report.groups else None
    if len(report.groups) > 1:
        for c in compare(report, "revenue", pairs):
            print(f"{c.first} - {c.second}: {c.mean_diff:+.4f} [{c.ci_low:+.4f}, {c.ci_high:+.4f}] p={c.p_value:.3g}")
    if config.out:
        for path in write_report(report, config.out, config.format):
            print("wrote", path)


if __name__ == "__main__":
    main()
