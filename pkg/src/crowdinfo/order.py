"""Dominance between status reports and pruning of dominated reports.

Three rules make one report weakly better than another for every backer:

* same period: the larger fraction wins;
* equal fraction: the earlier period wins (less progress time was spent);
* a later report wins when progress kept pace with at least one pledge per
  period in between, i.e. ``f_late - f_early >= (k_late - k_early) * P/G``.

Everything else is incomparable. On reports taken from one ledger (fractions
non-decreasing in time) the relation is a strict partial order, so the set of
undominated reports is unique.
"""

from __future__ import annotations

import enum
from typing import Iterable, Sequence

from crowdinfo.campaign import StatusReport, as_fraction


class Dominance(enum.Enum):
    FIRST = "first"
    SECOND = "second"
    INCOMPARABLE = "incomparable"


class InfoKind(enum.Enum):
    VERTICAL = "vertical"
    HORIZONTAL = "horizontal"


def dominates(a: StatusReport, b: StatusReport, price_fraction) -> Dominance:
    """Compare two distinct reports; return which one (if any) is preferred."""
    if a == b:
        raise ValueError(f"cannot compare identical reports {a!r}")
    pf = as_fraction(price_fraction)
    if not 0 < pf <= 1:
        raise ValueError(f"price fraction must lie in (0, 1], got {pf}")
    if a.time == b.time:
        return Dominance.FIRST if a.fraction > b.fraction else Dominance.SECOND
    if a.fraction == b.fraction:
        return Dominance.FIRST if a.time < b.time else Dominance.SECOND
    early, late = (a, b) if a.time < b.time else (b, a)
    if late.fraction - early.fraction >= (late.time - early.time) * pf:
        return Dominance.SECOND if late is b else Dominance.FIRST
    return Dominance.INCOMPARABLE


def is_ledger_consistent(reports: Iterable[StatusReport]) -> bool:
    """True when fractions never decrease as report time increases."""
    ordered = sorted(reports, key=lambda r: r.time)
    return all(x.fraction <= y.fraction for x, y in zip(ordered, ordered[1:]))


def _sort_key(report: StatusReport):
    return (report.fraction, report.time)


def shrink(reports: Sequence[StatusReport], price_fraction) -> list[StatusReport]:
    """Drop every dominated report from a sorted candidate list.

    ``reports`` must be sorted ascending by fraction (ties by time), have
    pairwise distinct times and come from a single ledger. Two sweeps give the
    fixpoint: equal-fraction runs collapse onto their earliest member, then a
    report survives only if its slack ``f - k * P/G`` beats every later one.
    """
    if not reports:
        raise ValueError("shrink needs at least one report")
    pf = as_fraction(price_fraction)
    times = [r.time for r in reports]
    if len(set(times)) != len(times):
        raise ValueError("candidate reports must have distinct times")
    if any(_sort_key(x) > _sort_key(y) for x, y in zip(reports, reports[1:])):
        raise ValueError("candidate reports must be sorted by (fraction, time)")
    if any(x.time > y.time for x, y in zip(reports, reports[1:])):
        raise ValueError("reports are not from a single ledger (fraction falls over time)")
    if len(reports) < 2:
        return list(reports)

    deduped = [reports[0]]
    for r in reports[1:]:
        if r.fraction != deduped[-1].fraction:
            deduped.append(r)

    kept = []
    best_later = None
    for r in reversed(deduped):
        slack = r.fraction - r.time * pf
        if best_later is None or slack > best_later:
            kept.append(r)
            best_later = slack
    kept.reverse()
    return kept


def maximal_elements_oracle(reports: Iterable[StatusReport], price_fraction) -> set[StatusReport]:
    """Brute force: every report no other report dominates. O(n^2)."""
    pool = set(reports)
    if not pool:
        raise ValueError("oracle needs at least one report")
    return {
        a
        for a in pool
        if not any(dominates(b, a, price_fraction) is Dominance.FIRST for b in pool if b != a)
    }


def classify(reports: Sequence[StatusReport], price_fraction) -> InfoKind:
    survivors = shrink(sorted(reports, key=_sort_key), price_fraction)
    return InfoKind.VERTICAL if len(survivors) == 1 else InfoKind.HORIZONTAL

