"""Shared strategies and drivers for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction

from hypothesis import strategies as st

from crowdinfo.campaign import CampaignParams, Ledger, StatusReport, record_pledges
from crowdinfo.policies import immediate_policy


def random_ledger_reports(rng: random.Random, size: int, pf: Fraction, max_step: int = 4, max_gap: int = 3) -> list[StatusReport]:
    """Reports with increasing times whose fractions never fall, on the ``pf`` grid."""
    k = rng.randint(1, 5)
    units = rng.randint(0, 3)
    reports = []
    for _ in range(size):
        reports.append(StatusReport(units * pf, k))
        k += rng.randint(1, max_gap)
        units += rng.randint(0, max_step)
    return reports


@st.composite
def ledger_reports(draw, max_size: int = 12):
    """Hypothesis strategy: (reports sorted by fraction then time, price fraction)."""
    denom = draw(st.integers(2, 20))
    pf = Fraction(1, denom)
    size = draw(st.integers(1, max_size))
    gaps = draw(st.lists(st.integers(1, 4), min_size=size, max_size=size))
    steps = draw(st.lists(st.integers(0, 4), min_size=size, max_size=size))
    k, units, reports = 0, 0, []
    for gap, step in zip(gaps, steps):
        k += gap
        units += step
        reports.append(StatusReport(units * pf, k))
    reports.sort(key=lambda r: (r.fraction, r.time))
    return reports, pf


def presence_schedule(rng: random.Random, periods: int, rate: float = 0.8, max_patience: int = 6):
    """Backer windows ``(id, arrival, last period)`` for replay drivers."""
    windows, next_id = [], 0
    for t in range(1, periods + 1):
        for _ in range(rng.choice([0, 0, 1, 1, 2, 3]) if rng.random() < rate else 0):
            windows.append((next_id, t, t + rng.randint(1, max_patience) - 1))
            next_id += 1
    return windows


def replay(policy, campaign: CampaignParams, counts, windows, seed: int = 0):
    """Drive ``policy`` along a fixed pledge trace.

    Yields ``(t, ledger, policy decisions, immediate decisions)`` for each
    period with present backers. Pledges are attributed to the earliest
    present backers, who then leave.
    """
    policy.reset(campaign, seed)
    ledger = Ledger(campaign)
    pledged = set()
    for t in range(1, campaign.deadline + 1):
        present = [b for b, a, last in windows if a <= t <= last and b not in pledged]
        count = counts[t - 1]
        if present:
            decisions = policy.disclose(t, ledger, present)
            reference = immediate_policy(t, ledger, present)
            yield t, ledger, decisions, reference
            responses = [1 if i < count else 0 for i in range(len(present))]
            for b, alpha in zip(present, responses):
                if alpha:
                    pledged.add(b)
        ledger = record_pledges(ledger, t, count)
        if present:
            policy.observe(t, ledger, decisions, responses)
            for b, a, last in windows:
                if a <= t and (last <= t or b in pledged):
                    policy.forget(b)
