"""Disclosure policies: immediate disclosure and dynamic shrinkage with selection."""

from __future__ import annotations

import copy
import random
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from crowdinfo.campaign import CampaignParams, Ledger, StatusReport, status_at
from crowdinfo.policies.beliefs import BeliefTable
from crowdinfo.policies.selectors import CandidateView, Selector


@dataclass(frozen=True, slots=True)
class DisclosureDecision:
    backer: int
    report: StatusReport
    time: int


def immediate_policy(t: int, ledger: Ledger, present_backers: Iterable[int]) -> list[DisclosureDecision]:
    current = status_at(ledger, t)
    return [DisclosureDecision(b, current, t) for b in present_backers]


def candidate_set(backer: int, t: int, ledger: Ledger, history: dict[int, int]) -> list[StatusReport]:
    """Every report since the backer's last disclosure, by (fraction, period)."""
    k0 = history.get(backer, 1)
    if not 1 <= k0 <= t:
        raise ValueError(f"last disclosure {k0} not in [1, {t}]")
    reports = [status_at(ledger, k) for k in range(k0, t + 1)]
    return sorted(reports, key=lambda r: (r.fraction, r.time))


class Frontier:
    """Undominated reports among ``s(1..t)``, maintained as ``t`` advances.

    In pledge units a report ``(n, k)`` has slack ``n - k``; survivors are the
    first period of each pledge level, kept while their slack strictly
    decreases in time (a monotone stack).
    """

    def __init__(self):
        self.times: list[int] = []
        self.pledges: list[int] = []
        self.slacks: list[int] = []
        self.synced = 0

    def sync(self, ledger: Ledger, t: int) -> None:
        cumulative = ledger.cumulative_pledges()
        while self.synced < t:
            k = self.synced + 1
            n = int(cumulative[k - 2]) if k >= 2 else 0
            if k == 1 or n > self.pledges[-1]:
                s = n - k
                while self.slacks and self.slacks[-1] <= s:
                    self.times.pop()
                    self.pledges.pop()
                    self.slacks.pop()
                self.times.append(k)
                self.pledges.append(n)
                self.slacks.append(s)
            self.synced = k

    def candidates(self, k0: int, pledges_k0: int) -> tuple[list[int], list[int], tuple]:
        """Undominated reports among ``s(k0..t)`` as ``(times, pledges, key)``."""
        i = bisect_left(self.times, k0)
        times, pledges = self.times[i:], self.pledges[i:]
        if times and times[0] == k0:
            return times, pledges, (i,)
        if not times or pledges_k0 - k0 > self.slacks[i]:
            return [k0] + times, [pledges_k0] + pledges, (i, k0)
        return times, pledges, (i,)


class ImmediatePolicy:
    name = "immediate"

    def reset(self, campaign: CampaignParams, seed: int = 0) -> None:
        self.campaign = campaign

    def disclose(self, t, ledger, present):
        return immediate_policy(t, ledger, present)

    def observe(self, t, ledger, decisions, responses) -> None:
        pass

    def forget(self, backer: int) -> None:
        pass


class DSHSPolicy:
    """Dynamic shrinkage with heuristic selection.

    Before the goal is visibly met each present backer gets the report chosen
    by ``selector`` among the undominated reports since their last disclosure;
    afterwards everyone gets the current status. Beliefs and selector state
    only change in :meth:`observe`, so every backer in a period faces the same
    distributions.
    """

    def __init__(self, selector: Selector, learning_rate: float = 0.1):
        self._template = selector
        self.selector = selector
        self.name = selector.name
        self.learning_rate = learning_rate

    def reset(self, campaign: CampaignParams, seed: int = 0) -> None:
        self.campaign = campaign
        self.selector = copy.deepcopy(self._template)
        self.rng = random.Random(seed)
        self.table = BeliefTable(self.learning_rate)
        self.frontier = Frontier()
        self.history: dict[int, int] = {}
        self._reports: dict[tuple[int, int], StatusReport] = {}

    def report(self, k: int, pledges: int) -> StatusReport:
        key = (k, pledges)
        r = self._reports.get(key)
        if r is None:
            c = self.campaign
            r = self._reports[key] = StatusReport(Fraction(pledges * c.price, c.goal), k)
        return r

    def disclose(self, t: int, ledger: Ledger, present: Sequence[int]) -> list[DisclosureDecision]:
        c = self.campaign
        cumulative = ledger.cumulative_pledges()
        pledges_now = int(cumulative[t - 2]) if t >= 2 else 0
        if pledges_now * c.price >= c.goal:
            current = self.report(t, pledges_now)
            for b in present:
                self.history[b] = t
            return [DisclosureDecision(b, current, t) for b in present]

        self.frontier.sync(ledger, t)
        views: dict[tuple, CandidateView] = {}
        decisions = []
        for b in present:
            k0 = self.history.get(b, 1)
            n0 = int(cumulative[k0 - 2]) if k0 >= 2 else 0
            times, pledges, key = self.frontier.candidates(k0, n0)
            if len(times) == 1:
                pick = 0
            else:
                view = views.get(key)
                if view is None:
                    view = views[key] = CandidateView(
                        times=times,
                        pledges=pledges,
                        prospects=[self.table.prospect(k, t, pledges_now) for k in times],
                        counts=[self.table.count(k) for k in times],
                        t=t,
                        present=len(present),
                        pledges_now=pledges_now,
                    )
                pick = self.selector.choose(view, self.rng)
            k = times[pick]
            self.history[b] = k
            decisions.append(DisclosureDecision(b, self.report(k, pledges[pick]), t))
        return decisions

    def observe(self, t: int, ledger: Ledger, decisions: Sequence[DisclosureDecision], responses: Sequence[int]) -> None:
        cumulative = ledger.cumulative_pledges()
        pledges_now = int(cumulative[t - 2]) if t >= 2 else 0
        for d, alpha in zip(decisions, responses):
            self.table.record(d.report.time, t, pledges_now, alpha)
        self.table.close_period(t, len(decisions), sum(responses))
        self.selector.close_period()

    def forget(self, backer: int) -> None:
        self.history.pop(backer, None)


def dshs_step(policy: DSHSPolicy, t: int, ledger: Ledger, present: Sequence[int]) -> list[DisclosureDecision]:
    return policy.disclose(t, ledger, present)
