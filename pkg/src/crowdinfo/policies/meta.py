"""Ensemble over the four selectors: filter by learned prospect, then vote."""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from crowdinfo.policies.selectors import (
    CandidateView,
    EpsGreedySelector,
    GreedySelector,
    RandomSelector,
    Selector,
    SoftmaxSelector,
)


@dataclass
class MetaState:
    z: dict[str, float] = field(default_factory=dict)
    w: dict[str, float] = field(default_factory=dict)
    q: dict[str, float] = field(default_factory=dict)
    active: str | None = None
    tenure_start: int = 0
    tenure_base: int = 0  # pledges visible when the active expert took over

    def tenure(self, t: int) -> int:
        return t - self.tenure_start if self.active is not None else 0


def expected_revenue(dist: Sequence[float], prospects: Sequence[float], present: int) -> float:
    """z for one expert: selection-weighted prospect summed over present backers."""
    return present * sum(p * u for p, u in zip(dist, prospects))


def revenue_prospect(w_prev: float, pledges: int, tenure: int, sigma: float = 0.9) -> tuple[float, float]:
    """Return ``(q, w)``: average gain over the tenure and the smoothed prospect."""
    if tenure < 1:
        raise ValueError(f"tenure must be >= 1, got {tenure}")
    q = pledges / tenure
    return q, (1 - sigma) * q + sigma * w_prev


def majority_vote(votes: dict[str, int], z: dict[str, float], order: Sequence[str]) -> tuple[int, str]:
    """Most-voted candidate; ties go to the highest-z voter.

    Returns the winning candidate index and the expert credited with it.
    """
    tally = Counter(votes.values())
    most = max(tally.values())
    rank = {name: i for i, name in enumerate(order)}
    leader = max(
        (name for name, choice in votes.items() if tally[choice] == most),
        key=lambda name: (z[name], -rank[name]),
    )
    return votes[leader], leader


def default_experts(c: float = 0.2, mu: float = 1e-4) -> list[Selector]:
    return [RandomSelector(), GreedySelector(), EpsGreedySelector(c), SoftmaxSelector(mu)]


class MetaSelector(Selector):
    name = "meta"

    def __init__(self, experts: Sequence[Selector] | None = None, sigma: float = 0.9):
        super().__init__()
        self.experts = list(experts) if experts is not None else default_experts()
        if not self.experts:
            raise ValueError("meta needs at least one expert")
        names = [e.name for e in self.experts]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate expert names {names}")
        if not 0 <= sigma <= 1:
            raise ValueError(f"sigma must lie in [0, 1], got {sigma}")
        self.sigma = sigma
        self.state = MetaState()
        self.switches = 0

    def _scores(self, view: CandidateView) -> dict[str, float]:
        key = ("z", id(self))
        z = view.cache.get(key)
        if z is None:
            z = {
                e.name: expected_revenue(e.distribution(view), view.prospects, view.present)
                for e in self.experts
            }
            view.cache[key] = z
        return z

    def _distribution(self, view):
        # Prospect-weighted mixture of the qualified experts, for reporting only.
        z = self._scores(view)
        qualified = self._qualified(z)
        dist = [0.0] * len(view)
        for e in self.experts:
            if e.name in qualified:
                for i, p in enumerate(e.distribution(view)):
                    dist[i] += p / len(qualified)
        return dist

    def _qualified(self, z: dict[str, float]) -> list[str]:
        st = self.state
        if not st.w:
            top = max(z.values())
            st.w = {name: top for name in z}
        floor = min(st.w.values())
        chosen = [name for name, score in z.items() if score >= floor]
        if not chosen:
            chosen = [max(z, key=lambda name: z[name])]
        return chosen

    def choose(self, view: CandidateView, rng: random.Random) -> int:
        if len(view) == 1:
            return 0
        self.selections += 1
        z = self._scores(view)
        self.state.z = dict(z)
        qualified = set(self._qualified(z))
        votes = {e.name: e.choose(view, rng) for e in self.experts if e.name in qualified}
        choice, leader = majority_vote(votes, z, [e.name for e in self.experts])
        self._activate(leader, view.t, view.pledges_now)
        return choice

    def _activate(self, name: str, t: int, pledges_now: int) -> None:
        st = self.state
        if st.active == name:
            return
        if st.active is not None:
            tenure = st.tenure(t)
            if tenure >= 1:
                q, w = revenue_prospect(st.w[st.active], pledges_now - st.tenure_base, tenure, self.sigma)
                st.q[st.active] = q
                st.w[st.active] = w
            self.switches += 1
        st.active = name
        st.tenure_start = t
        st.tenure_base = pledges_now

    def close_period(self) -> None:
        for e in self.experts:
            e.close_period()


def select_meta(meta: MetaSelector, view: CandidateView, rng: random.Random) -> int:
    return meta.choose(view, rng)
