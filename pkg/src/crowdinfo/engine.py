"""Discrete-time campaign loop.

Within a period: arrivals join, the policy discloses one report to every
present backer, backers decide in arrival order while rewards last, pledgers
and backers whose patience ran out leave, and the policy observes responses.

Randomness comes from four independent streams spawned off the master seed
(arrivals, population, estimator uniforms, policy draws), so runs that differ
only in policy share their arrivals and backers.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from crowdinfo.backers import (
    NEVER_PLEDGES,
    ArrivalStream,
    BackerProfile,
    EstimatorParams,
    derive_threshold,
    failure_cdf,
    share_above,
    spawn_arrivals,
    stratified_uniforms,
)
from crowdinfo.campaign import CampaignParams, Ledger, record_pledges
from crowdinfo.policies import POLICY_NAMES, make_policy


@dataclass(frozen=True)
class PolicyParams:
    learning_rate: float = 0.1
    c: float = 0.2
    mu: float = 1e-4
    sigma: float = 0.9


@dataclass(frozen=True)
class SimConfig:
    campaign: CampaignParams
    policy: str = "immediate"
    arrival_rate: float | tuple[float, ...] = 0.1
    valuation_spread: float = 0.25
    valuation_mean: float | None = None
    max_patience: int = 48
    estimator: EstimatorParams = EstimatorParams()
    policy_params: PolicyParams = PolicyParams()
    seed: int = 0

    def __post_init__(self):
        if self.policy not in POLICY_NAMES:
            raise ValueError(f"unknown policy {self.policy!r}; choose from {POLICY_NAMES}")
        if not 0.05 <= self.valuation_spread <= 0.5:
            raise ValueError(f"valuation spread must lie in [0.05, 0.5], got {self.valuation_spread}")
        if self.max_patience < 1:
            raise ValueError("max patience must be >= 1")
        if self.valuation_mean is not None and self.valuation_mean <= 0:
            raise ValueError("valuation mean must be positive")
        rates = np.atleast_1d(np.asarray(self.arrival_rate, dtype=float))
        if rates.size not in (1, self.campaign.deadline) or (rates < 0).any():
            raise ValueError("arrival rate must be one non-negative value or one per period")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class SimResult:
    campaign: CampaignParams
    policy: str
    seed: int
    revenue: int
    success: bool
    settled: int
    arrivals: np.ndarray
    disclosures: np.ndarray
    pledges: np.ndarray
    cumulative_revenue: np.ndarray
    policy_seconds: float
    backers: list[BackerProfile] = field(default_factory=list, repr=False)
    # (t, backer, report period, alpha) per disclosure, when recorded
    events: list[tuple[int, int, int, int]] = field(default_factory=list, repr=False)

    @property
    def total_pledges(self) -> int:
        return int(self.pledges.sum())


def settle(result: SimResult, campaign: CampaignParams | None = None) -> int:
    """All-or-nothing: keep M(T) only when it meets the goal."""
    campaign = campaign or result.campaign
    return result.revenue if result.revenue >= campaign.goal else 0


def seed_streams(seed: int) -> dict[str, np.random.SeedSequence]:
    names = ("arrivals", "population", "estimator", "policy")
    return dict(zip(names, np.random.SeedSequence(seed).spawn(len(names))))


class CampaignRun:
    """Mutable state of one campaign; advance it with :meth:`step`."""

    def __init__(self, config: SimConfig, record_events: bool = True):
        self.config = config
        self.record_events = record_events
        c = self.campaign = config.campaign
        T = c.deadline
        streams = seed_streams(config.seed)
        self.stream = ArrivalStream(config.arrival_rate, T, streams["arrivals"])
        self._population(streams)
        p = config.policy_params
        self.policy = make_policy(config.policy, p.learning_rate, p.c, p.mu, p.sigma)
        self.policy.reset(c, int(streams["policy"].generate_state(1)[0]))

        self.t = 0
        self.ledger = Ledger(c)
        self.present: list[BackerProfile] = []
        self.next_backer = 0
        self.arrivals = np.zeros(T, dtype=np.int64)
        self.disclosures = np.zeros(T, dtype=np.int64)
        self.pledges = np.zeros(T, dtype=np.int64)
        self.policy_seconds = 0.0
        self.events: list[tuple[int, int, int, int]] = []

    def _population(self, streams) -> None:
        cfg, c = self.config, self.campaign
        n = int(self.stream.counts.sum())
        rng = np.random.default_rng(streams["population"])
        mean = cfg.valuation_mean if cfg.valuation_mean is not None else float(c.price)
        patience = rng.integers(1, cfg.max_patience + 1, size=n)
        valuation = rng.normal(mean, cfg.valuation_spread * mean, size=n)
        optimism = rng.uniform(*cfg.estimator.optimism, size=n)
        banks = stratified_uniforms(np.random.default_rng(streams["estimator"]), cfg.estimator.rollouts, n)
        arrival_times = np.repeat(np.arange(1, c.deadline + 1), self.stream.counts)
        self.backers = [
            BackerProfile(
                id=i,
                arrival=int(arrival_times[i]),
                patience=int(patience[i]),
                threshold=derive_threshold(v, c.price) if v > 0 else NEVER_PLEDGES,
                payoff=max(v, 1e-9) / c.price,
                valuation=v,
                optimism=float(optimism[i]),
                uniforms=tuple(banks[i].tolist()),
            )
            for i, v in enumerate(valuation.tolist())
        ]

    @property
    def done(self) -> bool:
        return self.t >= self.campaign.deadline

    def _failure_cdf(self, report, t, cache) -> float:
        cdf = cache.get(report)
        if cdf is None:
            c = self.campaign
            k = report.time
            n = self.ledger.pledges_through(k - 1)
            if k > t or report.fraction != Fraction(n * c.price, c.goal):
                raise AssertionError(f"untruthful disclosure {report!r} at t={t}")
            cdf = cache[report] = failure_cdf(n, k, t, c, self.config.estimator)
        return cdf

    def step(self) -> None:
        if self.done:
            raise RuntimeError("campaign already ended")
        t = self.t = self.t + 1
        c = self.campaign

        arrived = spawn_arrivals(self.stream, t)
        for _ in range(arrived):
            self.present.append(self.backers[self.next_backer])
            self.next_backer += 1
        self.arrivals[t - 1] = arrived
        if not self.present:
            return

        ids = [b.id for b in self.present]
        started = time.perf_counter()
        decisions = self.policy.disclose(t, self.ledger, ids)
        self.policy_seconds += time.perf_counter() - started
        assert [d.backer for d in decisions] == ids

        left = self.ledger.rewards_left
        cache: dict = {}
        responses = []
        for backer, d in zip(self.present, decisions):
            alpha = 0
            if left and backer.threshold <= 1:
                if d.report.fraction >= 1:
                    pos = 1.0
                else:
                    pos = min(1.0, backer.optimism * share_above(backer.uniforms, self._failure_cdf(d.report, t, cache)))
                if pos >= backer.threshold:
                    alpha = 1
                    left -= 1
            responses.append(alpha)
        pledged = sum(responses)
        if pledged:
            self.ledger = record_pledges(self.ledger, t, pledged)
        self.disclosures[t - 1] = len(decisions)
        self.pledges[t - 1] = pledged
        if self.record_events:
            self.events.extend((t, d.backer, d.report.time, a) for d, a in zip(decisions, responses))

        started = time.perf_counter()
        self.policy.observe(t, self.ledger, decisions, responses)
        self.policy_seconds += time.perf_counter() - started

        staying = []
        for backer, alpha in zip(self.present, responses):
            if alpha or backer.departs_by <= t:
                self.policy.forget(backer.id)
            else:
                staying.append(backer)
        self.present = staying

    def result(self) -> SimResult:
        c = self.campaign
        revenue = self.ledger.revenue(c.deadline) if self.done else self.ledger.total_pledges * c.price
        res = SimResult(
            campaign=c,
            policy=self.config.policy,
            seed=self.config.seed,
            revenue=revenue,
            success=revenue >= c.goal,
            settled=0,
            arrivals=self.arrivals,
            disclosures=self.disclosures,
            pledges=self.pledges,
            cumulative_revenue=np.cumsum(self.pledges) * c.price,
            policy_seconds=self.policy_seconds,
            backers=self.backers,
            events=self.events,
        )
        res.settled = settle(res)
        return res


def run_campaign(config: SimConfig, record_events: bool = True) -> SimResult:
    run = CampaignRun(config, record_events)
    while not run.done:
        run.step()
    return run.result()
