"""Backer types, probability-of-success estimates and the pledge rule.

A backer judges a disclosed report ``(f, k)`` with a forward random walk: the
``n = f * G / P`` pledges seen so far over ``k`` periods, blended with a prior
of ``prior_weight`` periods at the on-track rate, give a per-period pledge
rate. Cumulative pledges then walk forward from period ``t`` to the deadline
with Poisson increments at that rate, and the estimate is the share of walks
that reach the goal.

Each walk's end point is drawn by inverse transform from one uniform in the
backer's private, stratified bank ``u_j = (j + U_j) / R``. A walk succeeds iff
``u_j > F`` where ``F`` is the Poisson CDF at ``need - 1``, so the estimate is a
step function of ``F``: deterministic per backer and monotone in the report.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.special import pdtr

from crowdinfo.campaign import CampaignParams, StatusReport

NEVER_PLEDGES = math.inf


@dataclass(frozen=True)
class EstimatorParams:
    rollouts: int = 200
    prior_weight: float = 24.0
    prior_scale: float = 1.75
    optimism: tuple[float, float] = (0.9, 1.1)

    def __post_init__(self):
        if self.rollouts < 1:
            raise ValueError("rollouts must be >= 1")
        if self.prior_weight < 0 or self.prior_scale < 0:
            raise ValueError("prior weight and scale must be non-negative")
        lo, hi = self.optimism
        if not 0 < lo <= hi:
            raise ValueError(f"bad optimism range {self.optimism}")


def stratified_uniforms(rng: np.random.Generator, rollouts: int, size: int | None = None) -> np.ndarray:
    """Sorted stratified uniforms, one stratum of width 1/R per rollout."""
    shape = (rollouts,) if size is None else (size, rollouts)
    return (np.arange(rollouts) + rng.random(shape)) / rollouts


@dataclass(frozen=True)
class BackerProfile:
    id: int
    arrival: int
    patience: int
    threshold: float
    payoff: float
    valuation: float
    optimism: float = 1.0
    uniforms: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.patience < 1:
            raise ValueError(f"patience must be >= 1, got {self.patience}")
        if not (0 < self.threshold <= 1 or self.threshold == NEVER_PLEDGES):
            raise ValueError(f"threshold must lie in (0, 1], got {self.threshold}")
        if self.payoff <= 0:
            raise ValueError(f"payoff must be positive, got {self.payoff}")
        if not self.uniforms:
            raise ValueError("a backer needs at least one rollout uniform")

    @classmethod
    def create(
        cls,
        id: int,
        arrival: int,
        patience: int,
        valuation: float,
        price: float,
        seed: int,
        params: EstimatorParams = EstimatorParams(),
        optimism: float | None = None,
    ) -> "BackerProfile":
        rng = np.random.default_rng(seed)
        if optimism is None:
            optimism = float(rng.uniform(*params.optimism))
        uniforms = stratified_uniforms(rng, params.rollouts)
        threshold = derive_threshold(valuation, price) if valuation > 0 else NEVER_PLEDGES
        return cls(
            id=id,
            arrival=arrival,
            patience=patience,
            threshold=threshold,
            payoff=max(valuation, 1e-9) / price,
            valuation=valuation,
            optimism=optimism,
            uniforms=tuple(uniforms.tolist()),
        )

    @property
    def departs_by(self) -> int:
        return self.arrival + self.patience - 1

    def present_at(self, t: int) -> bool:
        return self.arrival <= t <= self.departs_by


def failure_cdf(pledges: float, k: int, t: int, campaign: CampaignParams, params: EstimatorParams) -> float:
    """Probability that a forward walk from ``t`` ends short of the goal.

    ``pledges`` is the pledge count shown by a report dated ``k``.
    """
    shortfall = campaign.goal - round(pledges * campaign.price)
    need = -(-shortfall // campaign.price)
    if need <= 0:
        return 0.0
    remaining = campaign.deadline - t
    if remaining <= 0:
        return 1.0
    prior_rate = params.prior_scale * campaign.pledges_to_goal / campaign.deadline
    rate = (pledges + params.prior_weight * prior_rate) / (k + params.prior_weight)
    return float(pdtr(need - 1, rate * remaining))


def share_above(uniforms: Sequence[float], cdf: float) -> float:
    """Fraction of rollout uniforms strictly above ``cdf``."""
    return (len(uniforms) - bisect_right(uniforms, cdf)) / len(uniforms)


def estimate_pos(
    profile: BackerProfile,
    t: int,
    report: StatusReport,
    campaign: CampaignParams,
    params: EstimatorParams = EstimatorParams(),
) -> float:
    if report.time > t:
        raise ValueError(f"report from period {report.time} is not yet available at {t}")
    if not 1 <= t <= campaign.deadline:
        raise ValueError(f"period {t} outside [1, {campaign.deadline}]")
    if report.fraction >= 1:
        return 1.0
    pledges = float(report.fraction * Fraction(campaign.goal, campaign.price))
    cdf = failure_cdf(pledges, report.time, t, campaign, params)
    return min(1.0, profile.optimism * share_above(profile.uniforms, cdf))


def aggregate_beliefs(
    profile: BackerProfile,
    t: int,
    reports: Iterable[StatusReport],
    campaign: CampaignParams,
    params: EstimatorParams = EstimatorParams(),
) -> float:
    """Estimate given several reports at once: the most recent one is trusted."""
    reports = list(reports)
    if not reports:
        raise ValueError("need at least one report")
    if len(set(reports)) != len(reports):
        raise ValueError("reports must be distinct")
    latest = max(reports, key=lambda r: r.time)
    return estimate_pos(profile, t, latest, campaign, params)


def pledge_decision(pos: float, threshold: float) -> int:
    return 1 if pos >= threshold else 0


def decide(profile, t, report, campaign, params: EstimatorParams = EstimatorParams()) -> int:
    return pledge_decision(estimate_pos(profile, t, report, campaign, params), profile.threshold)


def utility(profile, t, alpha, report, campaign, params: EstimatorParams = EstimatorParams()) -> float:
    pos = estimate_pos(profile, t, report, campaign, params)
    return profile.payoff * alpha if pos >= profile.threshold else 0.0


def derive_threshold(valuation: float, price: float) -> float:
    """Break-even threshold ``P / v``; ``NEVER_PLEDGES`` when ``v < P``."""
    if valuation <= 0 or price <= 0:
        raise ValueError(f"valuation and price must be positive, got {valuation}, {price}")
    if valuation < price:
        return NEVER_PLEDGES
    return price / valuation


class ArrivalStream:
    """Poisson arrival counts per period, drawn once from ``seed``."""

    def __init__(self, rate, periods: int, seed):
        rates = np.broadcast_to(np.asarray(rate, dtype=float), (periods,))
        if (rates < 0).any():
            raise ValueError("arrival rates must be non-negative")
        self.rates = rates
        self.seed = seed
        self.counts = np.random.default_rng(seed).poisson(rates)
        self.counts.flags.writeable = False

    def __len__(self):
        return len(self.counts)


def spawn_arrivals(stream: ArrivalStream, t: int) -> int:
    if not 1 <= t <= len(stream):
        raise ValueError(f"period {t} outside [1, {len(stream)}]")
    return int(stream.counts[t - 1])
