"""Campaign parameters, status reports and the pledge ledger.

Money is kept in integer minor units (cents). A status report's fraction is an
exact :class:`fractions.Fraction` so that equal-progress comparisons in the
dominance order never suffer from rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np


class SoldOutError(ValueError):
    """Raised when a pledge would exceed the campaign's reward count."""


def as_fraction(value) -> Fraction:
    """Coerce ``value`` to an exact fraction.

    Floats are read through their shortest decimal repr, so ``0.3`` becomes
    ``3/10`` rather than the nearest binary double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite fraction {value!r}")
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class CampaignParams:
    goal: int
    deadline: int
    rewards: int
    price: int

    def __post_init__(self):
        if self.goal <= 0:
            raise ValueError(f"goal must be positive, got {self.goal}")
        if self.deadline < 1:
            raise ValueError(f"deadline must be >= 1, got {self.deadline}")
        if self.rewards < 1:
            raise ValueError(f"rewards must be >= 1, got {self.rewards}")
        if not 0 < self.price <= self.goal:
            raise ValueError(f"price must lie in (0, goal], got {self.price}")

    @property
    def price_fraction(self) -> Fraction:
        return Fraction(self.price, self.goal)

    @property
    def pledges_to_goal(self) -> int:
        """Smallest pledge count whose revenue meets the goal."""
        return -(-self.goal // self.price)


@dataclass(frozen=True, order=True)
class StatusReport:
    """Progress ``fraction`` of the goal raised strictly before period ``time``."""

    fraction: Fraction
    time: int

    def __post_init__(self):
        object.__setattr__(self, "fraction", as_fraction(self.fraction))
        if self.fraction < 0:
            raise ValueError(f"negative fraction {self.fraction}")
        if self.time < 1:
            raise ValueError(f"report time must be >= 1, got {self.time}")

    def __repr__(self):
        return f"StatusReport({float(self.fraction):g}, {self.time})"


@dataclass(frozen=True)
class Ledger:
    """Per-period pledge counts for one campaign.

    ``counts[t - 1]`` holds the pledges made during period ``t``. Instances are
    immutable; :func:`record_pledges` returns a new ledger.
    """

    campaign: CampaignParams
    counts: np.ndarray = field(repr=False, default=None)
    _cumulative: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        T = self.campaign.deadline
        counts = self.counts
        if counts is None:
            counts = np.zeros(T, dtype=np.int64)
        else:
            counts = np.array(counts, dtype=np.int64)
            if counts.shape != (T,):
                raise ValueError(f"expected {T} period counts, got shape {counts.shape}")
            if (counts < 0).any():
                raise ValueError("pledge counts must be non-negative")
        cumulative = np.cumsum(counts)
        if T and cumulative[-1] > self.campaign.rewards:
            raise SoldOutError(
                f"{int(cumulative[-1])} pledges exceed the {self.campaign.rewards} rewards"
            )
        counts.flags.writeable = False
        cumulative.flags.writeable = False
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "_cumulative", cumulative)

    def __eq__(self, other):
        if not isinstance(other, Ledger):
            return NotImplemented
        return self.campaign == other.campaign and np.array_equal(self.counts, other.counts)

    __hash__ = None

    def _check_period(self, t: int) -> None:
        if not 1 <= t <= self.campaign.deadline:
            raise ValueError(f"period {t} outside [1, {self.campaign.deadline}]")

    @property
    def total_pledges(self) -> int:
        return int(self._cumulative[-1])

    @property
    def rewards_left(self) -> int:
        return self.campaign.rewards - self.total_pledges

    def pledges_through(self, t: int) -> int:
        """Cumulative pledge count up to and including period ``t`` (0 for t = 0)."""
        if t <= 0:
            return 0
        self._check_period(t)
        return int(self._cumulative[t - 1])

    def revenue(self, t: int) -> int:
        """M(t): funds raised up to and including period ``t``, in minor units."""
        return self.pledges_through(t) * self.campaign.price

    def cumulative_pledges(self) -> np.ndarray:
        return self._cumulative


def record_pledges(ledger: Ledger, t: int, count: int) -> Ledger:
    ledger._check_period(t)
    if count < 0:
        raise ValueError(f"pledge count must be non-negative, got {count}")
    if count == 0:
        return ledger
    if ledger.total_pledges + count > ledger.campaign.rewards:
        raise SoldOutError(
            f"cannot record {count} pledges: only {ledger.rewards_left} rewards left"
        )
    counts = ledger.counts.copy()
    counts[t - 1] += count
    return Ledger(ledger.campaign, counts)


def status_at(ledger: Ledger, k: int) -> StatusReport:
    ledger._check_period(k)
    c = ledger.campaign
    return StatusReport(Fraction(ledger.pledges_through(k - 1) * c.price, c.goal), k)


def growth_rate(ledger: Ledger, t: int) -> Fraction:
    """Revenue growth rate: the status fraction at ``t`` divided by ``t``."""
    return status_at(ledger, t).fraction / t


def is_successful(ledger: Ledger, t: int) -> bool:
    return ledger.revenue(t) >= ledger.campaign.goal
