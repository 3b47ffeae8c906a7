from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crowdinfo.campaign import (
    CampaignParams,
    Ledger,
    SoldOutError,
    StatusReport,
    as_fraction,
    growth_rate,
    is_successful,
    record_pledges,
    status_at,
)

P = 1000
CAMPAIGN = CampaignParams(goal=10 * P, deadline=20, rewards=30, price=P)


def ledger_with(campaign, **by_period):
    ledger = Ledger(campaign)
    for t, n in by_period.items():
        ledger = record_pledges(ledger, int(t[1:]), n)
    return ledger


def test_record_two_pledges():
    ledger = record_pledges(Ledger(CAMPAIGN), 3, 2)
    assert ledger.revenue(3) == 2 * P
    assert ledger.revenue(2) == 0


def test_record_zero_is_identity():
    ledger = record_pledges(Ledger(CAMPAIGN), 5, 1)
    assert record_pledges(ledger, 7, 0) == ledger


def test_sold_out():
    small = CampaignParams(goal=10 * P, deadline=20, rewards=5, price=P)
    ledger = record_pledges(Ledger(small), 1, 5)
    with pytest.raises(SoldOutError):
        record_pledges(ledger, 2, 1)


@pytest.mark.parametrize("t", [0, 21])
def test_record_rejects_bad_period(t):
    with pytest.raises(ValueError):
        record_pledges(Ledger(CAMPAIGN), t, 1)


def test_record_rejects_negative():
    with pytest.raises(ValueError):
        record_pledges(Ledger(CAMPAIGN), 1, -1)


def test_status_at_examples():
    ledger = ledger_with(CAMPAIGN, t1=3)
    assert status_at(ledger, 1) == StatusReport(0, 1)
    assert status_at(ledger, 2) == StatusReport(Fraction(3, 10), 2)
    only_t2 = ledger_with(CAMPAIGN, t2=4)
    assert status_at(only_t2, 2) == StatusReport(0, 2)
    with pytest.raises(ValueError):
        status_at(ledger, 21)


def test_growth_rate_examples():
    ledger = ledger_with(CAMPAIGN, t4=3)
    assert growth_rate(ledger, 10) == Fraction(3, 100)
    assert growth_rate(Ledger(CAMPAIGN), 7) == 0
    assert growth_rate(ledger, 1) == 0


def test_is_successful_boundaries():
    assert is_successful(ledger_with(CAMPAIGN, t3=10), 3)
    assert not is_successful(ledger_with(CAMPAIGN, t3=9), 3)
    assert is_successful(ledger_with(CAMPAIGN, t3=12), 3)


def test_params_validation():
    with pytest.raises(ValueError):
        CampaignParams(goal=0, deadline=1, rewards=1, price=1)
    with pytest.raises(ValueError):
        CampaignParams(goal=10, deadline=0, rewards=1, price=1)
    with pytest.raises(ValueError):
        CampaignParams(goal=10, deadline=1, rewards=0, price=1)
    with pytest.raises(ValueError):
        CampaignParams(goal=10, deadline=1, rewards=1, price=11)
    assert CAMPAIGN.price_fraction == Fraction(1, 10)
    assert CampaignParams(goal=1001, deadline=1, rewards=5, price=100).pledges_to_goal == 11


def test_report_coerces_floats_exactly():
    assert StatusReport(0.3, 4).fraction == Fraction(3, 10)
    assert as_fraction(0.1) * 3 == as_fraction(0.3)
    with pytest.raises(ValueError):
        StatusReport(-0.1, 2)
    with pytest.raises(ValueError):
        StatusReport(0.1, 0)


def test_ledger_is_immutable():
    ledger = record_pledges(Ledger(CAMPAIGN), 2, 1)
    with pytest.raises(ValueError):
        ledger.counts[0] = 5


counts_strategy = st.lists(st.integers(0, 2), min_size=20, max_size=20).filter(lambda c: sum(c) <= 30)


@given(counts_strategy)
def test_revenue_monotone_and_quantized(counts):
    ledger = Ledger(CAMPAIGN, counts)
    revenue = [ledger.revenue(t) for t in range(1, 21)]
    assert all(a <= b for a, b in zip(revenue, revenue[1:]))
    assert all(m % P == 0 for m in revenue)
    assert revenue[-1] <= CAMPAIGN.rewards * P
    for k in range(1, 21):
        assert status_at(ledger, k).fraction * CAMPAIGN.goal % P == 0


@given(counts_strategy, st.integers(1, 20), st.integers(0, 5))
def test_status_excludes_period_k(counts, k, extra):
    ledger = Ledger(CAMPAIGN, counts)
    later = list(counts)
    for t in range(k, 21):
        later[t - 1] = min(extra, 2)
    if sum(later) > 30:
        return
    assert status_at(ledger, k) == status_at(Ledger(CAMPAIGN, later), k)


def test_ledger_rejects_over_cap():
    with pytest.raises(SoldOutError):
        Ledger(CAMPAIGN, np.full(20, 2))
