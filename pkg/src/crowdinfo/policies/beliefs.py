"""The entrepreneur's learned revenue prospect for each disclosable report."""

from __future__ import annotations

from collections import defaultdict


class BeliefTable:
    """Running statistics behind the historical, temporal and combined beliefs.

    Reports are keyed by their period ``k``. Growth rates enter only as the
    ratio ``eta(t) / eta(t')`` with ``eta(t) = n_t / t`` (the ``P/G`` factor
    cancels), where ``n_t`` is the pledge count visible at the start of ``t``.
    A pledge observed while ``eta(t') = 0`` is counted undiscounted.
    """

    def __init__(self, learning_rate: float = 0.1):
        if not 0 <= learning_rate <= 1:
            raise ValueError(f"learning rate must lie in [0, 1], got {learning_rate}")
        self.learning_rate = learning_rate
        self.disclosures: dict[int, int] = defaultdict(int)
        # sum of alpha * t' / n_t' over events with n_t' > 0
        self._scaled: dict[int, float] = defaultdict(float)
        # sum of alpha over events with n_t' = 0
        self._flat: dict[int, float] = defaultdict(float)
        self._last_period = 0
        self._last_response = 0.0

    def record(self, k: int, t: int, pledges_before: int, alpha: int) -> None:
        """Log that report ``k`` was shown at ``t`` and got response ``alpha``."""
        self.disclosures[k] += 1
        if alpha:
            if pledges_before > 0:
                self._scaled[k] += alpha * t / pledges_before
            else:
                self._flat[k] += alpha

    def close_period(self, t: int, present: int, pledged: int) -> None:
        """Store the share of present backers who pledged during ``t``."""
        self._last_period = t
        self._last_response = pledged / present if present else 0.0

    def count(self, k: int) -> int:
        return self.disclosures.get(k, 0)

    def historical(self, k: int, t: int, pledges_now: int) -> float:
        n = self.disclosures.get(k, 0)
        if n == 0 or t == 1:
            return 0.0
        growth = pledges_now / t
        return (growth * self._scaled.get(k, 0.0) + self._flat.get(k, 0.0)) / n

    def temporal(self, t: int) -> float:
        if t == 1 or self._last_period != t - 1:
            return 0.0
        return self._last_response

    def prospect(self, k: int, t: int, pledges_now: int) -> float:
        lam = self.learning_rate
        return (1 - lam) * self.historical(k, t, pledges_now) + lam * self.temporal(t)
