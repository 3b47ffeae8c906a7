"""Heuristics that pick one report out of a pruned, horizontal candidate set."""

from __future__ import annotations

import math
import random
from bisect import bisect_right
from dataclasses import dataclass, field
from itertools import accumulate


@dataclass
class CandidateView:
    """A pruned candidate list as the selectors see it.

    Lists are aligned and ordered by ascending fraction, ties by period.
    ``pledges`` is the pledge count each report shows; ``counts`` the number of
    times each report has been disclosed so far.
    """

    times: list[int]
    pledges: list[int]
    prospects: list[float]
    counts: list[int]
    t: int = 1
    present: int = 1
    pledges_now: int = 0
    cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.times:
            raise ValueError("empty candidate set")
        if not len(self.times) == len(self.pledges) == len(self.prospects) == len(self.counts):
            raise ValueError("candidate lists are misaligned")

    def __len__(self):
        return len(self.times)


def greedy_index(view: CandidateView) -> int:
    """Argmax prospect; ties go to the larger fraction, then the earlier period."""
    return max(
        range(len(view)),
        key=lambda i: (view.prospects[i], view.pledges[i], -view.times[i]),
    )


class Selector:
    name = "selector"

    def __init__(self):
        self.selections = 0

    def _distribution(self, view: CandidateView) -> list[float]:
        raise NotImplementedError

    def distribution(self, view: CandidateView) -> list[float]:
        key = ("dist", id(self))
        dist = view.cache.get(key)
        if dist is None:
            dist = [1.0] if len(view) == 1 else self._distribution(view)
            view.cache[key] = dist
        return dist

    def choose(self, view: CandidateView, rng: random.Random) -> int:
        if len(view) == 1:
            return 0
        self.selections += 1
        key = ("cum", id(self))
        cum = view.cache.get(key)
        if cum is None:
            cum = list(accumulate(self.distribution(view)))
            view.cache[key] = cum
        return min(bisect_right(cum, rng.random() * cum[-1]), len(cum) - 1)

    def close_period(self) -> None:
        pass


class RandomSelector(Selector):
    name = "random"

    def _distribution(self, view):
        return [1.0 / len(view)] * len(view)


class GreedySelector(Selector):
    name = "greedy"

    def _distribution(self, view):
        dist = [0.0] * len(view)
        dist[greedy_index(view)] = 1.0
        return dist


class EpsGreedySelector(Selector):
    """Greedy with decaying uniform exploration ``eps = c / n_greedy``."""

    name = "eps_greedy"

    def __init__(self, c: float = 0.2):
        super().__init__()
        if not 0 <= c <= 1:
            raise ValueError(f"exploration constant must lie in [0, 1], got {c}")
        self.c = c

    def epsilon(self, view: CandidateView) -> float:
        n = view.counts[greedy_index(view)]
        return self.c / n if n > 0 else self.c

    def _distribution(self, view):
        eps = self.epsilon(view)
        share = eps / len(view)
        dist = [share] * len(view)
        dist[greedy_index(view)] = 1 - eps + share
        return dist


class SoftmaxSelector(Selector):
    """Boltzmann selection with temperature ``max(mu, C / log n)``.

    ``C`` is the spread of prospects over the candidates and ``n`` the number of
    selections made before the current period; the temperature is 1 while
    ``n <= 1``.
    """

    name = "softmax"

    def __init__(self, mu: float = 1e-4):
        super().__init__()
        if mu <= 0:
            raise ValueError("mu must be positive")
        self.mu = mu
        self.anneal_count = 0

    def temperature(self, view: CandidateView) -> float:
        n = self.anneal_count
        if n <= 1:
            return 1.0
        spread = max(view.prospects) - min(view.prospects)
        return max(self.mu, spread / math.log(n))

    def _distribution(self, view):
        tau = self.temperature(view)
        top = max(view.prospects)
        weights = [math.exp((u - top) / tau) for u in view.prospects]
        total = sum(weights)
        return [w / total for w in weights]

    def close_period(self) -> None:
        self.anneal_count = self.selections


SELECTORS = {
    "random": RandomSelector,
    "greedy": GreedySelector,
    "eps_greedy": EpsGreedySelector,
    "softmax": SoftmaxSelector,
}


def make_selector(name: str, **params) -> Selector:
    try:
        cls = SELECTORS[name]
    except KeyError:
        raise ValueError(f"unknown selector {name!r}") from None
    return cls(**params)


def selector_distribution(kind: str, view: CandidateView, **params) -> list[float]:
    """One-shot distribution for a fresh selector of the given kind."""
    return make_selector(kind, **params).distribution(view)
