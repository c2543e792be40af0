"""Exact finite probability tables with rational weights."""

from collections import defaultdict
from fractions import Fraction
import itertools
from typing import Any, Callable, Dict, Hashable, Iterable, Iterator, Mapping, Tuple

import numpy as np

from .errors import DomainError


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions and decimal strings exactly; floats by their exact value."""
    if isinstance(value, Fraction):
        return value
    return Fraction(value)


class FiniteDistribution(Mapping):
    """Outcome -> positive Fraction weight.

    Weights usually sum to 1, but sub-probability tables (conditional mass,
    truncated enumerations) are allowed; ``total`` reports the mass.
    """

    __slots__ = ("_table", "_weights")

    def __init__(self, weights: Mapping[Hashable, Any] = ()):
        acc: Dict[Hashable, Fraction] = defaultdict(Fraction)
        items = weights.items() if isinstance(weights, Mapping) else weights
        for outcome, w in items:
            w = as_fraction(w)
            if w < 0:
                raise DomainError(f"negative weight {w} for outcome {outcome!r}")
            acc[outcome] += w
        self._weights = {k: v for k, v in acc.items() if v != 0}
        self._table = None

    @classmethod
    def point(cls, outcome) -> "FiniteDistribution":
        return cls({outcome: 1})

    @classmethod
    def uniform(cls, outcomes: Iterable[Hashable]) -> "FiniteDistribution":
        outcomes = list(outcomes)
        if not outcomes:
            raise DomainError("uniform distribution over an empty set")
        w = Fraction(1, len(outcomes))
        return cls((o, w) for o in outcomes)

    def __getitem__(self, outcome) -> Fraction:
        return self._weights[outcome]

    def __iter__(self) -> Iterator:
        return iter(self._weights)

    def __len__(self) -> int:
        return len(self._weights)

    def __eq__(self, other) -> bool:
        if isinstance(other, FiniteDistribution):
            return self._weights == other._weights
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._weights.items()))

    def __repr__(self) -> str:
        shown = ", ".join(f"{k!r}: {v}" for k, v in list(self._weights.items())[:6])
        more = ", ..." if len(self) > 6 else ""
        return f"FiniteDistribution({{{shown}{more}}})"

    def prob(self, outcome) -> Fraction:
        return self._weights.get(outcome, Fraction(0))

    @property
    def total(self) -> Fraction:
        return sum(self._weights.values(), Fraction(0))

    def normalized(self) -> "FiniteDistribution":
        total = self.total
        if total == 0:
            raise DomainError("cannot normalize a distribution with zero mass")
        return FiniteDistribution({k: v / total for k, v in self._weights.items()})

    def scaled(self, factor) -> "FiniteDistribution":
        factor = as_fraction(factor)
        return FiniteDistribution({k: v * factor for k, v in self._weights.items()})

    def pushforward(self, fn: Callable[[Any], Hashable]) -> "FiniteDistribution":
        """Law of fn(X) for X with this law."""
        return FiniteDistribution((fn(k), v) for k, v in self._weights.items())

    def filter(self, predicate: Callable[[Any], bool]) -> "FiniteDistribution":
        """Restriction to outcomes satisfying predicate (mass not renormalized)."""
        return FiniteDistribution(
            {k: v for k, v in self._weights.items() if predicate(k)}
        )

    def mean(self) -> Tuple[Fraction, ...]:
        """Per-coordinate mean for tuple-valued outcomes."""
        total = self.total
        if not self._weights:
            raise DomainError("mean of an empty distribution")
        width = len(next(iter(self._weights)))
        sums = [Fraction(0)] * width
        for outcome, w in self._weights.items():
            for i, x in enumerate(outcome):
                sums[i] += w * as_fraction(x)
        return tuple(s / total for s in sums)

    @staticmethod
    def product(*laws: "FiniteDistribution") -> "FiniteDistribution":
        """Joint law of independent draws, outcomes as tuples."""
        acc: Dict[Tuple, Fraction] = defaultdict(Fraction)
        for combo in itertools.product(*(law.items() for law in laws)):
            weight = Fraction(1)
            for _, w in combo:
                weight *= w
            acc[tuple(k for k, _ in combo)] += weight
        return FiniteDistribution(acc)

    @staticmethod
    def mix(parts: Iterable[Tuple[Any, "FiniteDistribution"]]) -> "FiniteDistribution":
        """Sum of weight * law over (weight, law) pairs."""
        acc: Dict[Hashable, Fraction] = defaultdict(Fraction)
        for weight, law in parts:
            weight = as_fraction(weight)
            for k, v in law.items():
                acc[k] += weight * v
        return FiniteDistribution(acc)

    def sample(self, rng):
        """Draw one outcome with a numpy Generator."""
        if self._table is None:
            total = self.total
            cumulative = np.cumsum([float(w / total) for w in self._weights.values()])
            self._table = (list(self._weights), cumulative)
        outcomes, cumulative = self._table
        i = int(
            np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right")
        )
        return outcomes[min(i, len(outcomes) - 1)]

    def max_abs_difference(self, other: "FiniteDistribution") -> Fraction:
        keys = set(self._weights) | set(other._weights)
        return max(
            (abs(self.prob(k) - other.prob(k)) for k in keys), default=Fraction(0)
        )
