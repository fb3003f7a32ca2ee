"""Streaming moment aggregation for ensemble observables.

Welford updates with Chan's pairwise merge, so partial aggregates from
parallel workers combine into the same totals (to rounding) regardless of
the merge order.
"""

import math
from dataclasses import dataclass


@dataclass
class EnsembleStats:
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    min: float = math.inf
    max: float = -math.inf

    def update(self, x: float) -> None:
        x = float(x)
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)
        self.min = min(self.min, x)
        self.max = max(self.max, x)

    def merge(self, other: "EnsembleStats") -> "EnsembleStats":
        """Combined statistics of the two underlying samples."""
        if self.count == 0:
            return EnsembleStats(other.count, other.mean, other.m2, other.min, other.max)
        if other.count == 0:
            return EnsembleStats(self.count, self.mean, self.m2, self.min, self.max)
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        return EnsembleStats(n, mean, m2, min(self.min, other.min),
                             max(self.max, other.max))

    @property
    def variance(self) -> float:
        """Population variance (M2 / count)."""
        return self.m2 / self.count if self.count else 0.0

    @property
    def sample_variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def sd(self) -> float:
        return math.sqrt(self.sample_variance)

    @classmethod
    def from_values(cls, values) -> "EnsembleStats":
        s = cls()
        for v in values:
            s.update(v)
        return s
