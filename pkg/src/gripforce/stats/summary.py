from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from ..errors import EmptyInput, SingletonSem


@dataclass(frozen=True)
class SummaryStats:
    """Count, mean and standard error of the mean (n - 1 denominator)."""

    n: int
    mean: float
    sd: float | None  # None when n == 1

    @property
    def sem(self) -> float:
        if self.sd is None:
            raise SingletonSem("standard error needs at least two values")
        return self.sd / math.sqrt(self.n)

    def to_dict(self) -> dict:
        return {"n": self.n, "mean": self.mean, "sem": None if self.sd is None else self.sem}


def summary_stats(values: Iterable[float]) -> SummaryStats:
    vals = [float(v) for v in values]
    n = len(vals)
    if n == 0:
        raise EmptyInput("summary statistics of an empty sample")
    mean = math.fsum(vals) / n
    if n == 1:
        return SummaryStats(1, mean, None)
    ss = math.fsum((v - mean) ** 2 for v in vals)
    return SummaryStats(n, mean, math.sqrt(ss / (n - 1)))
