"""Per-meter sentiment statistics: distribution, entropy, spread, polarization.

Entropy is Shannon entropy in bits of the empirical score distribution
within a meter; with 5 possible scores it ranges from 0 (all poems share
one score) to log2(5) ~ 2.3219 (scores evenly spread). Standard deviation
is the population formula, optionally measured about an external reference
mean (the corpus-wide average) rather than the group's own mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import meter_sort_key
from .scale import (
    HAPPY_SCORES,
    NEUTRAL_SCORE,
    POLARIZED_SCORES,
    SCORES,
    check_scores,
)

MAX_ENTROPY_BITS = math.log2(len(SCORES))


@dataclass(frozen=True)
class SentimentDistribution:
    """Probabilities of scores 1..5, in order."""

    p: tuple[float, float, float, float, float]

    def __post_init__(self) -> None:
        if any(x < 0 for x in self.p):
            raise ValueError("probabilities must be non-negative")
        if abs(sum(self.p) - 1.0) > 1e-9:
            raise ValueError(f"probabilities must sum to 1, got {sum(self.p)}")


@dataclass(frozen=True)
class MeterStats:
    meter_code: str
    n_poems: int
    mean_sentiment: float
    std_dev: float
    entropy_bits: float
    happy_fraction: float
    polarized_fraction: float
    neutral_fraction: float


def sentiment_distribution(scores: Sequence[int]) -> SentimentDistribution:
    checked = check_scores(scores)
    n = len(checked)
    counts = [0] * len(SCORES)
    for s in checked:
        counts[s - SCORES[0]] += 1
    return SentimentDistribution(p=tuple(c / n for c in counts))  # type: ignore[arg-type]


def entropy(dist: SentimentDistribution) -> float:
    """Shannon entropy in bits; empty categories contribute zero."""
    # + 0.0 normalizes the -0.0 of a degenerate distribution
    return -sum(p * math.log2(p) for p in dist.p if p > 0.0) + 0.0


def mean_sentiment(scores: Sequence[int]) -> float:
    checked = check_scores(scores)
    return sum(checked) / len(checked)


def std_dev(scores: Sequence[int], reference_mean: float | None = None) -> float:
    """Population standard deviation, about ``reference_mean`` when given."""
    checked = check_scores(scores)
    center = mean_sentiment(checked) if reference_mean is None else reference_mean
    return math.sqrt(sum((s - center) ** 2 for s in checked) / len(checked))


def happy_fraction(scores: Sequence[int]) -> float:
    checked = check_scores(scores)
    return sum(1 for s in checked if s in HAPPY_SCORES) / len(checked)


def polarization(scores: Sequence[int]) -> tuple[float, float]:
    """(polarized_fraction, neutral_fraction): non-neutral vs. score-3 poems."""
    checked = check_scores(scores)
    n = len(checked)
    polarized = sum(1 for s in checked if s in POLARIZED_SCORES) / n
    neutral = sum(1 for s in checked if s == NEUTRAL_SCORE) / n
    return polarized, neutral


def stats_for_group(meter_code: str, scores: Sequence[int], reference_mean: float | None = None) -> MeterStats:
    polarized, neutral = polarization(scores)
    return MeterStats(
        meter_code=meter_code,
        n_poems=len(scores),
        mean_sentiment=mean_sentiment(scores),
        std_dev=std_dev(scores, reference_mean),
        entropy_bits=entropy(sentiment_distribution(scores)),
        happy_fraction=happy_fraction(scores),
        polarized_fraction=polarized,
        neutral_fraction=neutral,
    )


def compute_meter_stats(
    groups: Mapping[str, Sequence[int]], corpus_mean: float | None = None
) -> list[MeterStats]:
    """One MeterStats per meter group, sorted by meter code.

    ``corpus_mean`` centers the standard deviation on the corpus-wide
    average sentiment; when omitted each group uses its own mean.
    """
    for code, scores in groups.items():
        if not scores:
            raise ValueError(f"meter group {code!r} is empty")
    return [
        stats_for_group(code, groups[code], corpus_mean)
        for code in sorted(groups, key=meter_sort_key)
    ]
