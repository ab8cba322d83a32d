"""Model-vs-human evaluation harness.

Builds the validation sample (poems the scorers disagree on most, plus
poems they score identically) and benchmarks evaluators against the
selected ground truth with QWK and exact accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .aggregation import GroundTruth
from .agreement import absolute_accuracy, quadratic_weighted_kappa
from .meterstats import std_dev


@dataclass(frozen=True)
class ValidationSample:
    high_disagreement_ids: tuple[str, ...]
    consensus_ids: tuple[str, ...]


@dataclass(frozen=True)
class BenchmarkRow:
    evaluator_id: str
    qwk: float
    accuracy_pct: float


def select_validation_sample(
    scores_by_scorer: Mapping[str, Mapping[str, int]],
    n_high: int = 80,
    n_consensus: int = 20,
) -> ValidationSample:
    """Pick validation poems from cross-scorer disagreement.

    High-disagreement poems are the ``n_high`` with the largest population
    standard deviation of scores across scorers (ties by poem id);
    consensus poems are drawn from the remainder and must have exactly zero
    spread, i.e. every scorer gave the identical score.
    """
    if len(scores_by_scorer) < 2:
        raise ValueError("need at least 2 scorers to select a validation sample")
    if n_high < 0 or n_consensus < 0:
        raise ValueError("sample quotas must be >= 0")
    scorer_ids = sorted(scores_by_scorer)
    poem_ids = set(scores_by_scorer[scorer_ids[0]])
    for sid in scorer_ids[1:]:
        if set(scores_by_scorer[sid]) != poem_ids:
            raise ValueError(f"scorer {sid!r} does not cover the same poems as {scorer_ids[0]!r}")
    if n_high + n_consensus > len(poem_ids):
        raise ValueError(
            f"quotas ({n_high} + {n_consensus}) exceed the {len(poem_ids)} poems available"
        )

    spread = {
        pid: std_dev([scores_by_scorer[sid][pid] for sid in scorer_ids]) for pid in poem_ids
    }
    by_disagreement = sorted(poem_ids, key=lambda pid: (-spread[pid], pid))
    high = by_disagreement[:n_high]
    zero_rest = sorted(pid for pid in by_disagreement[n_high:] if spread[pid] == 0.0)
    if len(zero_rest) < n_consensus:
        raise ValueError(
            f"consensus quota is {n_consensus} but only {len(zero_rest)} poems have identical scores"
        )
    return ValidationSample(
        high_disagreement_ids=tuple(high), consensus_ids=tuple(zero_rest[:n_consensus])
    )


def benchmark_scorers(
    ground_truth: GroundTruth, evaluator_ratings: Mapping[str, Sequence[int]]
) -> list[BenchmarkRow]:
    """QWK and exact accuracy of each evaluator against the gold labels.

    Rating lists must align with the ground truth's item order. Rows come
    back sorted by descending QWK (ties by evaluator id).
    """
    truth = list(ground_truth.labels.values())
    rows = []
    for evaluator_id in sorted(evaluator_ratings):
        ratings = evaluator_ratings[evaluator_id]
        if len(ratings) != len(truth):
            raise ValueError(
                f"evaluator {evaluator_id!r} has {len(ratings)} ratings for {len(truth)} ground-truth items"
            )
        rows.append(
            BenchmarkRow(
                evaluator_id=evaluator_id,
                qwk=quadratic_weighted_kappa(ratings, truth),
                accuracy_pct=absolute_accuracy(ratings, truth),
            )
        )
    rows.sort(key=lambda r: (-r.qwk, r.evaluator_id))
    return rows
