from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from divan.meterstats import (
    MAX_ENTROPY_BITS,
    SentimentDistribution,
    compute_meter_stats,
    entropy,
    happy_fraction,
    mean_sentiment,
    polarization,
    sentiment_distribution,
    std_dev,
    stats_for_group,
)

from oracles import entropy_oracle

scores_lists = st.lists(st.integers(1, 5), min_size=1, max_size=30)


def test_sentiment_distribution_examples():
    assert sentiment_distribution([3, 3, 3, 3]).p == (0, 0, 1, 0, 0)
    assert sentiment_distribution([1, 5]).p == (0.5, 0, 0, 0, 0.5)
    assert sentiment_distribution([1, 1, 2, 5]).p == (0.5, 0.25, 0, 0, 0.25)


def test_distribution_validation():
    with pytest.raises(ValueError, match="sum to 1"):
        SentimentDistribution(p=(0.5, 0, 0, 0, 0))
    with pytest.raises(ValueError, match="non-negative"):
        SentimentDistribution(p=(-0.5, 0.5, 0.5, 0.5, 0))


def test_entropy_uniform_hits_ceiling():
    value = entropy(SentimentDistribution(p=(0.2,) * 5))
    assert value == pytest.approx(math.log2(5), abs=1e-12)
    assert value == pytest.approx(2.3219, abs=1e-4)


def test_entropy_degenerate_is_zero():
    value = entropy(SentimentDistribution(p=(0, 0, 1, 0, 0)))
    assert value == 0.0
    assert math.copysign(1.0, value) == 1.0  # not -0.0


def test_entropy_derived_value():
    assert entropy(SentimentDistribution(p=(0.5, 0.25, 0.25, 0, 0))) == pytest.approx(1.5, abs=1e-12)


def test_entropy_bounds_on_probability_grid():
    # sweep the whole 5-simplex in 1/6 steps, then in 1/5 steps (which hit
    # the uniform point) to pin down where the extremes are attained
    for denominator in (6, 5):
        for combo in itertools.product(range(denominator + 1), repeat=4):
            if sum(combo) > denominator:
                continue
            counts = combo + (denominator - sum(combo),)
            p = tuple(c / denominator for c in counts)
            h = entropy(SentimentDistribution(p=p))
            assert -1e-12 <= h <= MAX_ENTROPY_BITS + 1e-12
            assert h == pytest.approx(entropy_oracle(p), abs=1e-12)
            degenerate = max(p) == 1.0
            assert (h == 0.0) == degenerate
            uniform = len(set(counts)) == 1
            if uniform:
                assert h == pytest.approx(MAX_ENTROPY_BITS, abs=1e-12)
            else:
                assert h < MAX_ENTROPY_BITS - 1e-6


def test_mean_sentiment_examples():
    assert mean_sentiment([1, 5]) == 3.0
    assert mean_sentiment([4, 4, 4]) == 4.0
    assert mean_sentiment([1, 2, 3]) == 2.0


def test_std_dev_examples():
    assert std_dev([3, 3, 3]) == 0.0
    assert std_dev([1, 5]) == 2.0
    assert std_dev([1, 5], reference_mean=3.0) == 2.0


def test_std_dev_about_external_reference():
    # all mass at 4, reference at 3: every deviation is exactly 1
    assert std_dev([4, 4, 4, 4], reference_mean=3.0) == 1.0


def test_happy_fraction_examples():
    assert happy_fraction([4, 5, 1]) == pytest.approx(2 / 3)
    assert happy_fraction([1, 2, 3]) == 0.0
    assert happy_fraction([5, 5]) == 1.0


def test_polarization_examples():
    assert polarization([3, 3, 1, 5]) == (0.5, 0.5)
    assert polarization([3, 3]) == (0.0, 1.0)
    assert polarization([1, 2, 4, 5]) == (1.0, 0.0)


@given(scores_lists)
def test_fractions_partition_the_scale(scores):
    happy = happy_fraction(scores)
    polarized, neutral = polarization(scores)
    sad = sum(1 for s in scores if s <= 2) / len(scores)
    assert happy + sad + neutral == pytest.approx(1.0, abs=1e-12)
    assert polarized + neutral == pytest.approx(1.0, abs=1e-12)


@given(scores_lists)
def test_statistics_invariant_under_permutation(scores):
    reordered = sorted(scores)
    assert mean_sentiment(reordered) == pytest.approx(mean_sentiment(scores), abs=1e-12)
    assert std_dev(reordered) == pytest.approx(std_dev(scores), abs=1e-12)
    assert sentiment_distribution(reordered).p == sentiment_distribution(scores).p


@given(scores_lists, st.permutations([1, 2, 3, 4, 5]))
def test_entropy_invariant_under_score_relabeling(scores, perm):
    relabel = dict(zip([1, 2, 3, 4, 5], perm))
    original = entropy(sentiment_distribution(scores))
    relabeled = entropy(sentiment_distribution([relabel[s] for s in scores]))
    assert relabeled == pytest.approx(original, abs=1e-12)


@given(scores_lists)
def test_entropy_within_bounds_random(scores):
    h = entropy(sentiment_distribution(scores))
    assert 0.0 <= h <= MAX_ENTROPY_BITS + 1e-12


def test_compute_meter_stats_composition():
    stats = compute_meter_stats({"C1": [3, 3]})
    (row,) = stats
    assert row.n_poems == 2
    assert row.mean_sentiment == 3.0
    assert row.entropy_bits == 0.0
    assert row.happy_fraction == 0.0
    assert row.polarized_fraction == 0.0


def test_compute_meter_stats_uniform_entropy():
    (row,) = compute_meter_stats({"C1": [1, 2, 3, 4, 5]})
    assert row.entropy_bits == pytest.approx(math.log2(5), abs=1e-12)


def test_compute_meter_stats_sorted_output():
    stats = compute_meter_stats({"C2": [3], "C1": [4], "C10": [5]})
    assert [s.meter_code for s in stats] == ["C1", "C2", "C10"]


def test_compute_meter_stats_rejects_empty_group():
    with pytest.raises(ValueError, match="empty"):
        compute_meter_stats({"C1": []})


def test_compute_meter_stats_uses_corpus_mean():
    stats = compute_meter_stats({"C1": [4, 4]}, corpus_mean=3.0)
    assert stats[0].std_dev == 1.0


def test_stats_for_group_matches_parts():
    scores = [1, 3, 3, 5, 4]
    row = stats_for_group("ALL", scores)
    assert row.mean_sentiment == np.mean(scores)
    assert row.std_dev == pytest.approx(np.std(scores), abs=1e-12)
    assert row.happy_fraction == happy_fraction(scores)
