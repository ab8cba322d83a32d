from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from divan.aggregation import (
    AGGREGATION_METHODS,
    DawidSkene,
    aggregate_mean,
    aggregate_median,
    aggregate_mode,
    compare_aggregation_methods,
    pick_ground_truth,
    select_ground_truth,
)
from divan.agreement import RatingMatrix, average_qwk
from divan.synthetic import synth_annotations

ratings_lists = st.lists(st.integers(1, 5), min_size=1, max_size=9)


# ---------------------------------------------------------------- simple aggregators


@pytest.mark.parametrize(
    "ratings,expected",
    [((1, 2, 4, 5), 3), ((4, 5, 5, 5), 5), ((3, 4), 4)],
)
def test_aggregate_mean_examples(ratings, expected):
    assert aggregate_mean(ratings) == expected


@pytest.mark.parametrize(
    "ratings,expected",
    [((1, 2, 4, 5), 3), ((1, 3, 5), 3), ((1, 1, 5, 5), 3)],
)
def test_aggregate_median_examples(ratings, expected):
    assert aggregate_median(ratings) == expected


@pytest.mark.parametrize(
    "ratings,expected",
    [((2, 2, 2, 5), 2), ((1, 1, 5, 5), 1), ((2, 2, 4, 4, 4), 4)],
)
def test_aggregate_mode_examples(ratings, expected):
    assert aggregate_mode(ratings) == expected


def test_aggregate_mode_tie_prefers_closest_to_mean():
    # mean of (1,1,4,4,5) is 3: tied scores 1 and 4 sit at distance 2 and 1
    assert aggregate_mode((1, 1, 4, 4, 5)) == 4


@pytest.mark.parametrize("aggregator", [aggregate_mean, aggregate_median, aggregate_mode])
def test_aggregators_reject_empty(aggregator):
    with pytest.raises(ValueError, match="non-empty"):
        aggregator([])


@pytest.mark.parametrize("aggregator", [aggregate_mean, aggregate_median, aggregate_mode])
@given(ratings=ratings_lists)
def test_aggregators_range_and_permutation_invariance(aggregator, ratings):
    result = aggregator(ratings)
    assert 1 <= result <= 5
    assert aggregator(sorted(ratings, reverse=True)) == result


@pytest.mark.parametrize("aggregator", [aggregate_mean, aggregate_median, aggregate_mode])
@given(value=st.integers(1, 5), n=st.integers(1, 6))
def test_aggregators_fix_constant_lists(aggregator, value, n):
    assert aggregator([value] * n) == value


# ---------------------------------------------------------------- Dawid-Skene


def test_ds_unanimous_reproduces_votes():
    votes = [1, 5, 3, 3, 2]
    X = np.array([[v] * 4 for v in votes], dtype=float)
    for max_iter in (1, 5, 500):
        ds = DawidSkene(max_iter=max_iter).fit(X)
        assert list(ds.labels_) == votes
    priors = DawidSkene().fit(X).class_priors_
    for score in range(1, 6):
        assert priors[score - 1] == pytest.approx(votes.count(score) / len(votes), abs=1e-6)


def test_ds_three_perfect_annotators_and_one_constant():
    truth = [1, 2, 3, 4, 5, 1, 2, 3, 4, 5]
    X = np.array([[t, t, t, 3] for t in truth], dtype=float)
    ds = DawidSkene().fit(X)
    assert list(ds.labels_) == truth
    constant_confusion = ds.confusion_matrices_[3]
    # whatever the true score, the constant rater answers 3
    for row in constant_confusion:
        assert row[2] == pytest.approx(1.0, abs=1e-6)


def test_ds_loglikelihood_non_decreasing_and_convergence():
    matrix, _ = synth_annotations(50, 4, accuracy=0.8, seed=3)
    ds = DawidSkene(tol=1e-6, max_iter=500).fit(matrix.to_array())
    assert ds.converged_
    assert ds.n_iter_ <= 500
    lls = ds.log_likelihoods_
    assert all(b >= a - 1e-9 for a, b in zip(lls, lls[1:]))


def test_ds_beats_majority_vote_with_adversary():
    matrix, truth = synth_annotations(100, 4, accuracy=0.85, n_adversarial=1, seed=11)
    labels = DawidSkene().fit_predict(matrix.to_array())
    truth_list = [truth[item] for item in matrix.item_ids]
    ds_hits = sum(1 for got, want in zip(labels, truth_list) if got == want)
    mv_hits = sum(
        1 for row, want in zip(matrix.rows, truth_list) if aggregate_mode(row) == want
    )
    assert ds_hits >= mv_hits


def test_ds_handles_missing_cells():
    X = np.array(
        [[1, 1, np.nan], [5, np.nan, 5], [np.nan, 3, 3], [2, 2, 2]], dtype=float
    )
    ds = DawidSkene().fit(X)
    assert list(ds.labels_) == [1, 5, 3, 2]


def test_ds_rejects_bad_inputs():
    with pytest.raises(ValueError, match="integers in 1..5"):
        DawidSkene().fit(np.array([[0.5, 2.0]]))
    with pytest.raises(ValueError, match="no ratings"):
        DawidSkene().fit(np.array([[np.nan, np.nan], [1.0, 2.0]]))
    with pytest.raises(ValueError, match="tol"):
        DawidSkene(tol=0.0).fit(np.array([[1.0, 1.0]]))
    with pytest.raises(ValueError, match="max_iter"):
        DawidSkene(max_iter=0).fit(np.array([[1.0, 1.0]]))


def test_ds_map_ties_resolve_to_lower_score():
    # two raters split evenly between 2 and 4 on every item: posteriors tie
    X = np.array([[2, 4], [2, 4], [4, 2]], dtype=float)
    ds = DawidSkene(max_iter=1).fit(X)
    for item_posterior, label in zip(ds.posteriors_, ds.labels_):
        top = item_posterior.max()
        tied = [s + 1 for s, p in enumerate(item_posterior) if p == top]
        assert label == min(tied)


def test_ds_confusion_rows_are_distributions():
    matrix, _ = synth_annotations(30, 3, accuracy=0.7, seed=5)
    ds = DawidSkene().fit(matrix.to_array())
    sums = ds.confusion_matrices_.sum(axis=2)
    assert np.allclose(sums, 1.0, atol=1e-9)
    assert (ds.confusion_matrices_ >= 0).all()
    assert ds.class_priors_ == pytest.approx(ds.class_priors_)
    assert ds.class_priors_.sum() == pytest.approx(1.0, abs=1e-9)


def test_ds_sklearn_param_interface():
    ds = DawidSkene(tol=1e-4, max_iter=50)
    params = ds.get_params()
    assert params == {"tol": 1e-4, "max_iter": 50, "smoothing": 1e-9}
    ds.set_params(max_iter=10)
    assert ds.max_iter == 10


# ---------------------------------------------------------------- ground-truth selection


def unanimous_matrix():
    return RatingMatrix.from_records(
        [(f"p{i}", rater, score) for i, score in enumerate([1, 3, 5, 2, 4]) for rater in ("a", "b", "c")]
    )


def test_select_ground_truth_unanimous_tie_breaks_to_mean():
    ground_truth = select_ground_truth(unanimous_matrix())
    assert ground_truth.method == "mean"
    assert ground_truth.selection_score == 1.0
    assert list(ground_truth.labels.values()) == [1, 3, 5, 2, 4]


def test_compare_aggregation_methods_covers_all_methods():
    scores, ds = compare_aggregation_methods(unanimous_matrix())
    assert [s.method for s in scores] == list(AGGREGATION_METHODS)
    assert all(s.avg_qwk == 1.0 for s in scores)
    assert ds.converged_


def test_select_ground_truth_requires_complete_matrix():
    incomplete = RatingMatrix.from_records([("p1", "a", 3), ("p2", "b", 4)])
    with pytest.raises(ValueError, match="complete"):
        select_ground_truth(incomplete)


def test_annotator_matching_mean_labels_boosts_mean():
    # annotator "exact" always equals the mean aggregate; mean must rank first
    rows = [(1, 2, 1), (2, 4, 3), (5, 5, 5), (1, 5, 3), (4, 2, 3)]
    records = []
    for i, row in enumerate(rows):
        for rater, value in zip(("r1", "r2", "exact"), row):
            records.append((f"p{i}", rater, value))
    matrix = RatingMatrix.from_records(records)
    assert [aggregate_mean(row) for row in rows] == [row[2] for row in rows]
    scores, _ = compare_aggregation_methods(matrix)
    by_method = {s.method: s for s in scores}
    columns = [list(matrix.column(r)) for r in matrix.rater_ids]
    assert by_method["mean"].avg_qwk == pytest.approx(
        average_qwk([row[2] for row in rows], columns), abs=1e-12
    )
    ground_truth = pick_ground_truth(matrix, scores)
    assert ground_truth.method == "mean"


@given(st.lists(st.integers(1, 5), min_size=2, max_size=8))
def test_ds_on_unanimous_data_for_any_length(votes):
    X = np.array([[v] * 3 for v in votes], dtype=float)
    assert list(DawidSkene(max_iter=2).fit_predict(X)) == votes
