"""Fusing multiple annotators' ratings into one ground-truth label per poem.

Four strategies are provided: mean, median, mode (majority vote), and the
Dawid-Skene model, which runs expectation-maximization to jointly estimate
per-item true-label posteriors and a 5x5 confusion matrix per annotator.
``select_ground_truth`` runs all four and keeps the one whose labels have
the highest average quadratic weighted kappa against the annotators.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .agreement import RatingMatrix, average_qwk
from .scale import SCORES, check_scores, round_score
from .validation import check_ratings_array

AGGREGATION_METHODS = ("mean", "median", "mode", "dawid-skene")


def aggregate_mean(ratings: Sequence[int]) -> int:
    """Arithmetic mean, rounded half-away-from-zero, clamped to the scale."""
    checked = check_scores(ratings, context="ratings")
    return round_score(Fraction(sum(checked), len(checked)))


def aggregate_median(ratings: Sequence[int]) -> int:
    """Middle value; an even count takes the rounded mean of the two middles."""
    checked = sorted(check_scores(ratings, context="ratings"))
    n = len(checked)
    if n % 2 == 1:
        return checked[n // 2]
    return round_score(Fraction(checked[n // 2 - 1] + checked[n // 2], 2))


def aggregate_mode(ratings: Sequence[int]) -> int:
    """Most frequent score.

    Ties go to the tied score closest to the unrounded mean; an equidistant
    tie resolves to the lower score.
    """
    checked = check_scores(ratings, context="ratings")
    counts = Counter(checked)
    top = max(counts.values())
    tied = [s for s, c in counts.items() if c == top]
    mean = Fraction(sum(checked), len(checked))
    return min(tied, key=lambda s: (abs(Fraction(s) - mean), s))


class DawidSkene(BaseEstimator):
    """EM estimator of true labels and annotator confusion matrices.

    Takes an ``(n_items, n_raters)`` grid of 1-5 scores with NaN for missing
    cells. Per-item class posteriors are initialized from vote fractions;
    each iteration re-estimates class priors and per-rater confusion
    matrices (M-step, with additive smoothing) and then the posteriors
    (E-step), stopping when the largest posterior change drops below
    ``tol`` or after ``max_iter`` iterations.

    Parameters
    ----------
    tol : float
        Convergence threshold on the max absolute posterior change.
    max_iter : int
        Iteration cap; hitting it sets ``converged_`` to False.
    smoothing : float
        Additive smoothing applied to confusion rows and priors before
        normalization.

    Attributes
    ----------
    labels_ : (n_items,) int array of MAP scores, ties to the lower score.
    posteriors_ : (n_items, 5) array of per-item class posteriors.
    class_priors_ : (5,) array.
    confusion_matrices_ : (n_raters, 5, 5) array; entry (r, t, k) is the
        probability rater r answers k when the true score is t.
    log_likelihoods_ : per-iteration data log-likelihood (non-decreasing).
    n_iter_ : iterations actually run.
    converged_ : whether the tolerance was met before ``max_iter``.
    """

    def __init__(self, *, tol: float = 1e-6, max_iter: int = 500, smoothing: float = 1e-9):
        self.tol = tol
        self.max_iter = max_iter
        self.smoothing = smoothing

    def fit(self, X, y=None) -> "DawidSkene":
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        X = check_ratings_array(X)
        n_items, n_raters = X.shape
        k = len(SCORES)
        observed = ~np.isnan(X)
        idx = np.where(observed, X - SCORES[0], 0).astype(int)  # class indices, junk where missing

        # Soft majority initialization: per-item vote fractions.
        posteriors = np.zeros((n_items, k))
        for t in range(k):
            posteriors[:, t] = ((idx == t) & observed).sum(axis=1)
        posteriors /= posteriors.sum(axis=1, keepdims=True)

        log_likelihoods: list[float] = []
        converged = False
        n_iter = 0
        for n_iter in range(1, self.max_iter + 1):
            # M-step: priors and confusion matrices from current posteriors.
            priors = posteriors.sum(axis=0) + self.smoothing
            priors /= priors.sum()
            confusion = np.empty((n_raters, k, k))
            for r in range(n_raters):
                obs = observed[:, r]
                onehot = np.zeros((int(obs.sum()), k))
                onehot[np.arange(onehot.shape[0]), idx[obs, r]] = 1.0
                counts = posteriors[obs].T @ onehot + self.smoothing
                confusion[r] = counts / counts.sum(axis=1, keepdims=True)

            # E-step in log space, also yielding the data log-likelihood.
            log_post = np.tile(np.log(priors), (n_items, 1))
            log_conf = np.log(confusion)
            for r in range(n_raters):
                obs = observed[:, r]
                log_post[obs] += log_conf[r][:, idx[obs, r]].T
            shift = log_post.max(axis=1, keepdims=True)
            item_ll = shift[:, 0] + np.log(np.exp(log_post - shift).sum(axis=1))
            log_likelihoods.append(float(item_ll.sum()))
            new_posteriors = np.exp(log_post - item_ll[:, None])

            delta = float(np.abs(new_posteriors - posteriors).max())
            posteriors = new_posteriors
            if delta < self.tol:
                converged = True
                break

        self.posteriors_ = posteriors
        self.class_priors_ = priors
        self.confusion_matrices_ = confusion
        self.log_likelihoods_ = log_likelihoods
        self.n_iter_ = n_iter
        self.converged_ = converged
        # argmax takes the first maximum, i.e. MAP ties resolve to the lower score.
        self.labels_ = posteriors.argmax(axis=1) + SCORES[0]
        return self

    def fit_predict(self, X, y=None) -> np.ndarray:
        return self.fit(X).labels_


@dataclass(frozen=True)
class MethodScore:
    """One aggregation strategy's labels and alignment with the annotators."""

    method: str
    labels: tuple[int, ...]
    avg_qwk: float


@dataclass(frozen=True)
class GroundTruth:
    """The selected gold labels and how they were chosen."""

    method: str
    labels: dict[str, int]
    selection_score: float


def compare_aggregation_methods(
    matrix: RatingMatrix, *, tol: float = 1e-6, max_iter: int = 500
) -> tuple[list[MethodScore], DawidSkene]:
    """Run all four aggregators and score each against the annotator panel.

    Requires a complete matrix. Returns the per-method scores (in the fixed
    method order) and the fitted Dawid-Skene estimator for diagnostics.
    """
    if not matrix.is_complete:
        raise ValueError("ground-truth aggregation requires a complete rating matrix")
    rows = matrix.rows
    columns = [list(matrix.column(r)) for r in matrix.rater_ids]
    ds = DawidSkene(tol=tol, max_iter=max_iter)
    labels_by_method: dict[str, tuple[int, ...]] = {
        "mean": tuple(aggregate_mean(row) for row in rows),
        "median": tuple(aggregate_median(row) for row in rows),
        "mode": tuple(aggregate_mode(row) for row in rows),
        "dawid-skene": tuple(int(v) for v in ds.fit_predict(matrix.to_array())),
    }
    scores = [
        MethodScore(method=m, labels=labels_by_method[m], avg_qwk=average_qwk(labels_by_method[m], columns))
        for m in AGGREGATION_METHODS
    ]
    return scores, ds


def pick_ground_truth(matrix: RatingMatrix, scores: Sequence[MethodScore]) -> GroundTruth:
    """Highest average QWK wins; ties keep the earliest method in the fixed order."""
    best = max(scores, key=lambda s: (s.avg_qwk, -AGGREGATION_METHODS.index(s.method)))
    return GroundTruth(
        method=best.method,
        labels=dict(zip(matrix.item_ids, best.labels)),
        selection_score=best.avg_qwk,
    )


def select_ground_truth(matrix: RatingMatrix, *, tol: float = 1e-6, max_iter: int = 500) -> GroundTruth:
    scores, _ = compare_aggregation_methods(matrix, tol=tol, max_iter=max_iter)
    return pick_ground_truth(matrix, scores)
