"""Input validation helpers shared by the metric and aggregation modules."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .scale import SCORES, is_valid_score

Rows = tuple[tuple[int | None, ...], ...]


def check_rating_rows(
    data: Sequence[Sequence[int | None]],
    *,
    allow_missing: bool = True,
    min_raters: int = 2,
    context: str = "ratings",
) -> Rows:
    """Validate an item-major grid of optional 1-5 scores.

    Requires a rectangular grid with at least one item and ``min_raters``
    columns. Missing cells (None) are rejected unless ``allow_missing``.
    """
    rows = tuple(tuple(row) for row in data)
    if not rows:
        raise ValueError(f"{context}: need at least one item")
    width = len(rows[0])
    if width < min_raters:
        raise ValueError(f"{context}: need at least {min_raters} raters, got {width}")
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(f"{context}: item {i} has {len(row)} ratings, expected {width}")
        for j, value in enumerate(row):
            # inlined is_valid_score; this sits on the hot path of every metric
            if type(value) is int and 1 <= value <= 5:
                continue
            if value is None:
                if not allow_missing:
                    raise ValueError(f"{context}: missing rating at item {i}, rater {j}")
            elif not is_valid_score(value):
                raise ValueError(
                    f"{context}: rating at item {i}, rater {j} must be an integer in 1..5, got {value!r}"
                )
    return rows


def check_equal_length(a: Sequence, b: Sequence, *, context: str = "rating lists") -> None:
    if len(a) != len(b):
        raise ValueError(f"{context}: length mismatch ({len(a)} vs {len(b)})")
    if len(a) == 0:
        raise ValueError(f"{context}: must be non-empty")


def check_ratings_array(X, *, context: str = "X") -> np.ndarray:
    """Coerce an (n_items, n_raters) array-like of scores to float, NaN = missing.

    Every observed entry must be a whole number on the 1-5 scale and every
    item needs at least one observed rating.
    """
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{context} must be a 2D (n_items, n_raters) array with at least one cell")
    observed = ~np.isnan(arr)
    values = arr[observed]
    if not np.all((values == np.round(values)) & (values >= SCORES[0]) & (values <= SCORES[-1])):
        raise ValueError(f"{context} entries must be integers in 1..5 (NaN for missing)")
    if not observed.any(axis=1).all():
        empty = int(np.flatnonzero(~observed.any(axis=1))[0])
        raise ValueError(f"{context}: item {empty} has no ratings")
    return arr
