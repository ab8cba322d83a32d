"""Inter-rater reliability and rater-vs-truth metrics for ordinal 1-5 ratings.

The metric functions take item-major rating grids (or two aligned rating
lists) and return chance-corrected agreement coefficients:

* ``fleiss_kappa`` -- multi-rater agreement, categories treated as nominal;
  used to measure run-to-run repeatability of a scorer.
* ``krippendorff_alpha`` -- reliability tolerant of missing cells, with a
  difference function that weighs how far apart two scores are (a 1-vs-5
  disagreement counts more than 4-vs-5).
* ``quadratic_weighted_kappa`` -- two-rater kappa with squared-distance
  weights; ``average_qwk`` averages it over a panel of raters.
* ``absolute_accuracy`` -- percentage of exact matches.

All coefficients equal exactly 1.0 under perfect agreement.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .scale import SCORES, is_valid_score
from .validation import check_equal_length, check_rating_rows

DIFFERENCE_FUNCTIONS = ("interval", "ordinal", "nominal")

ANNOTATION_CSV_HEADER = ("poem_id", "rater_id", "score")


@dataclass(frozen=True)
class RatingMatrix:
    """Items x raters grid of optional 1-5 scores."""

    item_ids: tuple[str, ...]
    rater_ids: tuple[str, ...]
    rows: tuple[tuple[int | None, ...], ...]

    def __post_init__(self) -> None:
        if len(self.item_ids) != len(self.rows):
            raise ValueError("item_ids and rows disagree on item count")
        if len(set(self.item_ids)) != len(self.item_ids):
            raise ValueError("duplicate item ids")
        if len(set(self.rater_ids)) != len(self.rater_ids):
            raise ValueError("duplicate rater ids")
        check_rating_rows(self.rows, allow_missing=True, min_raters=1, context="rating matrix")
        if len(self.rows[0]) != len(self.rater_ids):
            raise ValueError("rater_ids and rows disagree on rater count")

    @property
    def n_items(self) -> int:
        return len(self.item_ids)

    @property
    def n_raters(self) -> int:
        return len(self.rater_ids)

    @property
    def is_complete(self) -> bool:
        return all(None not in row for row in self.rows)

    def column(self, rater_id: str) -> list[int | None]:
        j = self.rater_ids.index(rater_id)
        return [row[j] for row in self.rows]

    def to_array(self) -> np.ndarray:
        """Float array with NaN for missing cells."""
        return np.array(
            [[np.nan if v is None else float(v) for v in row] for row in self.rows], dtype=float
        )

    @classmethod
    def from_records(cls, records: Iterable[tuple[str, str, int]]) -> "RatingMatrix":
        """Build from (item_id, rater_id, score) triples.

        Item and rater order follow first appearance; duplicate
        (item, rater) pairs are rejected.
        """
        item_ids: list[str] = []
        rater_ids: list[str] = []
        cells: dict[tuple[str, str], int] = {}
        for item_id, rater_id, score in records:
            if not is_valid_score(score):
                raise ValueError(f"rating for ({item_id!r}, {rater_id!r}) must be in 1..5, got {score!r}")
            key = (item_id, rater_id)
            if key in cells:
                raise ValueError(f"duplicate rating for item {item_id!r} by rater {rater_id!r}")
            cells[key] = score
            if item_id not in item_ids:
                item_ids.append(item_id)
            if rater_id not in rater_ids:
                rater_ids.append(rater_id)
        if not cells:
            raise ValueError("no ratings given")
        rows = tuple(
            tuple(cells.get((item, rater)) for rater in rater_ids) for item in item_ids
        )
        return cls(item_ids=tuple(item_ids), rater_ids=tuple(rater_ids), rows=rows)

    @classmethod
    def from_csv(cls, path: str | Path) -> "RatingMatrix":
        """Read an annotation CSV with header ``poem_id,rater_id,score``."""
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != ANNOTATION_CSV_HEADER:
                raise ValueError(
                    f"{path}: expected header {','.join(ANNOTATION_CSV_HEADER)}, got {header}"
                )
            records = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 3:
                    raise ValueError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
                try:
                    score = int(row[2])
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: score {row[2]!r} is not an integer") from None
                records.append((row[0], row[1], score))
        return cls.from_records(records)


def _as_rows(data: "RatingMatrix | Sequence[Sequence[int | None]]") -> tuple[tuple[int | None, ...], ...]:
    if isinstance(data, RatingMatrix):
        return data.rows
    return tuple(tuple(row) for row in data)


def fleiss_kappa(data: "RatingMatrix | Sequence[Sequence[int]]", categories: Sequence[int] = SCORES) -> float:
    """Fleiss' kappa over a complete grid, categories treated as nominal.

    kappa = (P_bar - Pe_bar) / (1 - Pe_bar). Perfect agreement returns
    exactly 1.0, including the degenerate all-one-category case where the
    chance term saturates.
    """
    rows = check_rating_rows(_as_rows(data), allow_missing=False, min_raters=2, context="fleiss_kappa")
    n_raters = len(rows[0])
    index = _category_index(categories)
    totals = [0] * len(categories)
    p_i_sum = 0.0
    for row in rows:
        counts = [0] * len(categories)
        for value in row:
            counts[index[value]] += 1
        p_i_sum += (sum(c * c for c in counts) - n_raters) / (n_raters * (n_raters - 1))
        for i, c in enumerate(counts):
            totals[i] += c
    p_bar = p_i_sum / len(rows)
    if p_bar == 1.0:
        return 1.0
    grand = len(rows) * n_raters
    pe_bar = sum((t / grand) ** 2 for t in totals)
    return (p_bar - pe_bar) / (1.0 - pe_bar)


def _category_index(categories: Sequence[int]) -> dict[int, int]:
    if categories is SCORES:
        return _SCORE_INDEX
    return {c: i for i, c in enumerate(categories)}


def _difference_table(difference: str, categories: Sequence[int], marginals: Sequence[float]) -> list[list[float]]:
    if categories is SCORES and difference in _DEFAULT_DELTA:
        return _DEFAULT_DELTA[difference]
    k = len(categories)
    if difference == "interval":
        return [[float(categories[c] - categories[j]) ** 2 for j in range(k)] for c in range(k)]
    if difference == "nominal":
        return [[0.0 if c == j else 1.0 for j in range(k)] for c in range(k)]
    table = [[0.0] * k for _ in range(k)]
    for c in range(k):
        for j in range(c + 1, k):
            span = sum(marginals[c : j + 1])
            table[c][j] = table[j][c] = (span - (marginals[c] + marginals[j]) / 2.0) ** 2
    return table


_SCORE_INDEX = {c: i for i, c in enumerate(SCORES)}
_DEFAULT_DELTA = {
    "interval": [[float(c - j) ** 2 for j in SCORES] for c in SCORES],
    "nominal": [[0.0 if c == j else 1.0 for j in SCORES] for c in SCORES],
}


def krippendorff_alpha(
    data: "RatingMatrix | Sequence[Sequence[int | None]]",
    difference: str = "interval",
    categories: Sequence[int] = SCORES,
) -> float:
    """Krippendorff's alpha via the coincidence-matrix formulation.

    Missing cells are allowed; items with fewer than two ratings carry no
    pairable values and are ignored. ``difference`` selects the disagreement
    metric: squared score distance (``interval``, the default), the ordinal
    metric, or binary mismatch (``nominal``).
    """
    if difference not in DIFFERENCE_FUNCTIONS:
        raise ValueError(f"difference must be one of {DIFFERENCE_FUNCTIONS}, got {difference!r}")
    rows = check_rating_rows(_as_rows(data), allow_missing=True, min_raters=1, context="krippendorff_alpha")
    index = _category_index(categories)
    k = len(categories)
    coincidence = [[0.0] * k for _ in range(k)]
    n_pairable = 0
    for row in rows:
        values = [v for v in row if v is not None]
        m = len(values)
        if m < 2:
            continue
        n_pairable += m
        weight = 1.0 / (m - 1)
        for a, b in combinations(values, 2):
            ia, ib = index[a], index[b]
            coincidence[ia][ib] += weight
            coincidence[ib][ia] += weight
    if n_pairable < 2:
        raise ValueError("krippendorff_alpha: fewer than 2 pairable values")

    marginals = [sum(coincidence[c]) for c in range(k)]
    delta = _difference_table(difference, categories, marginals)

    d_obs = 0.0
    d_exp = 0.0
    for c in range(k):
        row_delta = delta[c]
        row_coincidence = coincidence[c]
        m_c = marginals[c]
        for j in range(k):
            if c == j:
                continue
            d = row_delta[j]
            d_obs += row_coincidence[j] * d
            d_exp += m_c * marginals[j] * d
    d_obs /= n_pairable
    d_exp /= n_pairable * (n_pairable - 1)
    if d_obs == 0.0:
        return 1.0
    if d_exp == 0.0:
        raise ValueError("krippendorff_alpha: zero expected disagreement with observed disagreement")
    return 1.0 - d_obs / d_exp


def quadratic_weighted_kappa(
    a: Sequence[int], b: Sequence[int], categories: Sequence[int] = SCORES
) -> float:
    """Cohen's kappa with quadratic weights w_ij = (i-j)^2 / (K-1)^2.

    Computed as 1 - O/E where O is the observed weighted disagreement and E
    the disagreement expected from the two raters' marginals. Two identical
    constant raters agree perfectly and score 1.0.
    """
    check_equal_length(a, b, context="quadratic_weighted_kappa")
    index = _category_index(categories)
    k = len(categories)
    denom = float((k - 1) ** 2)
    n = len(a)
    counts = [[0] * k for _ in range(k)]
    for x, y in zip(a, b):
        if not (is_valid_score(x) and is_valid_score(y)):
            raise ValueError(f"quadratic_weighted_kappa: ratings must be integers in 1..5, got {x!r}, {y!r}")
        counts[index[x]][index[y]] += 1
    row_marg = [sum(counts[i]) / n for i in range(k)]
    col_marg = [sum(counts[i][j] for i in range(k)) / n for j in range(k)]
    observed = 0.0
    expected = 0.0
    for i in range(k):
        for j in range(k):
            w = (i - j) ** 2 / denom
            observed += w * counts[i][j] / n
            expected += w * row_marg[i] * col_marg[j]
    if observed == 0.0:
        return 1.0
    if expected == 0.0:
        raise ValueError("quadratic_weighted_kappa: zero expected disagreement with observed disagreement")
    return 1.0 - observed / expected


def average_qwk(candidate: Sequence[int], raters: Sequence[Sequence[int]]) -> float:
    """Mean quadratic weighted kappa of ``candidate`` against each rater."""
    if not raters:
        raise ValueError("average_qwk: need at least one rater")
    return sum(quadratic_weighted_kappa(candidate, r) for r in raters) / len(raters)


def pairwise_mean_qwk(data: "RatingMatrix | Sequence[Sequence[int]]") -> float:
    """Mean QWK over all unordered rater pairs of a complete grid."""
    rows = check_rating_rows(_as_rows(data), allow_missing=False, min_raters=2, context="pairwise_mean_qwk")
    columns = list(zip(*rows))
    pairs = list(combinations(range(len(columns)), 2))
    return sum(quadratic_weighted_kappa(columns[i], columns[j]) for i, j in pairs) / len(pairs)


def absolute_accuracy(pred: Sequence[int], truth: Sequence[int]) -> float:
    """Percentage of positions where the two rating lists agree exactly."""
    check_equal_length(pred, truth, context="absolute_accuracy")
    matches = sum(1 for x, y in zip(pred, truth) if x == y)
    return 100.0 * matches / len(pred)
