"""Seeded synthetic annotation matrices with planted truth.

Used by the ``synth`` subcommand and the test suite to exercise the
aggregation and agreement machinery on data whose true labels are known.
"""

from __future__ import annotations

import numpy as np

from .agreement import RatingMatrix
from .scale import NEUTRAL_SCORE, SCORES


def synth_annotations(
    n_items: int,
    n_raters: int,
    *,
    accuracy: float = 0.85,
    n_adversarial: int = 0,
    n_constant: int = 0,
    seed: int = 0,
) -> tuple[RatingMatrix, dict[str, int]]:
    """Generate an items x raters matrix of 1-5 ratings with known truth.

    Honest raters answer the true score with probability ``accuracy`` and
    one of the other four scores uniformly otherwise. Adversarial raters do
    the same about the mirrored score (6 - truth); constant raters always
    answer 3. ``n_adversarial`` and ``n_constant`` are counted inside
    ``n_raters``.
    """
    if n_items < 1 or n_raters < 1:
        raise ValueError("need at least one item and one rater")
    if n_adversarial + n_constant > n_raters:
        raise ValueError("adversarial + constant raters exceed the rater count")
    if not 0.0 <= accuracy <= 1.0:
        raise ValueError("accuracy must be in [0, 1]")

    rng = np.random.default_rng(seed)
    width = max(3, len(str(n_items)))
    item_ids = tuple(f"p{idx + 1:0{width}d}" for idx in range(n_items))
    truth = {item: int(rng.integers(SCORES[0], SCORES[-1] + 1)) for item in item_ids}

    n_honest = n_raters - n_adversarial - n_constant
    rater_ids = (
        [f"annotator_{i + 1:02d}" for i in range(n_honest)]
        + [f"adversary_{i + 1:02d}" for i in range(n_adversarial)]
        + [f"constant_{i + 1:02d}" for i in range(n_constant)]
    )

    def noisy(target: int) -> int:
        if rng.random() < accuracy:
            return target
        others = [s for s in SCORES if s != target]
        return int(others[rng.integers(0, len(others))])

    rows = []
    for item in item_ids:
        t = truth[item]
        row = [noisy(t) for _ in range(n_honest)]
        row += [noisy(SCORES[0] + SCORES[-1] - t) for _ in range(n_adversarial)]
        row += [NEUTRAL_SCORE] * n_constant
        rows.append(tuple(row))
    matrix = RatingMatrix(item_ids=item_ids, rater_ids=tuple(rater_ids), rows=tuple(rows))
    return matrix, truth
