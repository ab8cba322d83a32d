"""The 1-5 ordinal sentiment scale and its shared arithmetic.

Every component of the toolkit trades in integer scores on this scale:
1 = sad, 3 = neutral, 5 = happy, with 2 and 4 as intermediate grades.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from typing import Iterable, Sequence

SCORE_MIN = 1
SCORE_MAX = 5
SCORES: tuple[int, ...] = tuple(range(SCORE_MIN, SCORE_MAX + 1))

HAPPY_SCORES = frozenset({4, 5})
NEUTRAL_SCORE = 3
POLARIZED_SCORES = frozenset({1, 2, 4, 5})


def is_valid_score(value: object) -> bool:
    """True if ``value`` is an integer score on the scale (bools excluded)."""
    return isinstance(value, int) and not isinstance(value, bool) and SCORE_MIN <= value <= SCORE_MAX


def check_score(value: object, *, context: str = "score") -> int:
    if not is_valid_score(value):
        raise ValueError(f"{context} must be an integer in {SCORE_MIN}..{SCORE_MAX}, got {value!r}")
    return value  # type: ignore[return-value]


def check_scores(values: Iterable[object], *, context: str = "scores") -> list[int]:
    out = [check_score(v, context=context) for v in values]
    if not out:
        raise ValueError(f"{context} must be non-empty")
    return out


def clamp_score(value: int) -> int:
    return max(SCORE_MIN, min(SCORE_MAX, value))


def round_half_away_from_zero(value: Fraction | float | int) -> int:
    """Round to the nearest integer, with exact halves moving away from zero.

    Uses exact rational arithmetic so that e.g. a mean of 4.5 always rounds
    to 5 regardless of floating-point representation.
    """
    frac = value if isinstance(value, Fraction) else Fraction(value)
    if frac >= 0:
        return int((2 * frac + 1) // 2)
    return -int((-2 * frac + 1) // 2)


def round_score(value: Fraction | float) -> int:
    """Round a mean-like value half-away-from-zero and clamp onto the scale."""
    return clamp_score(round_half_away_from_zero(value))


def modal_score(scores: Sequence[int]) -> int:
    """Most frequent score, ties resolved to the lower score.

    This is the consolidation rule for repeated scoring runs of one poem.
    """
    checked = check_scores(scores)
    counts = Counter(checked)
    best = max(counts.values())
    return min(s for s, c in counts.items() if c == best)
