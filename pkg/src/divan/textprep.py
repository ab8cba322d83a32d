"""Poem-to-model text preparation.

Verses are concatenated into a single document, the document is split into
token-bounded chunks when it exceeds a scorer's input limit, and per-chunk
scores are recombined into one poem score (mean, rounded to the nearest
integer).

Chunking is lossless: the chunk strings concatenate back to the document
byte-for-byte, and no chunk holds more than the token limit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Protocol, Sequence

from fractions import Fraction

from .corpus import Poem
from .scale import check_scores, round_score

DEFAULT_SEPARATOR = "\n"


class Tokenizer(Protocol):
    """Deterministic text -> token-span mapping used for length accounting."""

    name: str

    def spans(self, text: str) -> list[tuple[int, int]]:
        """(start, end) index pairs of the tokens of ``text``, in order."""
        ...


class WhitespaceTokenizer:
    """Counts whitespace-delimited words; the default length model.

    Scorer adapters may substitute a model-specific tokenizer with the
    same interface.
    """

    name = "whitespace"
    _token = re.compile(r"\S+")

    def spans(self, text: str) -> list[tuple[int, int]]:
        return [m.span() for m in self._token.finditer(text)]

    def count(self, text: str) -> int:
        return sum(1 for _ in self._token.finditer(text))


@dataclass(frozen=True)
class ChunkSet:
    """Ordered, lossless partition of one poem's unified document."""

    poem_id: str
    chunks: tuple[str, ...]
    token_counts: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.chunks)


def concat_verses(poem: Poem, separator: str = DEFAULT_SEPARATOR) -> str:
    """Join the poem's verse lines, in order, into one document."""
    return separator.join(poem.verses)


def chunk_document(
    doc: str,
    max_tokens: int,
    tokenizer: Tokenizer | None = None,
    *,
    poem_id: str = "",
    separator: str = DEFAULT_SEPARATOR,
) -> ChunkSet:
    """Greedy left-to-right split of ``doc`` into chunks of <= max_tokens.

    Each chunk takes the longest token prefix that fits; when the window
    must be cut short of the document end, the cut prefers the last verse
    separator inside the window so verses stay intact, falling back to a
    hard cut after the window's final token. A document that fits (or an
    empty one) yields a single chunk.
    """
    if max_tokens < 1:
        raise ValueError("max_tokens must be >= 1")
    tok = tokenizer or WhitespaceTokenizer()
    spans = tok.spans(doc)
    if len(spans) <= max_tokens:
        return ChunkSet(poem_id=poem_id, chunks=(doc,), token_counts=(len(spans),))

    chunks: list[str] = []
    counts: list[int] = []
    start_tok = 0  # index of first token of the current chunk
    cut_pos = 0  # character offset where the current chunk begins
    n = len(spans)
    while start_tok < n:
        end_tok = min(start_tok + max_tokens, n)  # exclusive
        if end_tok == n:
            chunk = doc[cut_pos:]
            chunks.append(chunk)
            counts.append(n - start_tok)
            break
        # Candidate cut points are the gaps after tokens start_tok..end_tok-1;
        # prefer the last gap inside the window containing the separator.
        break_tok = end_tok
        for k in range(end_tok - 1, start_tok, -1):
            gap = doc[spans[k - 1][1] : spans[k][0]]
            if separator in gap:
                break_tok = k
                break
        next_cut = spans[break_tok][0]
        chunks.append(doc[cut_pos:next_cut])
        counts.append(break_tok - start_tok)
        cut_pos = next_cut
        start_tok = break_tok
    return ChunkSet(poem_id=poem_id, chunks=tuple(chunks), token_counts=tuple(counts))


def combine_chunk_scores(scores: Sequence[int]) -> int:
    """Mean of the chunk scores, rounded half-away-from-zero, clamped to 1..5."""
    checked = check_scores(scores, context="chunk scores")
    return round_score(Fraction(sum(checked), len(checked)))
