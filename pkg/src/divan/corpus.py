"""Poetry corpus ingestion: JSON Lines records, meter codes, meter grouping.

A corpus file holds one poem per line with keys ``id``, ``poet``, ``title``,
``verses``, ``meter_pattern`` and optional ``meter_code``. Meter codes follow
the alphanumeric convention ``[CRP]<index>``: C for meters common to both
poets, R and P for meters exclusive to one of them.
"""

from __future__ import annotations

import json
import logging
import re
import unicodedata
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping

log = logging.getLogger(__name__)

METER_CODE_RE = re.compile(r"^[CRP][1-9][0-9]*$")

CORPUS_FORMATS = ("jsonl",)


class CorpusError(ValueError):
    """Malformed corpus or registry input."""


@dataclass(frozen=True)
class Poem:
    """One corpus record. Immutable and safe to share across threads."""

    id: str
    poet: str
    title: str
    verses: tuple[str, ...]
    meter_pattern: str
    meter_code: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise CorpusError("poem id must be non-empty")
        if not self.verses:
            raise CorpusError(f"poem {self.id!r}: verses must be non-empty")
        for i, line in enumerate(self.verses):
            if not line.strip():
                raise CorpusError(f"poem {self.id!r}: verse {i} is empty")
        if self.meter_code is not None and not METER_CODE_RE.match(self.meter_code):
            raise CorpusError(
                f"poem {self.id!r}: meter_code {self.meter_code!r} does not match [CRP]<index>"
            )


def normalize_meter_pattern(pattern: str) -> str:
    """Canonical form used for registry lookups: NFC, trimmed, single spaces."""
    return re.sub(r"\s+", " ", unicodedata.normalize("NFC", pattern).strip())


@dataclass(frozen=True)
class MeterRegistry:
    """Mapping from normalized meter pattern to its alphanumeric code."""

    entries: Mapping[str, str]

    def __post_init__(self) -> None:
        seen_codes: dict[str, str] = {}
        for pattern, code in self.entries.items():
            if not METER_CODE_RE.match(code):
                raise CorpusError(f"meter code {code!r} does not match [CRP]<index>")
            if code in seen_codes:
                raise CorpusError(f"meter code {code!r} assigned to more than one pattern")
            seen_codes[code] = pattern

    def __len__(self) -> int:
        return len(self.entries)

    def code_for(self, pattern: str) -> str | None:
        return self.entries.get(normalize_meter_pattern(pattern))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "MeterRegistry":
        entries: dict[str, str] = {}
        for pattern, code in pairs:
            key = normalize_meter_pattern(pattern)
            if key in entries and entries[key] != code:
                raise CorpusError(f"meter pattern {pattern!r} mapped to both {entries[key]!r} and {code!r}")
            entries[key] = code
        return cls(entries=entries)


def _poem_from_record(record: dict, lineno: int) -> Poem:
    try:
        verses = record["verses"]
        if not isinstance(verses, list) or not all(isinstance(v, str) for v in verses):
            raise CorpusError(f"line {lineno}: 'verses' must be an array of strings")
        return Poem(
            id=str(record["id"]),
            poet=str(record.get("poet", "")),
            title=str(record.get("title", "")),
            verses=tuple(verses),
            meter_pattern=str(record.get("meter_pattern", "")),
            meter_code=record.get("meter_code"),
        )
    except KeyError as exc:
        raise CorpusError(f"line {lineno}: missing key {exc.args[0]!r}") from None
    except CorpusError as exc:
        raise CorpusError(f"line {lineno}: {exc}") from None


def load_corpus(path: str | Path, fmt: str = "jsonl") -> list[Poem]:
    """Load and validate a corpus file, preserving record order.

    Raises CorpusError on malformed records (with line number), duplicate
    ids, or empty verse lists.
    """
    if fmt not in CORPUS_FORMATS:
        raise CorpusError(f"unknown corpus format {fmt!r}; expected one of {CORPUS_FORMATS}")
    poems: list[Poem] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            poem = _poem_from_record(record, lineno)
            if poem.id in seen:
                raise CorpusError(f"line {lineno}: duplicate poem id {poem.id!r}")
            seen.add(poem.id)
            poems.append(poem)
    return poems


def write_corpus(poems: Iterable[Poem], path: str | Path) -> None:
    """Write poems as JSON Lines; inverse of load_corpus."""
    with open(path, "w", encoding="utf-8") as fh:
        for poem in poems:
            record: dict = {
                "id": poem.id,
                "poet": poem.poet,
                "title": poem.title,
                "verses": list(poem.verses),
                "meter_pattern": poem.meter_pattern,
            }
            if poem.meter_code is not None:
                record["meter_code"] = poem.meter_code
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_meter_registry(path: str | Path) -> MeterRegistry:
    """Load a JSON Lines registry with keys ``meter_pattern``, ``meter_code``."""
    pairs: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                pairs.append((str(record["meter_pattern"]), str(record["meter_code"])))
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            except KeyError as exc:
                raise CorpusError(f"line {lineno}: missing key {exc.args[0]!r}") from None
    if not pairs:
        raise CorpusError(f"meter registry {path} is empty")
    return MeterRegistry.from_pairs(pairs)


def assign_meter_codes(poems: Iterable[Poem], registry: MeterRegistry) -> list[Poem]:
    """Attach registry codes by exact normalized-pattern lookup.

    Poems whose pattern is not registered keep meter_code absent; their
    patterns are logged. Idempotent: already-correct codes are untouched.
    """
    if len(registry) == 0:
        raise CorpusError("meter registry is empty")
    out: list[Poem] = []
    unmatched: set[str] = set()
    for poem in poems:
        code = registry.code_for(poem.meter_pattern)
        if code is None:
            unmatched.add(normalize_meter_pattern(poem.meter_pattern))
            out.append(replace(poem, meter_code=None) if poem.meter_code is not None else poem)
        elif poem.meter_code == code:
            out.append(poem)
        else:
            out.append(replace(poem, meter_code=code))
    if unmatched:
        log.warning("%d meter pattern(s) not in registry: %s", len(unmatched), sorted(unmatched))
    return out


def unmatched_meter_patterns(poems: Iterable[Poem]) -> list[str]:
    """Normalized patterns of poems that ended up without a meter code."""
    return sorted({normalize_meter_pattern(p.meter_pattern) for p in poems if p.meter_code is None})


def group_by_meter(poems: Iterable[Poem], min_count: int = 15) -> dict[str, list[Poem]]:
    """Group coded poems by meter code, dropping groups below ``min_count``.

    Poems without a meter code are excluded. The threshold is inclusive:
    a meter with exactly ``min_count`` poems is kept.
    """
    if min_count < 0:
        raise ValueError("min_count must be >= 0")
    groups: dict[str, list[Poem]] = {}
    for poem in poems:
        if poem.meter_code is not None:
            groups.setdefault(poem.meter_code, []).append(poem)
    return {code: members for code, members in groups.items() if len(members) >= min_count}


def meter_sort_key(code: str) -> tuple[str, int]:
    """Sort meters by prefix class then numeric index (C2 before C10)."""
    match = re.match(r"^([CRP])([0-9]+)$", code)
    if match is None:
        return (code, 0)
    return (match.group(1), int(match.group(2)))
