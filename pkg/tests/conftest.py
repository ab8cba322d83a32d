from __future__ import annotations

import json
from pathlib import Path

import pytest

from divan.corpus import Poem
from divan.scorers import ScoreCache, ScoreRecord

METER_PATTERNS = {
    "C2": "فاعلاتن فاعلاتن فاعلن",
    "C12": "مفتعلن مفتعلن فاعلن",
    "R24": "فعلاتن فعلاتن فعلاتن فعلاتن",
    "R34": "مستفعلن مستفعلن مستفعلن مستفعلن",
}


def make_poem(index: int, meter_code: str = "C2", n_verses: int = 3) -> Poem:
    return Poem(
        id=f"poem-{index:03d}",
        poet="Rumi",
        title=f"Ghazal {index}",
        verses=tuple(f"دل و جان verse {v} of poem {index}" for v in range(n_verses)),
        meter_pattern=METER_PATTERNS[meter_code],
        meter_code=None,
    )


def build_fixture_poems(n: int = 24) -> list[Poem]:
    """Deterministic corpus cycling through four meters."""
    codes = list(METER_PATTERNS)
    return [make_poem(i, codes[i % len(codes)]) for i in range(n)]


def fixture_score(poem_id: str) -> int:
    """Stable per-poem score in 1..5, independent of the run index."""
    return int(poem_id.split("-")[1]) % 5 + 1


@pytest.fixture
def corpus_files(tmp_path: Path) -> tuple[Path, Path]:
    """Write a 24-poem corpus and its meter registry; returns (corpus, registry)."""
    corpus_path = tmp_path / "corpus.jsonl"
    registry_path = tmp_path / "registry.jsonl"
    with corpus_path.open("w", encoding="utf-8") as fh:
        for poem in build_fixture_poems():
            record = {
                "id": poem.id,
                "poet": poem.poet,
                "title": poem.title,
                "verses": list(poem.verses),
                "meter_pattern": poem.meter_pattern,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    with registry_path.open("w", encoding="utf-8") as fh:
        for code, pattern in METER_PATTERNS.items():
            fh.write(
                json.dumps({"meter_pattern": pattern, "meter_code": code}, ensure_ascii=False) + "\n"
            )
    return corpus_path, registry_path


def write_transcript(
    path: Path, poems: list[Poem], scorer_id: str = "replay-model", runs: int = 3
) -> Path:
    """Record a deterministic scorer's transcript: same score every run."""
    cache = ScoreCache(path)
    for poem in poems:
        score = fixture_score(poem.id)
        for run in range(runs):
            cache.append(
                ScoreRecord(
                    poem_id=poem.id,
                    scorer_id=scorer_id,
                    run_index=run,
                    chunk_scores=(score,),
                    final_score=score,
                    raw_responses=(str(score),),
                    timestamp="2026-01-01T00:00:00+00:00",
                )
            )
    return path


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    outcome = "PASS" if report.passed else "FAIL"
    print(f"\n[acceptance] {outcome} {name}", flush=True)
