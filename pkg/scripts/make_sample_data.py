"""Regenerate the bundled sample corpus, registry, and demo transcript.

Everything is seeded, so rerunning this script reproduces data/ exactly.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from divan.scorers import ScoreCache, ScoreRecord

DATA_DIR = Path(__file__).resolve().parents[1] / "data"

METERS = {
    "C2": "فاعلاتن فاعلاتن فاعلن",
    "C4": "فعلاتن فعلاتن فعلن",
    "C8": "مفاعلن فعلاتن مفاعلن فعلن",
    "C9": "مفاعیلن مفاعیلن فعولن",
    "C12": "مفتعلن مفتعلن فاعلن",
    "C13": "مفعول فاعلات مفاعیل فاعلن",
    "R24": "فعلاتن فعلاتن فعلاتن فعلاتن",
    "R34": "مستفعلن مستفعلن مستفعلن مستفعلن",
    "R41": "مفتعلن فاعلن مفتعلن فاعلن",
    "R47": "مفتعلن مفتعلن مفتعلن مفتعلن",
}

RUMI_METERS = ["C2", "C2", "C12", "C12", "R24", "R24", "R34", "R41", "R47", "C13"]
PARVIN_METERS = ["C2", "C4", "C4", "C8", "C9"]

WORDS = [
    "دل", "جان", "عشق", "نور", "شادی", "غم", "یار", "چشم", "راه", "شب",
    "باران", "گل", "باغ", "آسمان", "ستاره", "سخن", "آتش", "دریا", "خورشید", "سحر",
]

# demo-model's fixed opinion of each meter's typical mood
METER_BASE_SCORE = {
    "C2": 3, "C4": 2, "C8": 2, "C9": 3, "C12": 5,
    "C13": 4, "R24": 5, "R34": 4, "R41": 4, "R47": 3,
}


def make_lines(rng: random.Random, n: int) -> list[str]:
    return [" ".join(rng.choice(WORDS) for _ in range(rng.randint(4, 6))) for _ in range(n)]


def main() -> None:
    rng = random.Random(1404)
    DATA_DIR.mkdir(exist_ok=True)

    poems = []
    for poet, meters, repeats in (("Rumi", RUMI_METERS, 3), ("Parvin E'tesami", PARVIN_METERS, 3)):
        prefix = poet.split()[0].lower()
        index = 0
        for meter in meters * repeats:
            index += 1
            poems.append(
                {
                    "id": f"{prefix}-{index:03d}",
                    "poet": poet,
                    "title": f"نمونه {index}",
                    "verses": make_lines(rng, rng.randint(4, 8)),
                    "meter_pattern": METERS[meter],
                }
            )

    with (DATA_DIR / "sample_corpus.jsonl").open("w", encoding="utf-8") as fh:
        for poem in poems:
            fh.write(json.dumps(poem, ensure_ascii=False) + "\n")

    with (DATA_DIR / "sample_registry.jsonl").open("w", encoding="utf-8") as fh:
        for code, pattern in METERS.items():
            fh.write(json.dumps({"meter_pattern": pattern, "meter_code": code}, ensure_ascii=False) + "\n")

    transcript = DATA_DIR / "sample_transcript.jsonl"
    transcript.unlink(missing_ok=True)
    cache = ScoreCache(transcript)
    pattern_to_code = {p: c for c, p in METERS.items()}
    mood = {}
    for i, poem in enumerate(poems):
        base = METER_BASE_SCORE[pattern_to_code[poem["meter_pattern"]]]
        score = min(5, max(1, base + (i % 3) - 1))
        mood[poem["id"]] = score
        for run in range(3):
            cache.append(
                ScoreRecord(
                    poem_id=poem["id"],
                    scorer_id="demo-model",
                    run_index=run,
                    chunk_scores=(score,),
                    final_score=score,
                    raw_responses=(str(score),),
                    timestamp="2026-01-01T00:00:00+00:00",
                )
            )

    # four noisy annotators over the same poems, for the ground-truth demo
    with (DATA_DIR / "sample_annotations.csv").open("w", encoding="utf-8") as fh:
        fh.write("poem_id,rater_id,score\n")
        for poem in poems:
            for rater in ("scholar_1", "scholar_2", "reader_1", "reader_2"):
                score = mood[poem["id"]]
                if rng.random() > 0.7:
                    score = min(5, max(1, score + rng.choice((-1, 1))))
                fh.write(f"{poem['id']},{rater},{score}\n")

    print(f"wrote {len(poems)} poems, {len(METERS)} meters, {len(poems) * 3} transcript records")


if __name__ == "__main__":
    main()
