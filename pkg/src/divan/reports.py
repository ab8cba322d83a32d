"""Deterministic CSV/TSV/JSON report writers.

All writers emit LF newlines, UTF-8, and fixed six-decimal floats so that
reruns on identical inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .aggregation import DawidSkene, GroundTruth, MethodScore
from .agreement import RatingMatrix
from .benchmark import BenchmarkRow
from .meterstats import MeterStats

METER_STATS_COLUMNS = (
    "meter_code",
    "n_poems",
    "mean_sentiment",
    "std_dev",
    "entropy_bits",
    "happy_fraction",
    "polarized_fraction",
    "neutral_fraction",
)


def fmt(value: float) -> str:
    return f"{value:.6f}"


def write_table(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[str]], *, delimiter: str = ",") -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def meter_stats_row(stats: MeterStats) -> list[str]:
    return [
        stats.meter_code,
        str(stats.n_poems),
        fmt(stats.mean_sentiment),
        fmt(stats.std_dev),
        fmt(stats.entropy_bits),
        fmt(stats.happy_fraction),
        fmt(stats.polarized_fraction),
        fmt(stats.neutral_fraction),
    ]


def write_meter_stats_csv(
    path: str | Path, rows: Sequence[tuple[Mapping[str, str], MeterStats]]
) -> None:
    """Meter-stats CSV; each row may carry leading context columns.

    Every row's context mapping must share the same keys (e.g. scorer, run);
    context columns precede the MeterStats columns.
    """
    extra_cols: tuple[str, ...] = tuple(rows[0][0].keys()) if rows else ()
    header = list(extra_cols) + list(METER_STATS_COLUMNS)
    table = [[extra[c] for c in extra_cols] + meter_stats_row(ms) for extra, ms in rows]
    write_table(path, header, table)


def write_reliability_csv(path: str | Path, rows: Sequence[tuple[str, int, int, float]]) -> None:
    """Per-scorer repeat-run Fleiss' kappa: (scorer_id, n_items, n_runs, kappa)."""
    write_table(
        path,
        ("scorer_id", "n_items", "n_runs", "fleiss_kappa"),
        [(sid, str(n), str(r), fmt(k)) for sid, n, r, k in rows],
    )


def write_ground_truth_csv(path: str | Path, ground_truth: GroundTruth) -> None:
    write_table(
        path,
        ("poem_id", "label", "method"),
        [(pid, str(label), ground_truth.method) for pid, label in ground_truth.labels.items()],
    )


def read_ground_truth_csv(path: str | Path) -> GroundTruth:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != ("poem_id", "label", "method"):
            raise ValueError(f"{path}: expected header poem_id,label,method, got {header}")
        labels: dict[str, int] = {}
        methods: set[str] = set()
        for row in reader:
            if not row:
                continue
            labels[row[0]] = int(row[1])
            methods.add(row[2])
    if not labels:
        raise ValueError(f"{path}: no ground-truth rows")
    if len(methods) != 1:
        raise ValueError(f"{path}: mixed aggregation methods {sorted(methods)}")
    return GroundTruth(method=methods.pop(), labels=labels, selection_score=float("nan"))


def write_aggregation_qwk_csv(path: str | Path, scores: Sequence[MethodScore], selected: str) -> None:
    write_table(
        path,
        ("method", "avg_qwk", "selected"),
        [(s.method, fmt(s.avg_qwk), "yes" if s.method == selected else "no") for s in scores],
    )


def write_benchmark_csv(path: str | Path, rows: Sequence[BenchmarkRow]) -> None:
    write_table(
        path,
        ("evaluator_id", "qwk", "accuracy_pct"),
        [(r.evaluator_id, fmt(r.qwk), fmt(r.accuracy_pct)) for r in rows],
    )


def write_annotations_csv(path: str | Path, matrix: RatingMatrix) -> None:
    rows = []
    for item_id, row in zip(matrix.item_ids, matrix.rows):
        for rater_id, value in zip(matrix.rater_ids, row):
            if value is not None:
                rows.append((item_id, rater_id, str(value)))
    write_table(path, ("poem_id", "rater_id", "score"), rows)


def write_truth_csv(path: str | Path, truth: Mapping[str, int]) -> None:
    write_table(path, ("poem_id", "score"), [(pid, str(s)) for pid, s in truth.items()])


def write_ds_diagnostics(path: str | Path, ds: DawidSkene, rater_ids: Sequence[str]) -> None:
    payload = {
        "converged": ds.converged_,
        "iterations": ds.n_iter_,
        "log_likelihood": ds.log_likelihoods_[-1],
        "class_priors": [round(float(p), 12) for p in ds.class_priors_],
        "confusion_matrices": {
            rater_id: [[round(float(v), 12) for v in row] for row in ds.confusion_matrices_[i]]
            for i, rater_id in enumerate(rater_ids)
        },
    }
    write_json(path, payload)


def write_json(path: str | Path, payload: object) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def update_summary(out_dir: str | Path, section: str, payload: Mapping) -> Path:
    """Merge one command's summary under its own key in ``summary.json``."""
    path = Path(out_dir) / "summary.json"
    summary: dict = {}
    if path.exists():
        with path.open(encoding="utf-8") as fh:
            summary = json.load(fh)
    summary[section] = payload
    write_json(path, summary)
    return path
