"""Command-line pipeline: corpus -> scoring -> metrics -> report files.

Subcommands:

* ``analyze`` -- score a corpus with one or more scorers (cache-aware,
  repeated runs), then emit per-meter statistics, repeat-run reliability,
  and plot-ready TSVs.
* ``ground-truth`` -- aggregate an annotation CSV into gold labels via the
  four strategies and keep the one with the best average QWK.
* ``benchmark`` -- score evaluators (cached scorers and optional human
  annotators) against a ground-truth file.
* ``agree`` -- reliability metrics over an annotation CSV.
* ``synth`` -- seeded synthetic annotation matrices for testing.

Options may come from a ``key=value`` config file (``#`` comments); flags
win over config values. Remote scorers read their API key from the
``DIVAN_API_KEY`` environment variable.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Callable, Sequence

from .aggregation import compare_aggregation_methods, pick_ground_truth
from .agreement import RatingMatrix, fleiss_kappa, krippendorff_alpha, pairwise_mean_qwk
from .benchmark import benchmark_scorers
from .corpus import (
    CorpusError,
    assign_meter_codes,
    group_by_meter,
    load_corpus,
    load_meter_registry,
    meter_sort_key,
    unmatched_meter_patterns,
)
from .meterstats import MeterStats, compute_meter_stats, mean_sentiment, stats_for_group
from .reports import (
    fmt,
    read_ground_truth_csv,
    update_summary,
    write_aggregation_qwk_csv,
    write_annotations_csv,
    write_benchmark_csv,
    write_ds_diagnostics,
    write_ground_truth_csv,
    write_meter_stats_csv,
    write_reliability_csv,
    write_table,
    write_truth_csv,
)
from .scale import modal_score
from .scorers import ScoreCache, ScoringError, score_corpus, scorer_from_spec
from .synthetic import synth_annotations

PLOT_STATISTICS = (
    "mean_sentiment",
    "std_dev",
    "entropy_bits",
    "happy_fraction",
    "polarized_fraction",
    "neutral_fraction",
)


def _load_config_file(path: str | Path) -> dict[str, list[str]]:
    values: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            values.setdefault(key.strip(), []).append(value.strip())
    return values


class _Options:
    """Flag values backed by config-file defaults; flags win."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = _load_config_file(args.config) if getattr(args, "config", None) else {}

    def get(self, name: str, cast: Callable = str, default=None):
        value = getattr(self.args, name, None)
        if value is not None:
            return value
        if name in self.config:
            return cast(self.config[name][-1])
        return default

    def get_list(self, name: str, default: Sequence[str] = ()) -> list[str]:
        value = getattr(self.args, name, None)
        if value:
            return list(value)
        if name in self.config:
            return list(self.config[name])
        return list(default)

    def require(self, name: str, cast: Callable = str):
        value = self.get(name, cast)
        if value is None:
            raise ValueError(f"missing required option --{name.replace('_', '-')}")
        return value


def cmd_analyze(args: argparse.Namespace) -> int:
    opts = _Options(args)
    corpus_path = opts.require("corpus")
    registry_path = opts.require("registry")
    scorer_specs = opts.get_list("scorer")
    if not scorer_specs:
        raise ValueError("analyze needs at least one --scorer")
    runs = opts.get("runs", int, 1)
    min_poems = opts.get("min_poems", int, 15)
    out_dir = Path(opts.get("out", str, "out"))
    temperature = opts.get("temperature", float, 0.0)
    parallelism = opts.get("parallelism", int, 4)
    run_index = opts.get("run_index", int)
    cache_path = Path(opts.get("cache", str, out_dir / "score_cache.jsonl"))
    if runs < 1:
        raise ValueError("--runs must be >= 1")
    if run_index is not None and not 0 <= run_index < runs:
        raise ValueError(f"--run-index must be in 0..{runs - 1}")

    poems = load_corpus(corpus_path)
    if not poems:
        raise CorpusError(f"corpus {corpus_path} contains no poems")
    registry = load_meter_registry(registry_path)
    poems = assign_meter_codes(poems, registry)
    unmatched = unmatched_meter_patterns(poems)
    groups = group_by_meter(poems, min_poems)

    scorers = [scorer_from_spec(spec, default_temperature=temperature) for spec in scorer_specs]
    if len({s.scorer_id for s in scorers}) != len(scorers):
        raise ValueError("scorer ids must be unique")
    cache = ScoreCache(cache_path)

    meter_rows: list = []
    reliability_rows: list[tuple[str, int, int, float]] = []
    plot_stats: dict[str, dict[str, MeterStats]] = {}
    for scorer in scorers:
        records = score_corpus(scorer, poems, runs, cache, parallelism)
        score_of = {(r.poem_id, r.run_index): r.final_score for r in records}

        if runs >= 2:
            run_grid = [[score_of[p.id, r] for r in range(runs)] for p in poems]
            reliability_rows.append((scorer.scorer_id, len(poems), runs, fleiss_kappa(run_grid)))

        variants: list[tuple[str, dict[str, int]]] = [
            (str(r), {p.id: score_of[p.id, r] for p in poems}) for r in range(runs)
        ]
        if run_index is not None:
            consolidated = {p.id: score_of[p.id, run_index] for p in poems}
        else:
            consolidated = {
                p.id: modal_score([score_of[p.id, r] for r in range(runs)]) for p in poems
            }
        variants.append(("consolidated", consolidated))

        for label, by_poem in variants:
            corpus_scores = [by_poem[p.id] for p in poems]
            corpus_mean = mean_sentiment(corpus_scores)
            group_scores = {
                code: [by_poem[p.id] for p in members] for code, members in groups.items()
            }
            stats = compute_meter_stats(group_scores, corpus_mean)
            stats.append(stats_for_group("ALL", corpus_scores, corpus_mean))
            for ms in stats:
                meter_rows.append(({"scorer_id": scorer.scorer_id, "run": label}, ms))
            if label == "consolidated":
                plot_stats[scorer.scorer_id] = {ms.meter_code: ms for ms in stats}

    write_meter_stats_csv(out_dir / "meter_stats.csv", meter_rows)
    write_reliability_csv(out_dir / "reliability.csv", reliability_rows)

    meter_order = sorted(groups, key=meter_sort_key) + ["ALL"]
    scorer_ids = [s.scorer_id for s in scorers]
    for statistic in PLOT_STATISTICS:
        rows = [
            [code] + [fmt(getattr(plot_stats[sid][code], statistic)) for sid in scorer_ids]
            for code in meter_order
        ]
        write_table(
            out_dir / "plots" / f"{statistic}.tsv",
            ["meter_code"] + scorer_ids,
            rows,
            delimiter="\t",
        )

    try:
        # keep summaries byte-stable across output directories
        cache_display = str(cache_path.relative_to(out_dir))
    except ValueError:
        cache_display = str(cache_path)
    summary = {
        "corpus": str(corpus_path),
        "registry": str(registry_path),
        "n_poems": len(poems),
        "n_coded": sum(1 for p in poems if p.meter_code is not None),
        "unmatched_meter_patterns": unmatched,
        "min_poems": min_poems,
        "meters_kept": {code: len(members) for code, members in sorted(groups.items())},
        "scorers": scorer_ids,
        "runs": runs,
        "consolidation": "modal" if run_index is None else f"run:{run_index}",
        "temperature": temperature,
        "cache": cache_display,
        "cache_records": len(cache),
        "reliability": {sid: fmt(k) for sid, _, _, k in reliability_rows},
    }
    update_summary(out_dir, "analyze", summary)
    for sid, _, n_runs, kappa in reliability_rows:
        print(f"{sid}: fleiss kappa over {n_runs} runs = {fmt(kappa)}")
    print(f"analyzed {len(poems)} poems with {len(scorers)} scorer(s); reports in {out_dir}")
    return 0


def cmd_ground_truth(args: argparse.Namespace) -> int:
    opts = _Options(args)
    annotations = opts.require("annotations")
    out_dir = Path(opts.get("out", str, "out"))
    tol = opts.get("tol", float, 1e-6)
    max_iter = opts.get("max_iter", int, 500)

    matrix = RatingMatrix.from_csv(annotations)
    if not matrix.is_complete:
        raise ValueError("ground-truth aggregation needs a complete matrix: every rater rates every poem")
    alpha = krippendorff_alpha(matrix)
    scores, ds = compare_aggregation_methods(matrix, tol=tol, max_iter=max_iter)
    ground_truth = pick_ground_truth(matrix, scores)

    write_ground_truth_csv(out_dir / "ground_truth.csv", ground_truth)
    write_aggregation_qwk_csv(out_dir / "aggregation_qwk.csv", scores, ground_truth.method)
    write_ds_diagnostics(out_dir / "ds_diagnostics.json", ds, matrix.rater_ids)
    update_summary(
        out_dir,
        "ground_truth",
        {
            "annotations": str(annotations),
            "n_items": matrix.n_items,
            "n_raters": matrix.n_raters,
            "krippendorff_alpha_interval": fmt(alpha),
            "method_avg_qwk": {s.method: fmt(s.avg_qwk) for s in scores},
            "selected_method": ground_truth.method,
            "ds_converged": ds.converged_,
            "ds_iterations": ds.n_iter_,
        },
    )
    print(f"krippendorff alpha (interval) = {fmt(alpha)}")
    for s in scores:
        marker = " *" if s.method == ground_truth.method else ""
        print(f"{s.method}: avg qwk = {fmt(s.avg_qwk)}{marker}")
    print(f"ground truth ({ground_truth.method}) written to {out_dir / 'ground_truth.csv'}")
    return 0


def cmd_benchmark(args: argparse.Namespace) -> int:
    opts = _Options(args)
    ground_truth_path = opts.require("ground_truth")
    cache_path = opts.require("cache")
    annotations = opts.get("annotations")
    out_dir = Path(opts.get("out", str, "out"))

    ground_truth = read_ground_truth_csv(ground_truth_path)
    gt_items = list(ground_truth.labels)
    cache = ScoreCache(cache_path)
    if len(cache) == 0:
        raise ValueError(f"score cache {cache_path} is empty")

    evaluators: dict[str, list[int]] = {}
    for scorer_id in cache.scorer_ids():
        per_poem: dict[str, list[tuple[int, int]]] = {}
        for record in cache.records(scorer_id):
            per_poem.setdefault(record.poem_id, []).append((record.run_index, record.final_score))
        missing = [pid for pid in gt_items if pid not in per_poem]
        if missing:
            suffix = " ..." if len(missing) > 5 else ""
            raise ValueError(f"scorer {scorer_id!r} lacks scores for ground-truth poems {missing[:5]}{suffix}")
        evaluators[scorer_id] = [
            modal_score([score for _, score in sorted(per_poem[pid])]) for pid in gt_items
        ]

    if annotations:
        matrix = RatingMatrix.from_csv(annotations)
        lookup = {
            rater: dict(zip(matrix.item_ids, matrix.column(rater))) for rater in matrix.rater_ids
        }
        for rater, column in lookup.items():
            if rater in evaluators:
                raise ValueError(f"annotator id {rater!r} collides with a scorer id in the cache")
            missing = [pid for pid in gt_items if column.get(pid) is None]
            if missing:
                suffix = " ..." if len(missing) > 5 else ""
                raise ValueError(f"annotator {rater!r} lacks ratings for ground-truth poems {missing[:5]}{suffix}")
            evaluators[rater] = [column[pid] for pid in gt_items]  # type: ignore[misc]

    rows = benchmark_scorers(ground_truth, evaluators)
    write_benchmark_csv(out_dir / "benchmark.csv", rows)
    update_summary(
        out_dir,
        "benchmark",
        {
            "ground_truth": str(ground_truth_path),
            "ground_truth_method": ground_truth.method,
            "n_items": len(gt_items),
            "evaluators": {r.evaluator_id: {"qwk": fmt(r.qwk), "accuracy_pct": fmt(r.accuracy_pct)} for r in rows},
        },
    )
    for row in rows:
        print(f"{row.evaluator_id}: qwk = {fmt(row.qwk)}, accuracy = {fmt(row.accuracy_pct)}%")
    return 0


def cmd_agree(args: argparse.Namespace) -> int:
    opts = _Options(args)
    annotations = opts.require("annotations")
    out_dir = Path(opts.get("out", str, "out"))
    difference = opts.get("difference", str, "interval")

    matrix = RatingMatrix.from_csv(annotations)
    alpha = krippendorff_alpha(matrix, difference=difference)
    rows: list[tuple[str, str]] = [
        ("n_items", str(matrix.n_items)),
        ("n_raters", str(matrix.n_raters)),
        (f"krippendorff_alpha_{difference}", fmt(alpha)),
    ]
    if matrix.is_complete and matrix.n_raters >= 2:
        rows.append(("fleiss_kappa", fmt(fleiss_kappa(matrix))))
        rows.append(("pairwise_mean_qwk", fmt(pairwise_mean_qwk(matrix))))
    write_table(out_dir / "agreement.csv", ("metric", "value"), rows)
    update_summary(out_dir, "agree", {"annotations": str(annotations), **dict(rows)})
    for metric, value in rows:
        print(f"{metric} = {value}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    opts = _Options(args)
    n_items = opts.get("items", int, 100)
    n_raters = opts.get("raters", int, 4)
    accuracy = opts.get("accuracy", float, 0.85)
    n_adversarial = opts.get("adversarial", int, 0)
    n_constant = opts.get("constant", int, 0)
    seed = opts.get("seed", int, 0)
    out_dir = Path(opts.get("out", str, "out"))

    matrix, truth = synth_annotations(
        n_items,
        n_raters,
        accuracy=accuracy,
        n_adversarial=n_adversarial,
        n_constant=n_constant,
        seed=seed,
    )
    write_annotations_csv(out_dir / "annotations.csv", matrix)
    write_truth_csv(out_dir / "truth.csv", truth)
    update_summary(
        out_dir,
        "synth",
        {
            "items": n_items,
            "raters": n_raters,
            "accuracy": accuracy,
            "adversarial": n_adversarial,
            "constant": n_constant,
            "seed": seed,
        },
    )
    print(f"wrote {out_dir / 'annotations.csv'} and {out_dir / 'truth.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="divan", description="Sentiment analytics for meter-annotated poetry corpora."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="score a corpus and emit per-meter statistics")
    analyze.add_argument("--config", help="key=value config file; flags win")
    analyze.add_argument("--corpus", help="corpus JSONL path")
    analyze.add_argument("--registry", help="meter registry JSONL path")
    analyze.add_argument(
        "--scorer",
        action="append",
        help="scorer spec 'kind:id[,key=value...]'; repeatable",
    )
    analyze.add_argument("--runs", type=int, help="scoring runs per scorer (default 1)")
    analyze.add_argument("--min-poems", dest="min_poems", type=int, help="meter size threshold (default 15)")
    analyze.add_argument("--out", help="output directory (default ./out)")
    analyze.add_argument("--cache", help="score cache JSONL (default <out>/score_cache.jsonl)")
    analyze.add_argument("--seed", type=int, help="unused by analyze; accepted for shared configs")
    analyze.add_argument("--temperature", type=float, help="default sampling temperature for remote scorers")
    analyze.add_argument("--parallelism", type=int, help="concurrent scoring requests (default 4)")
    analyze.add_argument(
        "--run-index",
        dest="run_index",
        type=int,
        help="use this run's scores instead of modal consolidation",
    )
    analyze.set_defaults(func=cmd_analyze)

    ground_truth = sub.add_parser("ground-truth", help="aggregate annotations into gold labels")
    ground_truth.add_argument("--config")
    ground_truth.add_argument("--annotations", help="CSV with header poem_id,rater_id,score")
    ground_truth.add_argument("--out", help="output directory (default ./out)")
    ground_truth.add_argument("--tol", type=float, help="Dawid-Skene convergence tolerance (default 1e-6)")
    ground_truth.add_argument("--max-iter", dest="max_iter", type=int, help="Dawid-Skene iteration cap (default 500)")
    ground_truth.set_defaults(func=cmd_ground_truth)

    benchmark = sub.add_parser("benchmark", help="evaluate cached scorers against a ground truth")
    benchmark.add_argument("--config")
    benchmark.add_argument("--ground-truth", dest="ground_truth", help="ground_truth.csv path")
    benchmark.add_argument("--cache", help="score cache JSONL")
    benchmark.add_argument("--annotations", help="optional annotation CSV to benchmark humans too")
    benchmark.add_argument("--out", help="output directory (default ./out)")
    benchmark.set_defaults(func=cmd_benchmark)

    agree = sub.add_parser("agree", help="reliability metrics over an annotation CSV")
    agree.add_argument("--config")
    agree.add_argument("--annotations", help="CSV with header poem_id,rater_id,score")
    agree.add_argument("--difference", choices=("interval", "ordinal", "nominal"), help="alpha difference function")
    agree.add_argument("--out", help="output directory (default ./out)")
    agree.set_defaults(func=cmd_agree)

    synth = sub.add_parser("synth", help="generate seeded synthetic annotations")
    synth.add_argument("--config")
    synth.add_argument("--items", type=int, help="number of items (default 100)")
    synth.add_argument("--raters", type=int, help="number of raters (default 4)")
    synth.add_argument("--accuracy", type=float, help="honest-rater accuracy (default 0.85)")
    synth.add_argument("--adversarial", type=int, help="raters answering the mirrored score")
    synth.add_argument("--constant", type=int, help="raters always answering 3")
    synth.add_argument("--seed", type=int, help="RNG seed (default 0)")
    synth.add_argument("--out", help="output directory (default ./out)")
    synth.set_defaults(func=cmd_synth)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CorpusError, ScoringError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
