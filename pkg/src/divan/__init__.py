"""Sentiment analytics for meter-annotated poetry corpora.

Scores poems on the 1-5 ordinal scale via pluggable backends, aggregates
multi-annotator ratings into gold labels, computes inter-rater reliability
metrics, and reports per-meter sentiment statistics.
"""

from .aggregation import (
    DawidSkene,
    GroundTruth,
    MethodScore,
    aggregate_mean,
    aggregate_median,
    aggregate_mode,
    compare_aggregation_methods,
    select_ground_truth,
)
from .agreement import (
    RatingMatrix,
    absolute_accuracy,
    average_qwk,
    fleiss_kappa,
    krippendorff_alpha,
    quadratic_weighted_kappa,
)
from .benchmark import BenchmarkRow, ValidationSample, benchmark_scorers, select_validation_sample
from .corpus import (
    MeterRegistry,
    Poem,
    assign_meter_codes,
    group_by_meter,
    load_corpus,
    load_meter_registry,
    write_corpus,
)
from .meterstats import (
    MeterStats,
    SentimentDistribution,
    compute_meter_stats,
    entropy,
    happy_fraction,
    mean_sentiment,
    polarization,
    sentiment_distribution,
    std_dev,
)
from .scorers import (
    CategoricalScorer,
    ChatCompletionScorer,
    ConstantScorer,
    ReplayScorer,
    ScoreCache,
    ScoreRecord,
    Scorer,
    build_prompt,
    map_categorical_label,
    parse_score_response,
    score_corpus,
    score_poem,
)
from .synthetic import synth_annotations
from .textprep import ChunkSet, WhitespaceTokenizer, chunk_document, combine_chunk_scores, concat_verses

__version__ = "0.1.0"

__all__ = [
    "BenchmarkRow",
    "CategoricalScorer",
    "ChatCompletionScorer",
    "ChunkSet",
    "ConstantScorer",
    "DawidSkene",
    "GroundTruth",
    "MeterRegistry",
    "MeterStats",
    "MethodScore",
    "Poem",
    "RatingMatrix",
    "ReplayScorer",
    "ScoreCache",
    "ScoreRecord",
    "Scorer",
    "SentimentDistribution",
    "ValidationSample",
    "WhitespaceTokenizer",
    "absolute_accuracy",
    "aggregate_mean",
    "aggregate_median",
    "aggregate_mode",
    "assign_meter_codes",
    "average_qwk",
    "benchmark_scorers",
    "build_prompt",
    "chunk_document",
    "combine_chunk_scores",
    "compare_aggregation_methods",
    "compute_meter_stats",
    "concat_verses",
    "entropy",
    "fleiss_kappa",
    "group_by_meter",
    "happy_fraction",
    "krippendorff_alpha",
    "load_corpus",
    "load_meter_registry",
    "map_categorical_label",
    "mean_sentiment",
    "parse_score_response",
    "polarization",
    "quadratic_weighted_kappa",
    "score_corpus",
    "score_poem",
    "select_ground_truth",
    "select_validation_sample",
    "sentiment_distribution",
    "std_dev",
    "synth_annotations",
    "write_corpus",
]
