"""Inference for mixture transition distribution (MTD) Markov chains.

Exact model construction, perfect stationary sampling, relevant-lag
selection (stepwise influence, pairwise-threshold cut, penalized
likelihood), EM parameter fitting, and a seeded Monte Carlo benchmark.
"""

__version__ = "0.1.0"

from .bench import (
    ConfusionMetrics,
    ExperimentConfig,
    MetricsReport,
    classification_metrics,
    load_experiment_config,
    predict_sample,
    run_experiment,
)
from .em import EmInit, EmResult, em_fit, mtd_log_likelihood
from .empirics import (
    CountsTable,
    FreqTable,
    PairwiseFreqTable,
    Sample,
    counts_table,
    freq_table,
    freq_table_csv,
    freq_table_csv_text,
    oscillation_empirical,
    pairwise_freq,
    total_variation,
)
from .ingest import (
    discretize,
    ingest_series,
    read_numeric_series,
    sample_csv_text,
    write_sample_csv,
)
from .model import (
    Alphabet,
    LagSet,
    MtdModel,
    TransitionTable,
    build_model,
    load_model,
    model_from_dict,
    model_to_dict,
    oscillation_exact,
    save_model,
    transition_table,
)
from .rng import RandomSource, fresh_source
from .sampler import forward_sample, perfect_sample, perfect_sample_detailed
from .selection import (
    CutParams,
    SelectionResult,
    bic_select,
    bic_value,
    cut_select,
    cut_threshold,
    fs_select,
    fsc_select,
    lag_influence,
)

__all__ = [
    "__version__",
    "Alphabet",
    "ConfusionMetrics",
    "CountsTable",
    "CutParams",
    "EmInit",
    "EmResult",
    "ExperimentConfig",
    "FreqTable",
    "LagSet",
    "MetricsReport",
    "MtdModel",
    "PairwiseFreqTable",
    "RandomSource",
    "Sample",
    "SelectionResult",
    "TransitionTable",
    "bic_select",
    "bic_value",
    "build_model",
    "classification_metrics",
    "counts_table",
    "cut_select",
    "cut_threshold",
    "discretize",
    "em_fit",
    "forward_sample",
    "freq_table",
    "freq_table_csv",
    "freq_table_csv_text",
    "fresh_source",
    "fs_select",
    "fsc_select",
    "ingest_series",
    "lag_influence",
    "load_experiment_config",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "mtd_log_likelihood",
    "oscillation_empirical",
    "oscillation_exact",
    "pairwise_freq",
    "perfect_sample",
    "perfect_sample_detailed",
    "predict_sample",
    "read_numeric_series",
    "run_experiment",
    "sample_csv_text",
    "save_model",
    "total_variation",
    "transition_table",
    "write_sample_csv",
]
