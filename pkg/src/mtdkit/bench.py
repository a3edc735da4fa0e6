"""Monte Carlo comparison of lag estimators, plus prediction-quality metrics.

The experiment: draw replications from a known MTD model, truncate each one
to several prefix lengths, and measure how far each estimator's conditional
at a fixed target context lands from the true conditional. Estimators are
the stepwise selector, a fixed-window naive set, and an oracle that picks
the best subset using knowledge of the truth.

Replications are independent and run in parallel; every replication draws
from its own child stream of the base seed and results are reduced in
replication order, so reports are byte-identical at any worker count.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ._parallel import ordered_map
from .empirics import Sample, FreqTable, total_variation
from .model import (
    MtdModel,
    build_model,
    model_from_dict,
    model_to_dict,
    transition_table,
)
from .rng import RandomSource
from .sampler import perfect_sample
from .selection import fs_select

DEFAULT_ORACLE_BUDGET = 10**6

_METRIC_ORDER = ("mean", "mean_std", "sd", "se", "q1", "med", "q3", "fallbacks")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a benchmark run depends on, in one picklable bundle.

    The generator model may be partial (weights or matrices omitted); the
    missing pieces are drawn once from ``model_seed`` so that every
    replication sees the same generator.
    """

    alphabet: tuple
    lags: tuple
    lambda0: float | None = None
    lambdas: tuple | None = None
    p0: tuple | None = None
    pj: tuple | None = None
    model_seed: int | None = None
    n_rep: int = 100
    sample_len: int = 10000
    m_list: tuple = (1000, 2000, 5000, 10000)
    fs_d: int | None = None
    fs_l: int | None = None
    naive_order: int | None = None
    oracle_size: int | None = None
    oracle_d: int | None = None
    target_symbol: str | None = None
    target_next: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_rep < 1:
            raise ValueError(f"n_rep must be >= 1, got {self.n_rep}")
        if not self.m_list:
            raise ValueError("m_list must not be empty")
        for m in self.m_list:
            if m > self.sample_len:
                raise ValueError(f"prefix length {m} exceeds sample_len {self.sample_len}")
        if not self.estimators():
            raise ValueError("no estimator enabled: set fs_d/fs_l, naive_order or oracle_size")
        if (self.fs_d is None) != (self.fs_l is None):
            raise ValueError("fs_d and fs_l must be given together")
        if self.oracle_size is not None and self.oracle_d is None and self.fs_d is None:
            raise ValueError("oracle needs oracle_d (or fs_d to borrow)")

    def estimators(self) -> tuple:
        roster = []
        if self.fs_d is not None:
            roster.append("fs")
        if self.naive_order is not None:
            roster.append("naive")
        if self.oracle_size is not None:
            roster.append("oracle")
        return tuple(roster)

    def build_generator(self) -> MtdModel:
        rng = None if self.model_seed is None else RandomSource(self.model_seed)
        return build_model(
            list(self.alphabet),
            list(self.lags),
            lambda0=self.lambda0,
            lambdas=None if self.lambdas is None else list(self.lambdas),
            p0=None if self.p0 is None else list(self.p0),
            pj=None if self.pj is None else np.array(self.pj),
            rng=rng,
        )


_CONFIG_KEYS = {
    "alphabet", "lags", "lambda0", "lambdas", "p0", "pj", "model_seed",
    "n_rep", "sample_len", "m_list", "fs_d", "fs_l", "naive_order",
    "oracle_size", "oracle_d", "target_symbol", "target_next", "seed",
}

_TUPLE_KEYS = ("alphabet", "lags", "lambdas", "p0", "m_list")


def load_experiment_config(path) -> ExperimentConfig:
    """Read a config from a flat JSON or TOML file (extension decides)."""
    text_path = str(path)
    if text_path.endswith(".toml"):
        try:
            import tomllib  # py >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    else:
        with open(path) as fh:
            raw = json.load(fh)
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "alphabet" not in raw or "lags" not in raw:
        raise ValueError("config must give at least 'alphabet' and 'lags'")
    for key in _TUPLE_KEYS:
        if raw.get(key) is not None:
            raw[key] = tuple(raw[key])
    if raw.get("pj") is not None:
        raw["pj"] = tuple(tuple(tuple(r) for r in mat) for mat in raw["pj"])
    raw["alphabet"] = tuple(str(a) for a in raw["alphabet"])
    return ExperimentConfig(**raw)


def _target_conditional(vals, m, S, tgt, A):
    """Empirical next-symbol distribution after the all-`tgt` context over S,
    within the first m observations. Returns (probs, used_uniform_fallback)."""
    d = max(S)
    mask = np.ones(m - d, dtype=bool)
    for j in S:
        mask &= vals[d - j : m - j] == tgt
    nctx = int(np.count_nonzero(mask))
    if nctx == 0:
        return np.full(A, 1.0 / A), True
    counts = np.bincount(vals[d:m][mask], minlength=A)
    return counts / nctx, False


def _oracle_set(vals, m, d, size, tgt, A, true_row):
    """Exhaustive argmin of d_TV(estimate, truth) over size-`size` subsets of
    1..d. Ties go to the lexicographically earliest subset."""
    T = vals[:m] == tgt
    sym = [vals[:m] == a for a in range(A)]
    best_set = None
    best_tv = math.inf
    for sub in combinations(range(1, d + 1), size):
        dd = sub[-1]
        mask = T[dd - sub[0] : m - sub[0]].copy()
        for j in sub[1:]:
            mask &= T[dd - j : m - j]
        nctx = int(np.count_nonzero(mask))
        if nctx == 0:
            cond = np.full(A, 1.0 / A)
        else:
            counts = np.array(
                [np.count_nonzero(mask & sym[a][dd:m]) for a in range(A)], dtype=float
            )
            cond = counts / nctx
        tv = total_variation(cond, true_row)
        if tv < best_tv:
            best_tv = tv
            best_set = sub
    return best_set


def _run_replication(args):
    """One replication: sample, run every estimator at every prefix length.

    Module-level so process pools can pick it up. Returns a list of
    (estimator, m, delta, delta_std, fallback, selected) tuples.
    """
    (model_dict, cfg, rep) = args
    model = model_from_dict(model_dict)
    A = len(model.alphabet)
    tgt = model.alphabet.index(cfg["target_symbol"])
    a0 = model.alphabet.index(cfg["target_next"])

    tt = transition_table(model)
    true_row = tt.row((tgt,) * len(model.lags))
    p_true = float(true_row[a0])
    std_div = float(true_row.min())

    rng = RandomSource(cfg["seed"]).child(rep)
    sample = perfect_sample(model, cfg["sample_len"], rng)
    vals = sample.values

    out = []
    for m in cfg["m_list"]:
        selections = {}
        if cfg["fs_d"] is not None:
            selections["fs"] = fs_select(sample.head(m), cfg["fs_d"], cfg["fs_l"]).selected
        if cfg["naive_order"] is not None:
            selections["naive"] = tuple(range(1, cfg["naive_order"] + 1))
        if cfg["oracle_size"] is not None:
            d = cfg["oracle_d"] if cfg["oracle_d"] is not None else cfg["fs_d"]
            selections["oracle"] = _oracle_set(
                vals, m, d, cfg["oracle_size"], tgt, A, true_row
            )
        for est in cfg["estimators"]:
            S = selections[est]
            cond, fallback = _target_conditional(vals, m, S, tgt, A)
            delta = abs(float(cond[a0]) - p_true)
            out.append((est, m, delta, delta / std_div, fallback, S))
    return out


@dataclass(frozen=True)
class MetricsReport:
    """Aggregated estimator errors, plus the raw per-replication values."""

    estimators: tuple
    m_list: tuple
    n_rep: int
    stats: dict = field(repr=False)  # (estimator, m) -> {metric: value}
    raw: dict = field(repr=False)  # (estimator, m) -> {"delta": [...], ...}

    def to_csv_text(self) -> str:
        lines = ["estimator,m,metric,value"]
        for est in self.estimators:
            for m in self.m_list:
                cell = self.stats[(est, m)]
                for metric in _METRIC_ORDER:
                    lines.append(f"{est},{m},{metric},{cell[metric]!r}")
        return "\n".join(lines) + "\n"

    def to_json_text(self) -> str:
        payload = {
            "n_rep": self.n_rep,
            "m_list": list(self.m_list),
            "estimators": list(self.estimators),
            "stats": {
                est: {str(m): self.stats[(est, m)] for m in self.m_list}
                for est in self.estimators
            },
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def save(self, csv_path, json_path) -> None:
        with open(csv_path, "w") as fh:
            fh.write(self.to_csv_text())
        with open(json_path, "w") as fh:
            fh.write(self.to_json_text())

    def summary_table(self) -> str:
        header = "estimator       m       mean   mean_std         se  fallbacks"
        lines = [header]
        for est in self.estimators:
            for m in self.m_list:
                c = self.stats[(est, m)]
                lines.append(
                    f"{est:<9} {m:>7} {c['mean']:>10.7g} {c['mean_std']:>10.7g} "
                    f"{c['se']:>10.7g} {c['fallbacks']:>10d}"
                )
        return "\n".join(lines)

    def mean_delta(self, estimator: str, m: int) -> float:
        return self.stats[(estimator, m)]["mean"]


def _aggregate(rows, estimators, m_list, n_rep) -> MetricsReport:
    raw = {(e, m): {"delta": [], "delta_std": [], "fallback": [], "sets": []}
           for e in estimators for m in m_list}
    for est, m, delta, delta_std, fallback, S in rows:
        cell = raw[(est, m)]
        cell["delta"].append(delta)
        cell["delta_std"].append(delta_std)
        cell["fallback"].append(bool(fallback))
        cell["sets"].append(tuple(S))
    stats = {}
    for key, cell in raw.items():
        d = np.array(cell["delta"])
        ds = np.array(cell["delta_std"])
        sd = float(d.std(ddof=1)) if d.size > 1 else 0.0
        q1, med, q3 = (float(q) for q in np.quantile(d, [0.25, 0.5, 0.75]))
        stats[key] = {
            "mean": float(d.mean()),
            "mean_std": float(ds.mean()),
            "sd": sd,
            "se": sd / math.sqrt(d.size),
            "q1": q1,
            "med": med,
            "q3": q3,
            "fallbacks": int(sum(cell["fallback"])),
        }
    return MetricsReport(tuple(estimators), tuple(m_list), n_rep, stats, raw)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> MetricsReport:
    """Run the full replication grid and aggregate the errors."""
    model = config.build_generator()
    if config.oracle_size is not None:
        d = config.oracle_d if config.oracle_d is not None else config.fs_d
        n_subsets = math.comb(d, config.oracle_size)
        if n_subsets > DEFAULT_ORACLE_BUDGET:
            raise ValueError(
                f"oracle search over {n_subsets} subsets exceeds the budget "
                f"{DEFAULT_ORACLE_BUDGET}"
            )
    cfg = {
        "m_list": tuple(config.m_list),
        "estimators": config.estimators(),
        "fs_d": config.fs_d,
        "fs_l": config.fs_l,
        "naive_order": config.naive_order,
        "oracle_size": config.oracle_size,
        "oracle_d": config.oracle_d,
        "target_symbol": (
            config.target_symbol if config.target_symbol is not None
            else model.alphabet.label(0)
        ),
        "target_next": (
            config.target_next if config.target_next is not None
            else model.alphabet.label(0)
        ),
        "sample_len": config.sample_len,
        "seed": config.seed,
    }
    model_dict = model_to_dict(model)
    items = [(model_dict, cfg, rep) for rep in range(config.n_rep)]
    rows = []
    for res in ordered_map(_run_replication, items, workers=workers):
        rows.extend(res)
    return _aggregate(rows, config.estimators(), cfg["m_list"], config.n_rep)


# ---------------------------------------------------------------------------
# prediction quality


@dataclass(frozen=True)
class ConfusionMetrics:
    """Binary confusion counts and the usual derived rates.

    Undefined ratios (0/0) come out as nan rather than raising.
    """

    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float
    precision: float
    recall: float
    specificity: float
    f1: float

    def to_dict(self) -> dict:
        return {
            "tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn,
            "accuracy": self.accuracy, "precision": self.precision,
            "recall": self.recall, "specificity": self.specificity, "f1": self.f1,
        }


def _ratio(num, den):
    return num / den if den else math.nan


def classification_metrics(predicted: Sample, actual: Sample, positive) -> ConfusionMetrics:
    """Confusion counts of `predicted` against `actual`, treating `positive`
    as the positive label and everything else as negative."""
    if len(predicted) != len(actual):
        raise ValueError(
            f"length mismatch: {len(predicted)} predictions vs {len(actual)} actuals"
        )
    pos_p = predicted.alphabet.index(positive)
    pos_a = actual.alphabet.index(positive)
    pp = predicted.values == pos_p
    aa = actual.values == pos_a
    tp = int(np.count_nonzero(pp & aa))
    tn = int(np.count_nonzero(~pp & ~aa))
    fp = int(np.count_nonzero(pp & ~aa))
    fn = int(np.count_nonzero(~pp & aa))
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    if math.isnan(precision) or math.isnan(recall) or precision + recall == 0:
        f1 = math.nan
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return ConfusionMetrics(
        tp, tn, fp, fn,
        accuracy=_ratio(tp + tn, tp + tn + fp + fn),
        precision=precision,
        recall=recall,
        specificity=_ratio(tn, tn + fp),
        f1=f1,
    )


def predict_sample(freq: FreqTable, sample: Sample) -> tuple[Sample, Sample]:
    """Most-likely-next-symbol predictions over a held-out sample.

    Every position t >= d is predicted from the sample's own history through
    the conditional distribution of ``freq`` (uniform where the context was
    never seen in training, in which case the first symbol wins the argmax
    tie). Returns (predicted, actual), aligned and equal-length.
    """
    d = freq.d
    vals = sample.values
    n = vals.size
    if n <= d:
        raise ValueError(f"sample of length {n} has no position with a depth-{d} history")
    preds = np.empty(n - d, dtype=np.int64)
    by_depth = sorted(freq.lags, reverse=True)  # context tuples go oldest lag first
    for t in range(d, n):
        ctx = tuple(int(vals[t - j]) for j in by_depth)
        preds[t - d] = int(np.argmax(freq.conditional(ctx)))
    predicted = Sample(preds, sample.alphabet)
    actual = Sample(vals[d:].copy(), sample.alphabet)
    return predicted, actual
