"""Command-line front-end.

Every subcommand is a thin wrapper over the library: parse flags, call one
or two functions, print. Exit codes: 0 success, 1 usage problems, 2 data or
model errors (bad files, invalid parameters, sampler preconditions).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .bench import load_experiment_config, run_experiment
from .em import EmInit, em_fit
from .empirics import Sample, counts_table, freq_table, freq_table_csv_text, oscillation_empirical
from .ingest import discretize, ingest_series, read_numeric_series, write_sample_csv
from .model import build_model, load_model, oscillation_exact
from .rng import RandomSource
from .sampler import perfect_sample
from .selection import CutParams, bic_select, cut_select, fs_select, fsc_select


class _UsageError(Exception):
    pass


def _parse_lags(text: str) -> tuple:
    """Comma-separated lag list; '-1,-15' and '1,15' both mean {1, 15}."""
    try:
        lags = [abs(int(part)) for part in text.split(",") if part.strip()]
    except ValueError:
        raise _UsageError(f"cannot parse lag list {text!r}") from None
    if not lags:
        raise _UsageError("empty lag list")
    return tuple(lags)


def _fmt(v) -> str:
    return f"{v:.7g}"


def _ctx_label(alphabet, ctx) -> str:
    labels = [alphabet.label(c) for c in ctx]
    sep = "" if all(len(l) == 1 for l in labels) else ","
    return sep.join(labels)


def _load_sample(args) -> Sample:
    column = getattr(args, "column", None)
    return ingest_series(args.sample, column)


def _print_lags(prefix: str, lags) -> None:
    print(f"{prefix}: {' '.join(str(j) for j in lags)}")


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_simulate(args) -> int:
    with open(args.model) as fh:
        spec = json.load(fh)
    src = RandomSource(args.seed)
    model = build_model(
        spec.get("alphabet"),
        spec.get("lags"),
        lambda0=spec.get("lambda0"),
        lambdas=spec.get("lambdas"),
        p0=spec.get("p0"),
        pj=spec.get("pj"),
        single_matrix=bool(spec.get("single_matrix", False)),
        indep_part=bool(spec.get("indep_part", True)),
        rng=src.child("model"),
    )
    sample = perfect_sample(model, args.n, src.child("sample"))
    if args.out is None:
        write_sample_csv(sample, sys.stdout)
    else:
        write_sample_csv(sample, args.out)
    return 0


def _cut_params(args) -> CutParams:
    return CutParams(alpha=args.alpha, mu=args.mu, xi=args.xi)


def _cmd_select(args) -> int:
    sample = _load_sample(args)
    if args.method in ("fs", "fsc") and (args.d is None or args.l is None):
        raise _UsageError(f"--method {args.method} needs --d and --l")
    if args.method in ("cut", "bic") and args.d is None:
        raise _UsageError(f"--method {args.method} needs --d")

    if args.method == "fs":
        res = fs_select(sample, args.d, args.l)
        order_note = "inclusion order"
    elif args.method == "cut":
        S = _parse_lags(args.S) if args.S else None
        res = cut_select(sample, args.d, S, _cut_params(args))
        order_note = "descending"
    elif args.method == "bic":
        S = _parse_lags(args.S) if args.S else None
        res = bic_select(
            sample,
            args.d,
            S,
            minl=args.minl,
            maxl=args.maxl,
            xi=args.xi,
            single_matrix=args.single_matrix,
            indep_part=not args.no_indep,
            byl=args.byl,
            workers=args.workers,
        )
        order_note = "ascending"
    else:
        res = fsc_select(sample, args.d, args.l, _cut_params(args))
        order_note = "descending"

    if args.json:
        print(json.dumps(res.to_dict(), sort_keys=True))
        return 0

    if args.method == "fs":
        for i, step in enumerate(res.diagnostics["steps"], 1):
            print(f"step {i}: lag {step['selected']} (influence {_fmt(step['influence'])})")
        inclusion = [step["selected"] for step in res.diagnostics["steps"]]
        _print_lags(f"selected lags ({order_note})", inclusion)
    elif args.method == "bic":
        print(f"best value: {_fmt(res.diagnostics['best']['value'])}")
        if args.byl:
            for size, entry in sorted(res.diagnostics["by_size"].items()):
                lags = " ".join(str(j) for j in entry["lags"])
                print(f"size {size}: {{{lags}}} value {_fmt(entry['value'])}")
        _print_lags(f"selected lags ({order_note})", res.selected)
    else:
        _print_lags(f"selected lags ({order_note})", res.selected)
    return 0


def _cmd_probs(args) -> int:
    sample = _load_sample(args)
    S = _parse_lags(args.S)
    ft = freq_table(counts_table(sample, max(S)), S)
    if args.out is not None:
        with open(args.out, "w") as fh:
            fh.write(freq_table_csv_text(ft))
        return 0
    A = len(ft.alphabet)
    n_ctx = A ** len(ft.lags)
    if n_ctx <= 10000:
        contexts = (ft.decode(c) for c in range(n_ctx))
    else:
        contexts = ft.contexts()  # too many to enumerate; observed only
    if args.matrix_form:
        labeled = [(_ctx_label(ft.alphabet, ctx), ctx) for ctx in contexts]
        width = max(len(lab) for lab, _ in labeled)
        head = " ".join(f"{ft.alphabet.label(a):>9}" for a in range(A))
        print(f"{'':>{width}} {head}")
        for lab, ctx in labeled:
            row = " ".join(f"{p:>9.7g}" for p in ft.conditional(ctx))
            print(f"{lab:>{width}} {row}")
    else:
        cols = [f"x{j}" for j in sorted(ft.lags, reverse=True)]
        print(" ".join(cols + ["a", "Nxa", "Nx", "p"]))
        for ctx in contexts:
            nx = ft.context_count(ctx)
            cond = ft.conditional(ctx)
            for a in range(A):
                labels = [ft.alphabet.label(c) for c in ctx]
                print(
                    " ".join(labels)
                    + f" {ft.alphabet.label(a)} {ft.count(ctx, a)} {nx} {_fmt(cond[a])}"
                )
    return 0


def _cmd_oscillation(args) -> int:
    if (args.model is None) == (args.sample is None):
        raise _UsageError("give either a model file (--model) or a sample CSV with --S")
    if args.model is not None:
        osc = oscillation_exact(load_model(args.model))
    else:
        if args.S is None:
            raise _UsageError("empirical oscillation needs --S")
        sample = _load_sample(args)
        osc = oscillation_empirical(sample, _parse_lags(args.S))
    for j in sorted(osc):
        print(f"-{j}: {_fmt(osc[j])}")
    return 0


def _flat_init(k: int, A: int) -> EmInit:
    return EmInit(
        np.full(1 + k, 1.0 / (1 + k)),
        np.full(A, 1.0 / A),
        np.full((k, A, A), 1.0 / A),
    )


def _cmd_fit_em(args) -> int:
    sample = _load_sample(args)
    S = _parse_lags(args.S)
    A = len(sample.alphabet)
    if args.init is not None:
        with open(args.init) as fh:
            raw = json.load(fh)
        init = EmInit(np.array(raw["lambdas"]), np.array(raw["p0"]), np.array(raw["pj"]))
    else:
        init = _flat_init(len(S), A)
    if args.M is None or args.M.lower() in ("null", "none"):
        M = None
    else:
        try:
            M = float(args.M)
        except ValueError:
            raise _UsageError(f"--M must be a number or 'null', got {args.M!r}") from None
    res = em_fit(
        sample,
        S,
        init,
        M=M,
        n_iter=args.niter,
        want_oscillations=args.oscillations,
        floor=args.floor,
    )
    if args.json:
        print(json.dumps(res.to_dict(), sort_keys=True))
        return 0
    print(f"lambdas: {' '.join(_fmt(v) for v in res.lambdas)}")
    print(f"p0: {' '.join(_fmt(v) for v in res.p0)}")
    for i, j in enumerate(S):
        print(f"p{j}:")
        for b in range(A):
            print(f"  {sample.alphabet.label(b)}: {' '.join(_fmt(v) for v in res.pj[i, b])}")
    print(f"iterations: {res.iterations}")
    print(f"distlogL: {' '.join(_fmt(v) for v in res.distlogL)}")
    if res.oscillations is not None:
        for j in sorted(res.oscillations):
            print(f"oscillation -{j}: {_fmt(res.oscillations[j])}")
    return 0


def _cmd_discretize(args) -> int:
    series = read_numeric_series(args.input, getattr(args, "column", None))
    sample = discretize(series, args.k)
    lo, hi = float(series.min()), float(series.max())
    cuts = [lo + (hi - lo) * i / args.k for i in range(1, args.k)]
    if args.out is None:
        write_sample_csv(sample, sys.stdout)
        print(f"boundaries: {' '.join(_fmt(c) for c in cuts)}", file=sys.stderr)
    else:
        write_sample_csv(sample, args.out)
        print(f"boundaries: {' '.join(_fmt(c) for c in cuts)}")
    return 0


def _cmd_bench(args) -> int:
    config = load_experiment_config(args.config)
    report = run_experiment(config, workers=args.workers)
    stem = args.out_prefix
    if stem is None:
        base = str(args.config)
        for suffix in (".json", ".toml"):
            if base.endswith(suffix):
                base = base[: -len(suffix)]
        stem = base + "_report"
    report.save(stem + ".csv", stem + ".json")
    print(report.summary_table())
    print(f"report written to {stem}.csv and {stem}.json", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_cut_flags(p) -> None:
    p.add_argument("--alpha", type=float, default=0.05, help="inclusion level (default 0.05)")
    p.add_argument("--mu", type=float, default=1.0, help="concentration constant (default 1)")
    p.add_argument("--xi", type=float, default=0.5, help="threshold scale (default 0.5)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtdkit",
        description="Inference for mixture transition distribution Markov chains.",
    )
    parser.add_argument("--version", action="version", version=f"mtdkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw a stationary sample from a model JSON")
    p.add_argument("model", help="model JSON file (may be partial; missing parts are drawn)")
    p.add_argument("--n", type=int, required=True, help="sample length")
    p.add_argument("--seed", type=int, default=0, help="seed for fill-in and sampling")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("select", help="estimate the relevant lag set from a sample CSV")
    p.add_argument("sample", help="sample CSV (single column, header 'x')")
    p.add_argument("--method", choices=("fs", "cut", "bic", "fsc"), required=True)
    p.add_argument("--column", help="column name or index in the CSV")
    p.add_argument("--d", type=int, help="upper bound on the order")
    p.add_argument("--l", type=int, help="number of lags to pick (fs, fsc)")
    p.add_argument("--S", help="candidate lag list, e.g. 1,5,30 (cut, bic)")
    _add_cut_flags(p)
    p.add_argument("--minl", type=int, default=1, help="smallest set size (bic)")
    p.add_argument("--maxl", type=int, help="largest set size (bic; default minl)")
    p.add_argument("--single-matrix", action="store_true", help="one shared matrix (bic)")
    p.add_argument("--no-indep", action="store_true", help="no independent part (bic)")
    p.add_argument("--byl", action="store_true", help="report the best set per size (bic)")
    p.add_argument("--workers", type=int, default=1, help="parallel workers (bic)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("probs", help="empirical transition probabilities for a lag set")
    p.add_argument("sample")
    p.add_argument("--S", required=True, help="lag list, e.g. 1,15,30")
    p.add_argument("--column")
    p.add_argument("--matrix-form", action="store_true", help="contexts as rows, symbols as columns")
    p.add_argument("--out", help="write the full table as CSV instead of printing")
    p.set_defaults(func=_cmd_probs)

    p = sub.add_parser("oscillation", help="per-lag oscillations, exact or empirical")
    p.add_argument("sample", nargs="?", help="sample CSV (empirical mode)")
    p.add_argument("--model", help="model JSON file (exact mode)")
    p.add_argument("--S", help="lag list for empirical mode")
    p.add_argument("--column")
    p.set_defaults(func=_cmd_oscillation)

    p = sub.add_parser("fit-em", help="EM fit of weights and matrices on a fixed lag set")
    p.add_argument("sample")
    p.add_argument("--S", required=True, help="lag list, e.g. 1,15,30")
    p.add_argument("--column")
    p.add_argument("--init", help="JSON file with lambdas/p0/pj (default: flat)")
    p.add_argument("--M", default="0.01", help="stop threshold, or 'null' (default 0.01)")
    p.add_argument("--niter", type=int, default=100, help="iteration cap (default 100)")
    p.add_argument("--oscillations", action="store_true", help="report fitted oscillations")
    p.add_argument("--floor", type=float, help="probability floor, e.g. 1e-10 (default off)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=_cmd_fit_em)

    p = sub.add_parser("discretize", help="equal-range binning of a numeric series")
    p.add_argument("input", help="numeric CSV")
    p.add_argument("--k", type=int, required=True, help="number of bins")
    p.add_argument("--column")
    p.add_argument("--out", help="output sample CSV (default stdout)")
    p.set_defaults(func=_cmd_discretize)

    p = sub.add_parser("bench", help="run a Monte Carlo estimator comparison")
    p.add_argument("config", help="experiment config (JSON or TOML)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-prefix", help="report file stem (default: config name + _report)")
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except KeyError as exc:
        print(f"error: missing key {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
