"""Relevant-lag estimators for high-order chains over finite alphabets.

Four estimators share the result shape:

* ``fs_select`` -- forward stepwise inclusion by the influence score, for when
  the number of relevant lags is known (or bounded).
* ``cut_select`` -- keeps the lags whose removal provably changes some
  conditional law: a pair of contexts differing only at that lag has
  conditional rows further apart than a concentration threshold.
* ``bic_select`` -- penalized-likelihood search over subsets of a candidate set.
* ``fsc_select`` -- forward stepwise on the first half of the sample, then the
  cut test on the second half to discard the over-selected lags.

Everything here is a pure function of (sample, parameters): repeated calls
return identical results, and the parallel path of ``bic_select`` reduces in
a fixed order so worker count never changes the outcome.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ._parallel import ordered_map, split_chunks
from .empirics import (
    CountsTable,
    Sample,
    _as_lag_tuple,
    _grouped_by_dropped_lag,
    counts_table,
    freq_table,
    pairwise_freq,
    total_variation,
)

DEFAULT_SUBSET_BUDGET = 10**6


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of a lag-selection run.

    ``selected`` is ordered by inclusion for the stepwise methods and by
    decreasing lag for the cut test; for BIC it is the minimizing subset in
    increasing lag order. ``diagnostics`` carries the per-candidate scores
    that produced the decision.
    """

    method: str
    selected: tuple
    diagnostics: dict

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "selected": [int(j) for j in self.selected],
            "diagnostics": _jsonify(self.diagnostics),
        }


# --- forward stepwise ----------------------------------------------------------


def lag_influence(counts: CountsTable, j: int, S=()) -> float:
    """Influence score of candidate lag j on the next symbol, beyond S.

    Pairs of values observed at lag j alongside the same context over S are
    weighted by their joint frequencies and scored by the total-variation
    distance between their empirical next-symbol rows; context scores are
    averaged with the context frequency in the denominator, so rarely seen
    contexts do not drown the signal. Contexts never observed contribute
    nothing. The empty S treats the whole sample as one context.
    """
    S = _as_lag_tuple(S, allow_empty=True)
    pf = pairwise_freq(counts, S, j)
    ft = freq_table(counts, S)
    n_windows = counts.n_windows

    per_ctx: dict = {}
    for (ctx, b), row in pf.rows.items():
        per_ctx.setdefault(ctx, []).append(row)
    total = 0.0
    for ctx, rows in per_ctx.items():
        nbar = int(ft.rows[ctx].sum())
        sums = [int(r.sum()) for r in rows]
        conds = [r / s for r, s in zip(rows, sums)]
        acc = 0.0
        for x in range(len(rows) - 1):
            for y in range(x + 1, len(rows)):
                acc += 2.0 * sums[x] * sums[y] * total_variation(conds[x], conds[y])
        total += acc / (nbar * n_windows)
    return total


def _influence_from_joint(cnt: np.ndarray, n_windows: int) -> float:
    """Influence score from a dense (context, lag value, next symbol) count cube."""
    nb = cnt.sum(axis=2).astype(float)  # (nctx, A)
    nbar = nb.sum(axis=1)
    p = np.divide(
        cnt, nb[:, :, None], out=np.zeros(cnt.shape, dtype=float), where=nb[:, :, None] > 0
    )
    tv = 0.5 * np.abs(p[:, :, None, :] - p[:, None, :, :]).sum(axis=3)
    weighted = (nb[:, :, None] * nb[:, None, :] * tv).sum(axis=(1, 2))
    mask = nbar > 0
    return float((weighted[mask] / nbar[mask]).sum() / n_windows)


def fs_select(sample: Sample, d: int, l: int) -> SelectionResult:
    """Greedy forward selection of l lags out of 1..d by the influence score.

    At each step every remaining candidate is scored given the lags already
    chosen and the maximizer joins the set; ties break toward the smallest
    lag. The result therefore has the prefix property: the first steps of a
    longer run coincide with a shorter run on the same sample.
    """
    n = len(sample)
    if not 1 <= l <= d:
        raise ValueError(f"need 1 <= l <= d, got l={l}, d={d}")
    if d >= n:
        raise ValueError(f"order d={d} must be smaller than the sample length {n}")
    A = len(sample.alphabet)
    vals = sample.values
    idx = np.arange(d, n)
    a_col = vals[idx]
    n_windows = n - d

    cols: dict = {}

    def col(j):
        c = cols.get(j)
        if c is None:
            c = vals[idx - j]
            cols[j] = c
        return c

    # contexts over the chosen set, kept as dense group ids so codes never
    # outgrow int64 no matter how many steps run
    ctx_ids = np.zeros(n_windows, dtype=np.int64)
    nctx = 1
    chosen: list = []
    steps = []
    for _ in range(l):
        best_j = None
        best_v = -math.inf
        scores = {}
        for j in range(1, d + 1):
            if j in chosen:
                continue
            codes = (ctx_ids * A + col(j)) * A + a_col
            cnt = np.bincount(codes, minlength=nctx * A * A).reshape(nctx, A, A)
            v = _influence_from_joint(cnt, n_windows)
            scores[j] = v
            if v > best_v:  # scanning j ascending, so ties keep the smallest lag
                best_v, best_j = v, j
        chosen.append(best_j)
        steps.append({"scores": scores, "selected": best_j, "influence": best_v})
        _, ctx_ids = np.unique(ctx_ids * A + col(best_j), return_inverse=True)
        nctx = int(ctx_ids.max()) + 1
    return SelectionResult("fs", tuple(chosen), {"d": d, "l": l, "steps": steps})


# --- cut test -------------------------------------------------------------------


def _psi(mu: float) -> float:
    return math.exp(mu) - mu - 1.0


@dataclass(frozen=True)
class CutParams:
    """Tuning constants of the cut test threshold.

    ``alpha`` scales the whole threshold (larger alpha cuts more), ``mu`` is
    the Bernstein-type tilt (must keep mu > psi(mu), i.e. mu below ~1.256)
    and ``xi`` the slack exponent weight.
    """

    alpha: float = 0.05
    mu: float = 1.0
    xi: float = 0.5

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not 0 < self.mu < 3:
            raise ValueError(f"mu must lie in (0, 3), got {self.mu}")
        if not self.mu - _psi(self.mu) > 0:
            raise ValueError(
                f"mu={self.mu} violates mu > exp(mu) - mu - 1; use mu < ~1.2564"
            )
        if not self.xi > 0:
            raise ValueError(f"xi must be > 0, got {self.xi}")


def _threshold_from_row(phat: np.ndarray, nbar: int, A: int, params: CutParams) -> float:
    c = params.mu / (params.mu - _psi(params.mu))
    return (
        math.sqrt(params.alpha * (1.0 + params.xi) / (2.0 * nbar))
        * float(np.sqrt(c * (phat + params.alpha / nbar)).sum())
        + params.alpha * A / (6.0 * nbar)
    )


def cut_threshold(freq, context, params: CutParams | None = None) -> float:
    """Concentration radius of the empirical conditional row at a context.

    Two contexts whose rows differ by more than the sum of their radii are
    deemed genuinely different by the cut test.
    """
    params = params if params is not None else CutParams()
    nbar = freq.context_count(context)
    if nbar == 0:
        raise ValueError("cut threshold is undefined for a context never observed")
    phat = freq.conditional(context)
    return _threshold_from_row(phat, nbar, len(freq.alphabet), params)


def cut_select(
    sample: Sample,
    d: int,
    S=None,
    params: CutParams | None = None,
) -> SelectionResult:
    """Keep the lags of S whose removal visibly changes some conditional law.

    Lag j survives when some pair of observed contexts over S, equal
    everywhere but at j, has empirical conditional rows further apart in
    total variation than the sum of their concentration thresholds. Pairs
    involving an unobserved context are never formed. ``selected`` lists the
    survivors by decreasing lag; diagnostics record, per lag, the largest
    margin (distance minus threshold sum) over the pairs examined.
    """
    params = params if params is not None else CutParams()
    n = len(sample)
    if S is None:
        S = range(1, d + 1)
    S = _as_lag_tuple(S)
    if S[-1] > d:
        raise ValueError(f"lag {S[-1]} exceeds the order d={d}")
    if d >= n:
        raise ValueError(f"order d={d} must be smaller than the sample length {n}")
    A = len(sample.alphabet)
    ft = freq_table(counts_table(sample, d), S)

    cond = {}
    thr = {}
    for code, row in ft.rows.items():
        nbar = int(row.sum())
        p = row / nbar
        cond[code] = p
        thr[code] = _threshold_from_row(p, nbar, A, params)

    lag_report = {}
    retained = []
    for idx, j in enumerate(ft.lags):
        best = None
        for group in _grouped_by_dropped_lag(ft, idx).values():
            if len(group) < 2:
                continue
            for x in range(len(group) - 1):
                cx = group[x][1]
                for y in range(x + 1, len(group)):
                    cy = group[y][1]
                    margin = total_variation(cond[cx], cond[cy]) - (thr[cx] + thr[cy])
                    if best is None or margin > best:
                        best = margin
        keep = best is not None and best > 0
        lag_report[j] = {"retained": keep, "max_margin": best}
        if keep:
            retained.append(j)
    selected = tuple(sorted(retained, reverse=True))
    diagnostics = {
        "d": d,
        "S": list(S),
        "alpha": params.alpha,
        "mu": params.mu,
        "xi": params.xi,
        "lags": lag_report,
    }
    return SelectionResult("cut", selected, diagnostics)


# --- BIC ------------------------------------------------------------------------


def _theta(s: int, A: int, single_matrix: bool, indep_part: bool) -> int:
    """Free-parameter count of an MTD model with s lags over an alphabet of size A."""
    zeta = 1 if single_matrix else s
    if indep_part:
        return s + (A - 1) * (1 + A * zeta)
    return (s - 1) + (A - 1) * A * zeta


def bic_value(
    counts: CountsTable,
    S,
    xi: float = 0.5,
    *,
    single_matrix: bool = False,
    indep_part: bool = True,
) -> float:
    """Penalized log-likelihood score of the lag subset S (smaller is better).

    The likelihood term plugs the empirical conditional frequencies over S
    into the observed window counts; the penalty is theta(S) * log(n) * xi
    with theta the free-parameter count of the corresponding MTD model.
    """
    S = _as_lag_tuple(S)
    if S[-1] > counts.d:
        raise ValueError(f"lag {S[-1]} exceeds the table order d={counts.d}")
    ft = freq_table(counts, S)
    ll = 0.0
    for row in ft.rows.values():
        nbar = row.sum()
        nz = row[row > 0]
        ll += float((nz * np.log(nz / nbar)).sum())
    pen = _theta(len(S), len(counts.alphabet), single_matrix, indep_part)
    return -ll + pen * math.log(counts.n) * xi


def _bic_eval_chunk(args):
    """Evaluate the BIC score of each subset in one chunk (worker function)."""
    vals, A, d, n, subsets, xi, single_matrix, indep_part = args
    idx = np.arange(d, n)
    a_col = vals[idx]
    logn = math.log(n)
    cols: dict = {}
    out = []
    cap = (1 << 62) // (A * A)
    for sub in subsets:
        ids = None
        span = 1
        for j in reversed(sub):  # oldest lag most significant
            c = cols.get(j)
            if c is None:
                c = vals[idx - j]
                cols[j] = c
            if ids is None:
                ids = c.astype(np.int64)
                span = A
            else:
                if span > cap:
                    uniq, ids = np.unique(ids, return_inverse=True)
                    span = len(uniq)
                ids = ids * A + c
                span *= A
        cells, cell_counts = np.unique(ids * A + a_col, return_counts=True)
        _, ctx_inv = np.unique(cells // A, return_inverse=True)
        nbar = np.bincount(ctx_inv, weights=cell_counts)
        cc = cell_counts.astype(float)
        ll = float((cc * np.log(cc)).sum() - (nbar * np.log(nbar)).sum())
        pen = _theta(len(sub), A, single_matrix, indep_part)
        out.append(-ll + pen * logn * xi)
    return out


def bic_select(
    sample: Sample,
    d: int,
    S=None,
    minl: int = 1,
    maxl: int | None = None,
    xi: float = 0.5,
    *,
    single_matrix: bool = False,
    indep_part: bool = True,
    byl: bool = False,
    budget: int = DEFAULT_SUBSET_BUDGET,
    workers: int = 1,
) -> SelectionResult:
    """Exhaustive BIC minimization over subsets of the candidate lags S.

    All subsets of size minl..maxl are scored (sizes ascending, subsets in
    lexicographic order within a size) and the minimizer wins; ties keep the
    earlier-enumerated subset. The enumeration refuses to start when the
    subset count exceeds ``budget``. With ``byl`` the diagnostics also list
    the best subset of every size. ``workers`` > 1 fans the evaluation out
    over processes; results are merged in enumeration order, so the outcome
    is identical at any worker count.
    """
    n = len(sample)
    if S is None:
        S = range(1, d + 1)
    S = _as_lag_tuple(S)
    if S[-1] > d:
        raise ValueError(f"lag {S[-1]} exceeds the order d={d}")
    if d >= n:
        raise ValueError(f"order d={d} must be smaller than the sample length {n}")
    maxl = minl if maxl is None else maxl
    if not 1 <= minl <= maxl <= len(S):
        raise ValueError(
            f"need 1 <= minl <= maxl <= |S|, got minl={minl}, maxl={maxl}, |S|={len(S)}"
        )
    total = sum(math.comb(len(S), l) for l in range(minl, maxl + 1))
    if total > budget:
        raise ValueError(
            f"{total} candidate subsets exceed the enumeration budget of {budget}"
        )
    subsets = [c for l in range(minl, maxl + 1) for c in combinations(S, l)]

    if workers > 1:
        chunks = split_chunks(subsets, workers)
        args = [
            (sample.values, len(sample.alphabet), d, n, ch, xi, single_matrix, indep_part)
            for ch in chunks
        ]
        values = [v for part in ordered_map(_bic_eval_chunk, args, workers) for v in part]
    else:
        values = _bic_eval_chunk(
            (sample.values, len(sample.alphabet), d, n, subsets, xi, single_matrix, indep_part)
        )

    best_i = 0
    for i in range(1, len(values)):
        if values[i] < values[best_i]:
            best_i = i
    by_size = {}
    if byl:
        for i, (sub, v) in enumerate(zip(subsets, values)):
            l = len(sub)
            if l not in by_size or v < by_size[l][1]:
                by_size[l] = (sub, v)
    diagnostics = {
        "d": d,
        "S": list(S),
        "xi": xi,
        "single_matrix": single_matrix,
        "indep_part": indep_part,
        "values": [{"lags": list(sub), "value": v} for sub, v in zip(subsets, values)],
        "best": {"lags": list(subsets[best_i]), "value": values[best_i]},
    }
    if byl:
        diagnostics["by_size"] = {
            l: {"lags": list(sub), "value": v} for l, (sub, v) in sorted(by_size.items())
        }
    return SelectionResult("bic", subsets[best_i], diagnostics)


# --- split combination ------------------------------------------------------------


def fsc_select(
    sample: Sample,
    d: int,
    l: int,
    params: CutParams | None = None,
) -> SelectionResult:
    """Forward stepwise on the first half of the sample, cut test on the rest.

    The stepwise stage over-selects l lags from the chronologically first
    floor(n/2) observations; the cut stage then prunes that set using only
    the remaining observations, so the two decisions never share data.
    """
    n = len(sample)
    half = n // 2
    if half <= d or (n - half) <= d:
        raise ValueError(
            f"sample of length {n} is too short to split for order d={d}; "
            f"need both halves longer than d"
        )
    first = Sample(sample.values[:half], sample.alphabet)
    second = Sample(sample.values[half:], sample.alphabet)
    fs = fs_select(first, d, l)
    cut = cut_select(second, d, S=fs.selected, params=params)
    diagnostics = {
        "split_at": half,
        "fs": {"selected": list(fs.selected), **fs.diagnostics},
        "cut": {"selected": list(cut.selected), **cut.diagnostics},
    }
    return SelectionResult("fsc", cut.selected, diagnostics)
