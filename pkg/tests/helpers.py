"""Independent oracles for the test suite.

Everything in this module recomputes quantities from first principles with
plain loops, dictionaries, and exact rational arithmetic where it matters.
None of it shares code with the package under test; agreement between the
two is the point of the comparison tests.
"""

from fractions import Fraction
from itertools import combinations
import math

import numpy as np


# ---------------------------------------------------------------------------
# counting oracles
# ---------------------------------------------------------------------------

def naive_window_counts(vals, d):
    """Counts of (d past symbols oldest-first, next symbol) windows."""
    out = {}
    for t in range(d, len(vals)):
        key = (tuple(int(v) for v in vals[t - d:t]), int(vals[t]))
        out[key] = out.get(key, 0) + 1
    return out


def naive_freq(vals, d, S):
    """Context -> {symbol: count}, context ordered oldest lag first."""
    rows = {}
    for t in range(d, len(vals)):
        ctx = tuple(int(vals[t - j]) for j in sorted(S, reverse=True))
        row = rows.setdefault(ctx, {})
        a = int(vals[t])
        row[a] = row.get(a, 0) + 1
    return rows


def naive_conditional(row, n_symbols):
    nbar = sum(row.values())
    return [row.get(a, 0) / nbar for a in range(n_symbols)]


def naive_pairwise(vals, d, S, j):
    """(context over S, symbol at lag j) -> {next symbol: count}."""
    rows = {}
    for t in range(d, len(vals)):
        ctx = tuple(int(vals[t - i]) for i in sorted(S, reverse=True))
        key = (ctx, int(vals[t - j]))
        row = rows.setdefault(key, {})
        a = int(vals[t])
        row[a] = row.get(a, 0) + 1
    return rows


# ---------------------------------------------------------------------------
# lag-influence + forward selection oracles (exact rational arithmetic)
# ---------------------------------------------------------------------------

def naive_influence(vals, d, j, S):
    """Exact influence score of lag j beyond S, as a Fraction."""
    n = len(vals)
    pw = naive_pairwise(vals, d, S, j)
    grouped = {}
    for (ctx, b), row in pw.items():
        grouped.setdefault(ctx, {})[b] = row
    n_symbols = int(max(vals)) + 1
    windows = n - d
    total = Fraction(0)
    for bs in grouped.values():
        nbar = sum(sum(r.values()) for r in bs.values())
        acc = Fraction(0)
        for (bsym, rb), (csym, rc) in combinations(sorted(bs.items()), 2):
            nb, nc = sum(rb.values()), sum(rc.values())
            pb = [Fraction(rb.get(a, 0), nb) for a in range(n_symbols)]
            pc = [Fraction(rc.get(a, 0), nc) for a in range(n_symbols)]
            tv = Fraction(sum(abs(x - y) for x, y in zip(pb, pc)), 2)
            # the (b, c) and (c, b) terms of the double sum are equal
            acc += 2 * Fraction(nb, windows) * Fraction(nc, windows) * tv
        total += acc / Fraction(nbar, windows)
    return total


def naive_fs(vals, d, l):
    """Greedy inclusion with exact scores; ties go to the smallest lag."""
    chosen = []
    scores = []
    for _ in range(l):
        best_j, best_v = None, None
        for j in range(1, d + 1):
            if j in chosen:
                continue
            v = naive_influence(vals, d, j, chosen)
            if best_v is None or v > best_v or (v == best_v and j < best_j):
                best_j, best_v = j, v
        chosen.append(best_j)
        scores.append(best_v)
    return chosen, scores


# ---------------------------------------------------------------------------
# cut oracles
# ---------------------------------------------------------------------------

def naive_threshold(phat, nbar, n_symbols, alpha, mu, xi):
    psi = math.exp(mu) - mu - 1.0
    c = mu / (mu - psi)
    body = sum(math.sqrt(c * (p + alpha / nbar)) for p in phat)
    return math.sqrt(alpha * (1.0 + xi) / (2.0 * nbar)) * body + alpha * n_symbols / (6.0 * nbar)


def naive_cut(vals, d, S, alpha, mu, xi):
    """Retained lags (descending) by exhaustive compatible-pair enumeration."""
    n_symbols = int(max(vals)) + 1
    rows = naive_freq(vals, d, S)
    order = sorted(S, reverse=True)
    retained = set()
    for j in S:
        pos = order.index(j)
        for x, y in combinations(rows.keys(), 2):
            same_elsewhere = all(
                (x[i] == y[i]) == (i != pos) for i in range(len(order))
            )
            if not same_elsewhere:
                continue
            px = naive_conditional(rows[x], n_symbols)
            py = naive_conditional(rows[y], n_symbols)
            tv = sum(abs(a - b) for a, b in zip(px, py)) / 2
            tx = naive_threshold(px, sum(rows[x].values()), n_symbols, alpha, mu, xi)
            ty = naive_threshold(py, sum(rows[y].values()), n_symbols, alpha, mu, xi)
            if tv > tx + ty:
                retained.add(j)
                break
    return tuple(sorted(retained, reverse=True))


# ---------------------------------------------------------------------------
# penalized-likelihood oracles
# ---------------------------------------------------------------------------

def naive_param_count(set_size, n_symbols, single_matrix, indep_part):
    zeta = 1 if single_matrix else set_size
    if indep_part:
        return set_size + (n_symbols - 1) * (1 + n_symbols * zeta)
    return (set_size - 1) + (n_symbols - 1) * n_symbols * zeta


def naive_bic_value(vals, d, S, xi, single_matrix, indep_part):
    n = len(vals)
    rows = naive_freq(vals, d, S)
    ll = 0.0
    for row in rows.values():
        nbar = sum(row.values())
        for c in row.values():
            ll -= c * math.log(c / nbar)
    theta = naive_param_count(len(S), int(max(vals)) + 1, single_matrix, indep_part)
    return ll + theta * math.log(n) * xi


def naive_bic_select(vals, d, universe, minl, maxl, xi, single_matrix, indep_part):
    """Global minimizer over sizes [minl, maxl]; size-then-lex enumeration,
    strict improvement required to displace the incumbent."""
    best_set, best_val = None, None
    for size in range(minl, maxl + 1):
        for cand in combinations(sorted(universe), size):
            v = naive_bic_value(vals, d, cand, xi, single_matrix, indep_part)
            if best_val is None or v < best_val:
                best_set, best_val = cand, v
    return best_set, best_val


# ---------------------------------------------------------------------------
# oscillation oracles
# ---------------------------------------------------------------------------

def naive_oscillation_empirical(vals, S):
    """Max TV gap between observed conditional rows differing only at j."""
    d = max(S)
    n_symbols = int(max(vals)) + 1
    rows = naive_freq(vals, d, S)
    order = sorted(S, reverse=True)
    out = {}
    for j in S:
        pos = order.index(j)
        best = 0.0
        for x, y in combinations(rows.keys(), 2):
            if all((x[i] == y[i]) == (i != pos) for i in range(len(order))):
                px = naive_conditional(rows[x], n_symbols)
                py = naive_conditional(rows[y], n_symbols)
                best = max(best, sum(abs(a - b) for a, b in zip(px, py)) / 2)
        out[j] = best
    return out


def naive_oscillation_from_table(model):
    """Oscillations straight from the definition: max TV distance between
    full transition rows over context pairs differing at one lag only."""
    from mtdkit import transition_table

    tt = transition_table(model)
    lags = sorted(model.lags, reverse=True)  # context order, oldest first
    k = len(lags)
    n_symbols = len(model.alphabet)
    n_rows = n_symbols ** k
    rows = [np.asarray(tt.row(tt.context(i))) for i in range(n_rows)]
    ctxs = [tt.context(i) for i in range(n_rows)]
    out = {}
    for j in model.lags:
        pos = lags.index(j)
        best = 0.0
        for a, b in combinations(range(n_rows), 2):
            x, y = ctxs[a], ctxs[b]
            if all((x[i] == y[i]) == (i != pos) for i in range(k)):
                best = max(best, float(np.abs(rows[a] - rows[b]).sum()) / 2)
        out[j] = best
    return out


# ---------------------------------------------------------------------------
# EM oracles
# ---------------------------------------------------------------------------

def naive_loglik(vals, S, lambdas, p0, pj):
    d = max(S)
    total = 0.0
    for t in range(d, len(vals)):
        a = int(vals[t])
        dens = lambdas[0] * p0[a]
        for i, j in enumerate(sorted(S)):
            dens += lambdas[1 + i] * pj[i][int(vals[t - j])][a]
        total += math.log(dens)
    return total


def naive_em_step(vals, S, lambdas, p0, pj):
    """One E+M update with plain loops; frozen rows on zero denominators."""
    n, d = len(vals), max(S)
    n_symbols = int(max(vals)) + 1
    k = len(S)
    weights = []
    for t in range(d, n):
        a = int(vals[t])
        comps = [lambdas[0] * p0[a]]
        for i, j in enumerate(sorted(S)):
            comps.append(lambdas[1 + i] * pj[i][int(vals[t - j])][a])
        dens = sum(comps)
        weights.append([c / dens for c in comps])
    m = n - d
    new_lam = [sum(w[r] for w in weights) / m for r in range(k + 1)]
    norm = sum(new_lam)
    new_lam = [x / norm for x in new_lam]
    tot0 = sum(w[0] for w in weights)
    if tot0 > 0:
        new_p0 = [
            sum(weights[t - d][0] for t in range(d, n) if vals[t] == a) / tot0
            for a in range(n_symbols)
        ]
    else:
        new_p0 = list(p0)
    new_pj = []
    for i, j in enumerate(sorted(S)):
        mat = []
        for b in range(n_symbols):
            den = sum(weights[t - d][1 + i] for t in range(d, n) if vals[t - j] == b)
            if den > 0:
                mat.append([
                    sum(
                        weights[t - d][1 + i]
                        for t in range(d, n)
                        if vals[t - j] == b and vals[t] == a
                    ) / den
                    for a in range(n_symbols)
                ])
            else:
                mat.append(list(pj[i][b]))
        new_pj.append(mat)
    return new_lam, new_p0, new_pj


# ---------------------------------------------------------------------------
# misc oracles
# ---------------------------------------------------------------------------

def stationary_from_rows(rows):
    """Stationary distribution of a row-stochastic matrix (left eigenvector)."""
    P = np.asarray(rows, dtype=float)
    w, v = np.linalg.eig(P.T)
    pi = np.real(v[:, int(np.argmin(np.abs(w - 1.0)))])
    pi = np.abs(pi)
    return pi / pi.sum()


def frac_confusion(tp, tn, fp, fn):
    """Exact confusion-metric ratios; None where the denominator is zero."""
    def ratio(num, den):
        return Fraction(num, den) if den else None

    total = tp + tn + fp + fn
    accuracy = ratio(tp + tn, total)
    precision = ratio(tp, tp + fp)
    recall = ratio(tp, tp + fn)
    specificity = ratio(tn, tn + fp)
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return {
        "accuracy": accuracy,
        "precision": precision,
        "recall": recall,
        "specificity": specificity,
        "f1": f1,
    }


def naive_target_conditional(vals, m, S, target, n_symbols):
    """Empirical P(a | all lags in S equal `target`) on the first m symbols."""
    d = max(S)
    counts = [0] * n_symbols
    for t in range(d, m):
        if all(vals[t - j] == target for j in S):
            counts[int(vals[t])] += 1
    total = sum(counts)
    if total == 0:
        return [1.0 / n_symbols] * n_symbols, True
    return [c / total for c in counts], False
