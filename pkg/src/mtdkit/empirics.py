"""Window counts and empirical conditional probabilities over lag subsets.

Estimation never materializes the full context space: count tables are hash
maps keyed by dense base-|A| integer codes, so memory tracks the number of
windows actually observed even when the order d is comparable to the sample
length. Window codes put the oldest symbol in the most significant digit,
which makes the digit with exponent j the symbol at lag j.

A context over a lag subset S is always written oldest lag first; with
S = {1, 15, 30} the context (1, 1, 0) means symbol 1 at lag 30, symbol 1 at
lag 15 and symbol 0 at lag 1, matching the row labels of transition tables.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .model import Alphabet


def total_variation(p, q) -> float:
    """Total variation distance between two distributions on the same alphabet."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return 0.5 * float(np.abs(p - q).sum())


@dataclass(frozen=True, eq=False)
class Sample:
    """A categorical time series, chronologically ordered (oldest first).

    ``values`` holds alphabet indices; use :meth:`from_labels` / :meth:`labels`
    to cross the label boundary.
    """

    values: np.ndarray
    alphabet: Alphabet

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.int64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("a sample must be a non-empty 1-d sequence")
        if arr.min() < 0 or arr.max() >= len(self.alphabet):
            raise ValueError("sample values must be valid alphabet indices")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return int(self.values.size)

    @classmethod
    def from_labels(cls, labels, alphabet: Alphabet | None = None) -> "Sample":
        labels = list(labels)
        if alphabet is None:
            alphabet = Alphabet(sorted(set(labels), key=repr))
        return cls(np.array([alphabet.index(s) for s in labels]), alphabet)

    def labels(self) -> list:
        return [self.alphabet.label(int(v)) for v in self.values]

    def head(self, m: int) -> "Sample":
        """The chronologically first m observations."""
        if not 1 <= m <= len(self):
            raise ValueError(f"prefix length {m} outside 1..{len(self)}")
        return Sample(self.values[:m], self.alphabet)


def _as_lag_tuple(S, *, allow_empty=False) -> tuple:
    lags = [int(j) for j in S]
    if not lags and not allow_empty:
        raise ValueError("lag subset must be non-empty")
    if any(j < 1 for j in lags):
        raise ValueError(f"lags must be >= 1, got {lags}")
    if len(set(lags)) != len(lags):
        raise ValueError(f"duplicate lags in {lags}")
    return tuple(sorted(lags))


class CountsTable:
    """Occurrence counts of all length-(d+1) windows of a sample.

    A window at time t covers (X_{t-d}, ..., X_t); there are n - d of them.
    Counts are exact integers; ``n_windows`` is the shared divisor that turns
    them into empirical probabilities.
    """

    __slots__ = ("alphabet", "d", "n", "entries")

    def __init__(self, alphabet: Alphabet, d: int, n: int, entries: dict):
        self.alphabet = alphabet
        self.d = d
        self.n = n
        self.entries = entries

    @property
    def n_windows(self) -> int:
        return self.n - self.d

    def count(self, window) -> int:
        """Count of a window given as symbol indices, oldest first."""
        window = tuple(window)
        if len(window) != self.d + 1:
            raise ValueError(f"window must have length {self.d + 1}")
        A = len(self.alphabet)
        code = 0
        for v in window:
            code = code * A + int(v)
        return self.entries.get(code, 0)


def counts_table(sample: Sample, d: int) -> CountsTable:
    """Count every (d+1)-window of the sample.

    Runs in O(n) with a rolling base-|A| code; only observed windows are
    stored, so d may be close to n.
    """
    n = len(sample)
    if not 1 <= d < n:
        raise ValueError(f"order d must satisfy 1 <= d < n, got d={d}, n={n}")
    A = len(sample.alphabet)
    vals = sample.values.tolist()
    code = 0
    for v in vals[: d + 1]:
        code = code * A + v
    mod = A**d
    entries = {code: 1}
    get = entries.get
    for v in vals[d + 1 :]:
        code = (code % mod) * A + v
        entries[code] = get(code, 0) + 1
    return CountsTable(sample.alphabet, d, n, entries)


class FreqTable:
    """Counts and conditional next-symbol frequencies for contexts over S.

    Rows exist for observed contexts only; unseen contexts read as the
    uniform row with count zero. Probabilities are computed from integer
    counts at access time, never stored.
    """

    __slots__ = ("alphabet", "lags", "d", "n", "rows")

    def __init__(self, alphabet, lags, d, n, rows):
        self.alphabet = alphabet
        self.lags = lags  # increasing tuple, possibly empty
        self.d = d
        self.n = n
        self.rows = rows  # context code -> int64 ndarray of per-symbol counts

    @property
    def n_windows(self) -> int:
        return self.n - self.d

    def encode(self, context) -> int:
        """Context (symbol indices, oldest lag first) -> base-|A| code."""
        context = tuple(context)
        if len(context) != len(self.lags):
            raise ValueError(f"context must have {len(self.lags)} entries")
        A = len(self.alphabet)
        code = 0
        for c in context:
            c = int(c)
            if not 0 <= c < A:
                raise ValueError(f"context entry {c} outside alphabet range")
            code = code * A + c
        return code

    def decode(self, code: int) -> tuple:
        A = len(self.alphabet)
        digits = []
        for _ in self.lags:
            code, rem = divmod(code, A)
            digits.append(rem)
        return tuple(reversed(digits))

    def contexts(self):
        """Observed contexts, as tuples, in code order."""
        return (self.decode(c) for c in sorted(self.rows))

    def count(self, context, a) -> int:
        row = self.rows.get(self.encode(context))
        return 0 if row is None else int(row[int(a)])

    def context_count(self, context) -> int:
        row = self.rows.get(self.encode(context))
        return 0 if row is None else int(row.sum())

    def pi_hat(self, context, a=None) -> float:
        """Empirical probability of the context (jointly with symbol a if given)."""
        row = self.rows.get(self.encode(context))
        if row is None:
            return 0.0
        num = row.sum() if a is None else row[int(a)]
        return float(num) / self.n_windows

    def conditional(self, context) -> np.ndarray:
        """Empirical next-symbol distribution; uniform for unseen contexts."""
        A = len(self.alphabet)
        row = self.rows.get(self.encode(context))
        if row is None or row.sum() == 0:
            return np.full(A, 1.0 / A)
        return row / row.sum()

    def prob(self, context, a) -> float:
        return float(self.conditional(context)[int(a)])


def freq_table(counts: CountsTable, S) -> FreqTable:
    """Marginalize window counts onto the lag subset S plus the current symbol."""
    S = _as_lag_tuple(S, allow_empty=True)
    if S and S[-1] > counts.d:
        raise ValueError(f"lag {S[-1]} exceeds the table order d={counts.d}")
    A = len(counts.alphabet)
    powers = [A**j for j in reversed(S)]  # oldest lag first
    rows: dict = {}
    for code, c in counts.entries.items():
        a = code % A
        ctx = 0
        for p in powers:
            ctx = ctx * A + (code // p) % A
        row = rows.get(ctx)
        if row is None:
            row = np.zeros(A, dtype=np.int64)
            rows[ctx] = row
        row[a] += c
    return FreqTable(counts.alphabet, S, counts.d, counts.n, rows)


class PairwiseFreqTable:
    """Joint counts of (context over S, symbol b at lag j, next symbol a).

    This is the S + {j} frequency table with the lag-j coordinate split out,
    the raw material for scoring how much lag j adds on top of S.
    """

    __slots__ = ("alphabet", "lags", "j", "d", "n", "rows")

    def __init__(self, alphabet, lags, j, d, n, rows):
        self.alphabet = alphabet
        self.lags = lags
        self.j = j
        self.d = d
        self.n = n
        self.rows = rows  # (context code, b) -> int64 count row over a

    @property
    def n_windows(self) -> int:
        return self.n - self.d

    def _ctx_code(self, context) -> int:
        context = tuple(context)
        if len(context) != len(self.lags):
            raise ValueError(f"context must have {len(self.lags)} entries")
        A = len(self.alphabet)
        code = 0
        for c in context:
            code = code * A + int(c)
        return code

    def count(self, context, b, a) -> int:
        row = self.rows.get((self._ctx_code(context), int(b)))
        return 0 if row is None else int(row[int(a)])

    def joint_prob(self, context, b, a) -> float:
        return self.count(context, b, a) / self.n_windows

    def marginal_prob(self, context, b) -> float:
        row = self.rows.get((self._ctx_code(context), int(b)))
        return 0.0 if row is None else float(row.sum()) / self.n_windows

    def conditional(self, context, b) -> np.ndarray:
        A = len(self.alphabet)
        row = self.rows.get((self._ctx_code(context), int(b)))
        if row is None or row.sum() == 0:
            return np.full(A, 1.0 / A)
        return row / row.sum()


def pairwise_freq(counts: CountsTable, S, j: int) -> PairwiseFreqTable:
    """Joint table of contexts over S with the symbol at an extra lag j."""
    S = _as_lag_tuple(S, allow_empty=True)
    j = int(j)
    if not 1 <= j <= counts.d:
        raise ValueError(f"lag j must satisfy 1 <= j <= d={counts.d}, got {j}")
    if j in S:
        raise ValueError(f"lag j={j} already belongs to S")
    if S and S[-1] > counts.d:
        raise ValueError(f"lag {S[-1]} exceeds the table order d={counts.d}")
    A = len(counts.alphabet)
    merged = freq_table(counts, S + (j,))
    # position of j among the merged lags, counted from the least significant
    # digit (lags ascending = digits from most recent to oldest)
    e = sorted(S + (j,)).index(j)
    pe = A**e
    rows = {}
    for code, row in merged.rows.items():
        hi, lo = divmod(code, pe * A)
        b, lo = divmod(lo, pe)
        key = (hi * pe + lo, b)
        agg = rows.get(key)
        if agg is None:
            rows[key] = row.copy()
        else:
            agg += row
    return PairwiseFreqTable(counts.alphabet, S, j, counts.d, counts.n, rows)


def _grouped_by_dropped_lag(ft: FreqTable, lag_index: int):
    """Group observed contexts of ``ft`` by the context with one lag removed.

    Returns a dict mapping the projected context code to a list of
    (value at the dropped lag, full context code, count row) triples, one
    list per group of contexts agreeing everywhere except at
    ``ft.lags[lag_index]``.
    """
    A = len(ft.alphabet)
    pe = A**lag_index
    groups: dict = {}
    for code, row in ft.rows.items():
        hi, lo = divmod(code, pe * A)
        b, lo = divmod(lo, pe)
        groups.setdefault(hi * pe + lo, []).append((b, code, row))
    return groups


def oscillation_empirical(sample: Sample, S) -> dict:
    """Plug-in oscillation of each lag in S, estimated from the sample.

    For lag j this is the largest total-variation distance between empirical
    conditional rows of two observed contexts over S that differ only at j.
    Context pairs involving an unobserved context are skipped; a lag with no
    comparable pair scores 0.
    """
    S = _as_lag_tuple(S)
    d = S[-1]
    if d >= len(sample):
        raise ValueError(f"max(S)={d} must be smaller than the sample length")
    ft = freq_table(counts_table(sample, d), S)
    out = {}
    for idx, j in enumerate(ft.lags):
        best = 0.0
        for group in _grouped_by_dropped_lag(ft, idx).values():
            if len(group) < 2:
                continue
            conds = [row / row.sum() for _, _, row in group]
            for x in range(len(conds) - 1):
                for y in range(x + 1, len(conds)):
                    tv = 0.5 * float(np.abs(conds[x] - conds[y]).sum())
                    if tv > best:
                        best = tv
        out[j] = best
    return out


# --- CSV export ---------------------------------------------------------------


def freq_table_csv(ft: FreqTable, path_or_buf, *, max_rows: int = 1 << 22) -> None:
    """Write a frequency table as CSV: one lag column per element of S (oldest
    first), then the next symbol, its count, the context count, and the
    conditional frequency.

    All |A|^|S| contexts are listed when that fits under ``max_rows``
    (unseen ones carry zero counts and the uniform row); otherwise only
    observed contexts are written.
    """
    A = len(ft.alphabet)
    n_ctx = A ** len(ft.lags)
    if n_ctx * A <= max_rows:
        ctx_codes = range(n_ctx)
    else:
        ctx_codes = sorted(ft.rows)

    own = isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__")
    f = open(path_or_buf, "w", newline="") if own else path_or_buf
    try:
        w = csv.writer(f)
        w.writerow([f"x{j}" for j in reversed(ft.lags)] + ["a", "Nxa", "Nx", "p"])
        for code in ctx_codes:
            ctx = ft.decode(code)
            row = ft.rows.get(code)
            nx = 0 if row is None else int(row.sum())
            cond = ft.conditional(ctx)
            for a in range(A):
                nxa = 0 if row is None else int(row[a])
                w.writerow(
                    [ft.alphabet.label(c) for c in ctx]
                    + [ft.alphabet.label(a), nxa, nx, repr(float(cond[a]))]
                )
    finally:
        if own:
            f.close()


def freq_table_csv_text(ft: FreqTable, **kwargs) -> str:
    buf = io.StringIO()
    freq_table_csv(ft, buf, **kwargs)
    return buf.getvalue()
