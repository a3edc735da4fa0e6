"""Reading series from delimited text files, plus equal-range discretization.

A data file is a single observed sequence: one value per row, optionally with
a header and extra columns. Everything here returns plain Python lists or
Sample objects; nothing touches pandas.
"""

from __future__ import annotations

import csv
import io
from os import PathLike

import numpy as np

from .empirics import Sample
from .model import Alphabet

NA_TOKENS = frozenset({"", "na", "nan"})


def _is_na(token: str) -> bool:
    return token.strip().lower() in NA_TOKENS


def _looks_numeric(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def _read_rows(path_or_buf):
    if isinstance(path_or_buf, (str, PathLike)):
        with open(path_or_buf, newline="") as fh:
            return list(csv.reader(fh))
    return list(csv.reader(path_or_buf))


def _pick_column(rows, column):
    """Resolve the column selector; returns (col_index, data_rows)."""
    if not rows:
        raise ValueError("the file contains no rows")
    header = rows[0]
    if isinstance(column, str):
        try:
            idx = header.index(column)
        except ValueError:
            raise ValueError(f"no column named {column!r} in header {header}") from None
        return idx, rows[1:]
    idx = 0 if column is None else int(column)
    if idx < 0 or idx >= len(header):
        raise ValueError(f"column index {idx} out of range for {len(header)} columns")
    # header row detection: a non-numeric, non-NA first entry that never
    # recurs as data is treated as a label
    first = header[idx].strip()
    if first and not _looks_numeric(first) and not _is_na(first):
        tail = [r[idx].strip() for r in rows[1:] if idx < len(r)]
        if first not in tail:
            return idx, rows[1:]
    return idx, rows


def _clean_tokens(path_or_buf, column, na_policy, reverse):
    """Shared extraction pipeline: pick the column, trim NAs, fix the order."""
    if na_policy not in ("error", "drop_edges"):
        raise ValueError(f"na_policy must be 'error' or 'drop_edges', got {na_policy!r}")
    idx, rows = _pick_column(_read_rows(path_or_buf), column)
    tokens = []
    for r in rows:
        if not r or all(not c.strip() for c in r):
            continue  # blank line
        tokens.append(r[idx].strip() if idx < len(r) else "")
    if reverse:
        tokens.reverse()

    na_mask = [_is_na(t) for t in tokens]
    if any(na_mask):
        if na_policy == "error":
            pos = na_mask.index(True)
            raise ValueError(f"missing value at row {pos}; pass na_policy='drop_edges' to trim")
        lo = 0
        hi = len(tokens)
        while lo < hi and na_mask[lo]:
            lo += 1
        while hi > lo and na_mask[hi - 1]:
            hi -= 1
        if any(na_mask[lo:hi]):
            pos = na_mask.index(True, lo)
            raise ValueError(
                f"missing value at interior row {pos}: a gap breaks the chain, "
                "split the file instead"
            )
        tokens = tokens[lo:hi]
    if not tokens:
        raise ValueError("no observations left after trimming")
    return tokens


def ingest_series(
    path_or_buf,
    column=None,
    *,
    na_policy: str = "error",
    reverse: bool = False,
) -> Sample:
    """Load one observed sequence from a delimited file.

    Parameters
    ----------
    path_or_buf : path or open text file
    column : None, int or str
        Which column holds the series: default the first, an integer
        position, or a header name.
    na_policy : {"error", "drop_edges"}
        "error" rejects any missing value; "drop_edges" strips leading and
        trailing runs of missing values but still rejects interior ones,
        since a gap breaks the dependence structure.
    reverse : bool
        Set when the file stores the newest observation first; the returned
        sample is always in chronological order.

    The alphabet is the set of distinct tokens, sorted numerically when every
    token parses as a number and lexicographically otherwise.
    """
    tokens = _clean_tokens(path_or_buf, column, na_policy, reverse)
    labels = sorted(set(tokens))
    if len(labels) < 2:
        raise ValueError(f"series takes the single value {labels[0]!r}; nothing to model")
    if all(_looks_numeric(t) for t in labels):
        labels.sort(key=float)
    alphabet = Alphabet(_canonical_labels(labels))
    canon = {raw: c for raw, c in zip(labels, alphabet.symbols)}
    return Sample.from_labels([canon[t] for t in tokens], alphabet)


def _canonical_labels(labels):
    """Integer-valued numeric labels print without a trailing .0."""
    out = []
    for t in labels:
        if _looks_numeric(t):
            v = float(t)
            out.append(str(int(v)) if v == int(v) else str(v))
        else:
            out.append(t)
    return out


def read_numeric_series(
    path_or_buf,
    column=None,
    *,
    na_policy: str = "error",
    reverse: bool = False,
) -> np.ndarray:
    """Like ingest_series but returns the raw float values, for discretization."""
    tokens = _clean_tokens(path_or_buf, column, na_policy, reverse)
    bad = [t for t in tokens if not _looks_numeric(t)]
    if bad:
        raise ValueError(f"non-numeric value {bad[0]!r} in a numeric series")
    return np.array([float(t) for t in tokens])


def discretize(values, k: int) -> Sample:
    """Split the observed range into k equal-width bins, labeled 1..k.

    Boundaries sit at min + i*(max-min)/k; a value exactly on a boundary goes
    to the upper bin, and the maximum lands in bin k.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("values must be a non-empty vector")
    if k < 2:
        raise ValueError(f"need at least 2 bins, got {k}")
    lo = float(values.min())
    hi = float(values.max())
    if not np.isfinite(lo) or not np.isfinite(hi):
        raise ValueError("values must be finite")
    if hi == lo:
        raise ValueError("constant series: the range is empty, nothing to discretize")
    boundaries = lo + (hi - lo) * np.arange(1, k) / k
    bins = np.searchsorted(boundaries, values, side="right")
    bins[values >= hi] = k - 1  # the max itself belongs to the top bin
    alphabet = Alphabet([str(i) for i in range(1, k + 1)])
    return Sample(bins.astype(np.int64), alphabet)


def write_sample_csv(sample: Sample, path_or_buf) -> None:
    """One label per row under a single 'x' header."""
    def _write(fh):
        w = csv.writer(fh)
        w.writerow(["x"])
        for lab in sample.labels():
            w.writerow([lab])

    if isinstance(path_or_buf, (str, PathLike)):
        with open(path_or_buf, "w", newline="") as fh:
            _write(fh)
    else:
        _write(path_or_buf)


def sample_csv_text(sample: Sample) -> str:
    buf = io.StringIO()
    write_sample_csv(sample, buf)
    return buf.getvalue()
