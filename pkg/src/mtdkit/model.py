"""Mixture transition distribution (MTD) models over finite alphabets.

An MTD chain draws each symbol from a convex mixture of one shared
independent distribution and one single-lag conditional per relevant lag:

    P(a | past) = lambda0 * p0(a) + sum_i lambda_i * p_i(a | past at lag j_i)

Lags are positive integers j, read as offsets -j into the past, kept in
increasing order (the first mixture weight after lambda0 belongs to the most
recent lag). Contexts are always written oldest lag first, so the row labels
of the induced transition table read left to right from the most distant lag
to the most recent one.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .rng import RandomSource, fresh_source

# Probability blocks typed in by a user may drift from 1 by rounding; anything
# worse is rejected. After construction every stored block sums to 1 within
# the internal tolerance.
INPUT_TOL = 1e-9
INTERNAL_TOL = 1e-12

DEFAULT_ROW_BUDGET = 1 << 22


class Alphabet:
    """Ordered set of distinct symbol labels; positions are the working indices.

    Labels are opaque tokens (ints, strings, ...). All numeric code in the
    package works with indices 0..len-1; labels only matter at the I/O edge.
    """

    __slots__ = ("symbols", "_index")

    def __init__(self, symbols):
        symbols = tuple(symbols)
        if len(symbols) < 2:
            raise ValueError("an alphabet needs at least two symbols")
        index = {}
        for i, s in enumerate(symbols):
            if s in index:
                raise ValueError(f"duplicate alphabet symbol {s!r}")
            index[s] = i
        self.symbols = symbols
        self._index = index

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.symbols == other.symbols

    def __hash__(self):
        return hash(self.symbols)

    def __repr__(self):
        return f"Alphabet({list(self.symbols)!r})"

    def index(self, symbol) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise ValueError(f"symbol {symbol!r} is not in the alphabet") from None

    def label(self, i: int):
        return self.symbols[i]


class LagSet:
    """Strictly increasing positive lags; lag j refers to the symbol j steps back."""

    __slots__ = ("lags",)

    def __init__(self, lags):
        lags = [int(j) for j in lags]
        if not lags:
            raise ValueError("lag set must be non-empty")
        if any(j < 1 for j in lags):
            raise ValueError(f"lags must be >= 1, got {lags}")
        if len(set(lags)) != len(lags):
            raise ValueError(f"duplicate lags in {lags}")
        self.lags = tuple(sorted(lags))

    def __len__(self):
        return len(self.lags)

    def __iter__(self):
        return iter(self.lags)

    def __getitem__(self, i):
        return self.lags[i]

    def __contains__(self, j):
        return j in self.lags

    def __eq__(self, other):
        return isinstance(other, LagSet) and self.lags == other.lags

    def __hash__(self):
        return hash(self.lags)

    def __repr__(self):
        return f"LagSet({list(self.lags)!r})"

    @property
    def order(self) -> int:
        """Largest lag: the order of the chain as a Markov process."""
        return self.lags[-1]


def _frozen_array(x, shape=None) -> np.ndarray:
    arr = np.array(x, dtype=float)
    if shape is not None and arr.shape != shape:
        raise ValueError(f"expected array of shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MtdModel:
    """Fully specified MTD model.

    Fields
    ------
    alphabet : Alphabet
    lags : LagSet
        Relevant lags, increasing.
    lambda0 : float
        Weight of the independent distribution p0.
    lambdas : ndarray, shape (k,)
        Weights of the lag conditionals, aligned with ``lags``.
    p0 : ndarray, shape (|A|,)
        Independent distribution. Stored always; ignored when lambda0 == 0.
    pj : ndarray, shape (k, |A|, |A|)
        One row-stochastic matrix per lag: ``pj[i][b][a]`` is the probability
        of the next symbol ``a`` given symbol ``b`` at lag ``lags[i]``.

    Use :func:`build_model` to construct instances from partial input; direct
    construction expects already-clean parameters.
    """

    alphabet: Alphabet
    lags: LagSet
    lambda0: float
    lambdas: np.ndarray
    p0: np.ndarray
    pj: np.ndarray

    def __post_init__(self):
        A = len(self.alphabet)
        k = len(self.lags)
        object.__setattr__(self, "lambda0", float(self.lambda0))
        object.__setattr__(self, "lambdas", _frozen_array(self.lambdas, (k,)))
        object.__setattr__(self, "p0", _frozen_array(self.p0, (A,)))
        object.__setattr__(self, "pj", _frozen_array(self.pj, (k, A, A)))
        weights = np.concatenate(([self.lambda0], self.lambdas))
        if np.any(weights < 0):
            raise ValueError("mixture weights must be non-negative")
        if abs(weights.sum() - 1.0) > INTERNAL_TOL:
            raise ValueError(
                f"mixture weights sum to {weights.sum()!r}, expected 1 within {INTERNAL_TOL}"
            )
        if np.any(self.p0 < 0) or abs(self.p0.sum() - 1.0) > INTERNAL_TOL:
            raise ValueError("p0 must be a probability vector")
        if np.any(self.pj < 0):
            raise ValueError("pj entries must be non-negative")
        rowsums = self.pj.sum(axis=2)
        if np.any(np.abs(rowsums - 1.0) > INTERNAL_TOL):
            raise ValueError(
                f"every pj row must sum to 1 within {INTERNAL_TOL}"
            )

    @property
    def order(self) -> int:
        return self.lags.order

    @property
    def n_lags(self) -> int:
        return len(self.lags)


def _clean_vector(vec, A, what) -> np.ndarray:
    arr = np.array(vec, dtype=float)
    if arr.shape != (A,):
        raise ValueError(f"{what} must have length {A}, got shape {arr.shape}")
    if np.any(arr < 0):
        raise ValueError(f"{what} has negative entries")
    s = arr.sum()
    if abs(s - 1.0) > INPUT_TOL:
        raise ValueError(f"{what} sums to {s!r}, expected 1 within {INPUT_TOL}")
    if abs(s - 1.0) > INTERNAL_TOL:
        arr = arr / s
    return arr


def _sample_simplex(gen, size) -> np.ndarray:
    # iid uniforms normalized to total mass 1; ties with the R habit of
    # filling unspecified probability blocks
    u = gen.random(size)
    return u / u.sum()


def build_model(
    alphabet,
    lags,
    lambda0=None,
    lambdas=None,
    p0=None,
    pj=None,
    *,
    single_matrix: bool = False,
    indep_part: bool = True,
    rng: RandomSource | None = None,
) -> MtdModel:
    """Construct an MtdModel, sampling any parameter block left unspecified.

    Parameters
    ----------
    alphabet : Alphabet or iterable of labels
    lags : LagSet or iterable of positive ints
    lambda0, lambdas, p0, pj : optional
        Probability blocks. Anything omitted is filled with iid uniform(0,1)
        entries normalized to a distribution (weights are scaled so the full
        weight vector sums to 1). ``pj`` accepts one matrix per lag, or a
        single matrix when ``single_matrix`` is set.
    single_matrix : bool
        Share one conditional matrix across all lags.
    indep_part : bool
        When false the model has no independent part: lambda0 is forced to 0
        and ``p0`` input is ignored.
    rng : RandomSource, optional
        Source for the sampled blocks. Omitting it seeds from OS entropy, so
        pass one whenever reproducibility matters.

    Returns
    -------
    MtdModel
    """
    if not isinstance(alphabet, Alphabet):
        alphabet = Alphabet(alphabet)
    if not isinstance(lags, LagSet):
        lags = LagSet(lags)
    A = len(alphabet)
    k = len(lags)

    gen_holder = []

    def gen():
        # created lazily so fully specified models never touch the rng
        if not gen_holder:
            gen_holder.append((rng if rng is not None else fresh_source()).generator())
        return gen_holder[0]

    # --- mixture weights ---------------------------------------------------
    if lambdas is not None:
        lambdas = np.array(lambdas, dtype=float)
        if lambdas.shape != (k,):
            raise ValueError(f"lambdas must have length {k}, got shape {lambdas.shape}")
        if np.any(lambdas < 0):
            raise ValueError("lambdas has negative entries")
    if lambda0 is not None:
        lambda0 = float(lambda0)
        if lambda0 < 0:
            raise ValueError(f"lambda0 must be non-negative, got {lambda0}")
        if lambda0 > 1 + INPUT_TOL:
            raise ValueError(f"lambda0 must be at most 1, got {lambda0}")

    if not indep_part:
        lambda0 = 0.0  # forced, regardless of input
        p0_given = None  # p0 input is ignored without an independent part
        if lambdas is None:
            lambdas = _sample_simplex(gen(), k)
        else:
            total = lambdas.sum()
            if abs(total - 1.0) > INPUT_TOL:
                raise ValueError(
                    f"with indep_part=False the lag weights must sum to 1, got {total!r}"
                )
            if abs(total - 1.0) > INTERNAL_TOL:
                lambdas = lambdas / total
    else:
        p0_given = p0
        if lambda0 == 0.0 and p0 is not None:
            raise ValueError(
                "lambda0=0 with an explicit p0 is contradictory; "
                "build the model with indep_part=False instead"
            )
        if lambda0 is None and lambdas is None:
            w = _sample_simplex(gen(), k + 1)
            lambda0, lambdas = float(w[0]), w[1:]
        elif lambda0 is None:
            lambda0 = 1.0 - float(lambdas.sum())
            if lambda0 < -INPUT_TOL:
                raise ValueError(
                    f"lambdas sum to {lambdas.sum()!r} > 1; no room left for lambda0"
                )
            lambda0 = max(lambda0, 0.0)
        elif lambdas is None:
            lambdas = _sample_simplex(gen(), k) * (1.0 - lambda0)
        total = lambda0 + lambdas.sum()
        if abs(total - 1.0) > INPUT_TOL:
            raise ValueError(
                f"mixture weights sum to {total!r}, expected 1 within {INPUT_TOL}"
            )
        if abs(total - 1.0) > INTERNAL_TOL:
            lambda0 = lambda0 / total
            lambdas = lambdas / total

    # --- independent distribution -------------------------------------------
    if not indep_part or lambda0 == 0.0:
        # stored for shape compatibility only; never used by the dynamics
        p0 = np.full(A, 1.0 / A) if p0_given is None else _clean_vector(p0_given, A, "p0")
    elif p0 is None:
        p0 = _sample_simplex(gen(), A)
    else:
        p0 = _clean_vector(p0, A, "p0")

    # --- lag conditionals ----------------------------------------------------
    def clean_matrix(m, what):
        m = np.array(m, dtype=float)
        if m.shape != (A, A):
            raise ValueError(f"{what} must be {A}x{A}, got shape {m.shape}")
        return np.stack([_clean_vector(m[b], A, f"{what} row {b}") for b in range(A)])

    if pj is None:
        if single_matrix:
            shared = np.stack([_sample_simplex(gen(), A) for _ in range(A)])
            pj = np.stack([shared] * k)
        else:
            pj = np.stack(
                [np.stack([_sample_simplex(gen(), A) for _ in range(A)]) for _ in range(k)]
            )
    else:
        arr = np.array(pj, dtype=float)
        if single_matrix:
            if arr.ndim == 3 and arr.shape[0] == 1:
                arr = arr[0]
            if arr.ndim != 2:
                raise ValueError(
                    "single_matrix=True expects exactly one conditional matrix"
                )
            shared = clean_matrix(arr, "pj")
            pj = np.stack([shared] * k)
        else:
            if arr.ndim != 3 or arr.shape[0] != k:
                raise ValueError(
                    f"pj must supply {k} matrices of shape {A}x{A}, got shape {arr.shape}"
                )
            pj = np.stack([clean_matrix(arr[i], f"pj[{i}]") for i in range(k)])

    return MtdModel(alphabet, lags, lambda0, lambdas, p0, pj)


@dataclass(frozen=True, eq=False)
class TransitionTable:
    """Dense transition kernel of an MTD model over its lag contexts.

    ``probs[r]`` is the next-symbol distribution of context number ``r``,
    where contexts are enumerated in base-|A| order with the oldest lag as
    the most significant digit (the top row is the all-first-symbol context).
    """

    alphabet: Alphabet
    lags: LagSet
    probs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.probs, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def n_rows(self) -> int:
        return self.probs.shape[0]

    def context(self, r: int) -> tuple:
        """Context number r as a tuple of symbol indices, oldest lag first."""
        A = len(self.alphabet)
        k = len(self.lags)
        digits = []
        for _ in range(k):
            r, rem = divmod(r, A)
            digits.append(rem)
        return tuple(reversed(digits))

    def contexts(self):
        return (self.context(r) for r in range(self.n_rows))

    def row_index(self, context) -> int:
        A = len(self.alphabet)
        context = tuple(context)
        if len(context) != len(self.lags):
            raise ValueError(
                f"context must have {len(self.lags)} entries, got {len(context)}"
            )
        r = 0
        for c in context:
            c = int(c)
            if not 0 <= c < A:
                raise ValueError(f"context entry {c} outside alphabet range")
            r = r * A + c
        return r

    def row(self, context) -> np.ndarray:
        """Next-symbol distribution given a context (symbol indices, oldest lag first)."""
        return self.probs[self.row_index(context)]

    def row_label(self, r: int) -> str:
        labels = [str(self.alphabet.label(c)) for c in self.context(r)]
        if all(len(s) == 1 for s in labels):
            return "".join(labels)
        return ",".join(labels)


def transition_table(model: MtdModel, max_rows: int = DEFAULT_ROW_BUDGET) -> TransitionTable:
    """Materialize the full context -> next-symbol kernel of ``model``.

    The table has |A|^k rows (k = number of lags); construction refuses to
    allocate more than ``max_rows`` of them.
    """
    A = len(model.alphabet)
    k = len(model.lags)
    n_rows = A**k
    if n_rows > max_rows:
        raise ValueError(
            f"transition table needs {n_rows} rows, over the row budget of {max_rows}"
        )
    rows = np.tile(model.lambda0 * model.p0, (n_rows, 1))
    r = np.arange(n_rows)
    for i in range(k):
        # lag lags[i] occupies the digit with exponent i (oldest lag most significant)
        digit = (r // A**i) % A
        rows += model.lambdas[i] * model.pj[i][digit, :]
    return TransitionTable(model.alphabet, model.lags, rows)


def oscillation_exact(model: MtdModel) -> dict:
    """Oscillation of each lag: its worst-case influence on the next symbol.

    For lag j with weight lambda_j and conditional matrix p_j this equals
    lambda_j times the largest total-variation distance between two rows of
    p_j, which is exactly the maximal change in the next-symbol law over
    pairs of pasts differing only at lag j.
    """
    A = len(model.alphabet)
    out = {}
    for i, j in enumerate(model.lags):
        m = model.pj[i]
        tv = max(
            0.5 * float(np.abs(m[b] - m[c]).sum())
            for b, c in itertools.combinations(range(A), 2)
        )
        out[j] = float(model.lambdas[i]) * tv
    return out


# --- serialization -----------------------------------------------------------


def model_to_dict(model: MtdModel) -> dict:
    return {
        "alphabet": list(model.alphabet.symbols),
        "lags": list(model.lags),
        "lambda0": float(model.lambda0),
        "lambdas": [float(x) for x in model.lambdas],
        "p0": [float(x) for x in model.p0],
        "pj": [[[float(x) for x in row] for row in mat] for mat in model.pj],
    }


def model_from_dict(d: dict) -> MtdModel:
    try:
        alphabet = Alphabet(d["alphabet"])
        lags = LagSet(d["lags"])
    except KeyError as e:
        raise ValueError(f"model spec is missing required field {e.args[0]!r}") from None
    missing = [f for f in ("lambda0", "lambdas", "p0", "pj") if d.get(f) is None]
    if missing:
        raise ValueError(
            f"model spec is missing {missing}; fill partial specs with build_model"
        )
    return MtdModel(
        alphabet, lags, d["lambda0"], d["lambdas"], d["p0"], d["pj"]
    )


def save_model(model: MtdModel, path) -> None:
    """Write a model as JSON. Floats round-trip losslessly."""
    with open(path, "w") as f:
        json.dump(model_to_dict(model), f, indent=2)
        f.write("\n")


def load_model(path) -> MtdModel:
    with open(path) as f:
        return model_from_dict(json.load(f))
