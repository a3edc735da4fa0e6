"""EM fitting of MTD parameters for a fixed lag set.

The complete-data formulation treats the mixture component used at each time
step as the latent variable. The E-step computes, per observation, the
posterior weight of the independent part and of every lag; the M-step
re-estimates the mixture weights from the average posteriors and every
conditional row from the posterior-weighted transition counts. Each update
can only raise the sample log-likelihood, which is what the stopping rule
watches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .empirics import Sample, _as_lag_tuple
from .model import INPUT_TOL, LagSet, MtdModel, oscillation_exact

DEFAULT_STOP_GAIN = 0.01
DEFAULT_MAX_ITER = 100


def _check_simplex(arr, what):
    if np.any(arr < 0):
        raise ValueError(f"{what} has negative entries")
    s = arr.sum(axis=-1)
    if np.any(np.abs(s - 1.0) > INPUT_TOL):
        raise ValueError(f"{what} must sum to 1 within {INPUT_TOL}")


@dataclass(frozen=True, eq=False)
class EmInit:
    """Starting point of an EM run.

    ``lambdas`` has 1 + k entries, the first being the weight of the
    independent distribution. A zero first entry freezes the independent
    part: p0 is then carried along unchanged and its weight stays zero.
    """

    lambdas: np.ndarray
    p0: np.ndarray
    pj: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lambdas", np.array(self.lambdas, dtype=float))
        object.__setattr__(self, "p0", np.array(self.p0, dtype=float))
        object.__setattr__(self, "pj", np.array(self.pj, dtype=float))
        if self.lambdas.ndim != 1 or self.lambdas.size < 2:
            raise ValueError("lambdas must be a vector with one entry per component")
        if self.pj.ndim != 3 or self.pj.shape[0] != self.lambdas.size - 1:
            raise ValueError("pj must supply one matrix per lag weight")
        A = self.p0.size
        if self.pj.shape[1:] != (A, A):
            raise ValueError("pj matrices must be square over the p0 alphabet")
        _check_simplex(self.lambdas, "lambdas")
        _check_simplex(self.p0, "p0")
        _check_simplex(self.pj, "pj rows")


@dataclass(frozen=True, eq=False)
class EmResult:
    """Fitted parameters plus the trace of the run.

    ``iterations`` counts the updates actually applied; ``distlogL`` records
    the log-likelihood gain of every update computed, including a final one
    that fell below the stopping threshold and was discarded.
    """

    lambdas: np.ndarray
    p0: np.ndarray
    pj: np.ndarray
    iterations: int
    distlogL: list
    oscillations: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "lambdas": [float(x) for x in self.lambdas],
            "p0": [float(x) for x in self.p0],
            "pj": [[[float(x) for x in row] for row in mat] for mat in self.pj],
            "iterations": self.iterations,
            "distlogL": [float(x) for x in self.distlogL],
        }
        if self.oscillations is not None:
            out["oscillations"] = {str(-j): float(v) for j, v in self.oscillations.items()}
        return out


def _validate_against(sample: Sample, S, init: EmInit):
    S = _as_lag_tuple(S)
    A = len(sample.alphabet)
    if init.p0.size != A:
        raise ValueError(f"init.p0 has {init.p0.size} entries, alphabet has {A}")
    if init.lambdas.size != 1 + len(S):
        raise ValueError(
            f"init.lambdas has {init.lambdas.size} entries, expected {1 + len(S)}"
        )
    if S[-1] >= len(sample):
        raise ValueError(f"max(S)={S[-1]} must be smaller than the sample length")
    return S


def _components(vals, S, lambdas, p0, pj, d):
    """Per-component likelihood of each observation: comp[r, t-d] for t = d..n-1."""
    n = vals.size
    xs = vals[d:]
    comp = np.empty((1 + len(S), n - d))
    comp[0] = lambdas[0] * p0[xs]
    for i, j in enumerate(S):
        comp[1 + i] = lambdas[1 + i] * pj[i][vals[d - j : n - j], xs]
    return comp


def mtd_log_likelihood(sample: Sample, S, params: EmInit) -> float:
    """Log-likelihood of the sample under MTD parameters, conditional on the
    first max(S) observations."""
    S = _validate_against(sample, S, params)
    comp = _components(sample.values, S, params.lambdas, params.p0, params.pj, S[-1])
    dens = comp.sum(axis=0)
    if np.any(dens <= 0.0):
        t = int(np.argmax(dens <= 0.0)) + S[-1]
        raise ValueError(
            f"parameters assign probability zero to the observed transition at "
            f"position {t}; the log-likelihood is undefined"
        )
    return float(np.log(dens).sum())


def _apply_floor(p0, pj, floor):
    p0 = np.maximum(p0, floor)
    p0 = p0 / p0.sum()
    pj = np.maximum(pj, floor)
    pj = pj / pj.sum(axis=2, keepdims=True)
    return p0, pj


def em_fit(
    sample: Sample,
    S,
    init: EmInit,
    M: float | None = DEFAULT_STOP_GAIN,
    n_iter: int = DEFAULT_MAX_ITER,
    *,
    want_oscillations: bool = False,
    floor: float | None = None,
) -> EmResult:
    """Fit MTD parameters by EM on a fixed lag set.

    Parameters
    ----------
    sample : Sample
    S : iterable of int
        The lag set; max(S) observations are conditioned on, not modeled.
    M : float or None
        Stop as soon as an update would gain less than M in log-likelihood;
        that update is computed (its gain lands in ``distlogL``) but not
        applied. ``None`` disables the rule and runs exactly ``n_iter``
        updates.
    n_iter : int
        Hard bound on the number of updates.
    want_oscillations : bool
        Also report the exact oscillations of the fitted model.
    floor : float, optional
        Off by default. When set, entries of p0 and the pj rows are floored
        at this value (rows renormalized) at the start and after every
        update, which rescues initializations that assign probability zero
        to an observed transition.

    Returns
    -------
    EmResult
    """
    S = _validate_against(sample, S, init)
    if n_iter < 1:
        raise ValueError(f"n_iter must be >= 1, got {n_iter}")
    d = S[-1]
    vals = sample.values
    A = len(sample.alphabet)
    n_windows = vals.size - d
    xs = vals[d:]
    lag_vals = [vals[d - j : vals.size - j] for j in S]
    lag_codes = [lv * A + xs for lv in lag_vals]

    lam = init.lambdas.copy()
    p0 = init.p0.copy()
    pj = init.pj.copy()
    if floor is not None:
        p0, pj = _apply_floor(p0, pj, floor)

    def density_of(lam_, p0_, pj_):
        comp = _components(vals, S, lam_, p0_, pj_, d)
        dens = comp.sum(axis=0)
        if np.any(dens <= 0.0):
            t = int(np.argmax(dens <= 0.0)) + d
            raise ValueError(
                f"parameters assign probability zero to the observed transition "
                f"at position {t}; provide a floor or a positive initialization"
            )
        return comp, dens

    comp, dens = density_of(lam, p0, pj)
    ll = float(np.log(dens).sum())

    iterations = 0
    distlog: list = []
    for _ in range(n_iter):
        w = comp / dens  # posterior component weights, columns sum to 1

        lam_new = w.sum(axis=1) / n_windows
        lam_new = lam_new / lam_new.sum()

        w0_total = w[0].sum()
        if w0_total > 0.0:
            p0_new = np.bincount(xs, weights=w[0], minlength=A)
            p0_new = p0_new / p0_new.sum()
        else:
            p0_new = p0  # frozen: no posterior mass on the independent part

        pj_new = np.empty_like(pj)
        for i in range(len(S)):
            mat = np.bincount(lag_codes[i], weights=w[1 + i], minlength=A * A)
            mat = mat.reshape(A, A)
            rowsum = mat.sum(axis=1)
            for b in range(A):
                # a conditioning symbol with no posterior mass keeps its row
                pj_new[i, b] = mat[b] / rowsum[b] if rowsum[b] > 0.0 else pj[i, b]
        if floor is not None:
            p0_new, pj_new = _apply_floor(p0_new, pj_new, floor)

        comp_new, dens_new = density_of(lam_new, p0_new, pj_new)
        ll_new = float(np.log(dens_new).sum())
        distlog.append(ll_new - ll)
        if M is not None and ll_new - ll < M:
            break  # the candidate that triggered the stop is not applied
        lam, p0, pj = lam_new, p0_new, pj_new
        comp, dens, ll = comp_new, dens_new, ll_new
        iterations += 1

    oscillations = None
    if want_oscillations:
        model = MtdModel(sample.alphabet, LagSet(S), lam[0], lam[1:], p0, pj)
        oscillations = oscillation_exact(model)
    return EmResult(lam, p0, pj, iterations, distlog, oscillations)
