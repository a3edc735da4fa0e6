"""Exact stationary sampling and forward simulation of MTD chains.

The stationary sampler exploits the mixture form of the kernel: each time
point independently picks which mixture component generates it. Picking the
independent component (probability lambda0) closes the recursion; picking a
lag defers to one earlier time point. Resolving these choices backwards from
the requested window yields an exact draw from the stationary law, no burn-in
involved, provided lambda0 > 0 so every ancestry terminates.
"""

from __future__ import annotations

from bisect import bisect_right

import numpy as np

from .empirics import Sample
from .model import MtdModel
from .rng import RandomSource, UniformBuffer, fresh_source

DEFAULT_STEP_CAP = 10_000_000


def _cumulative(vec) -> list:
    out = []
    acc = 0.0
    for v in vec:
        acc += float(v)
        out.append(acc)
    out[-1] = 1.0  # guard the last bucket against float drift
    return out


def perfect_sample(
    model: MtdModel,
    n: int,
    rng: RandomSource | None = None,
    *,
    step_cap: int = DEFAULT_STEP_CAP,
) -> Sample:
    """Draw n consecutive symbols exactly from the stationary law of ``model``.

    Parameters
    ----------
    model : MtdModel
        Must have lambda0 > 0; otherwise ancestries can regress forever.
    n : int
        Number of symbols returned, chronologically ordered.
    rng : RandomSource, optional
        Omitting it seeds from OS entropy.
    step_cap : int
        Hard bound on total resolution steps, a guard against tiny lambda0
        making the backward recursion walk unreasonably far.

    Returns
    -------
    Sample
    """
    sample, _ = perfect_sample_detailed(model, n, rng, step_cap=step_cap)
    return sample


def perfect_sample_detailed(
    model: MtdModel,
    n: int,
    rng: RandomSource | None = None,
    *,
    step_cap: int = DEFAULT_STEP_CAP,
):
    """Like :func:`perfect_sample`, also returning the resolution step count."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if model.lambda0 <= 0.0:
        raise ValueError(
            "perfect sampling requires lambda0 > 0: with no independent part "
            "the backward recursion never terminates"
        )
    gen = (rng if rng is not None else fresh_source()).generator()
    uni = UniformBuffer(gen)

    lags = list(model.lags)
    lag_cum = _cumulative([model.lambda0] + list(model.lambdas))
    p0_cum = _cumulative(model.p0)
    pj_cum = {j: [_cumulative(row) for row in model.pj[i]] for i, j in enumerate(lags)}

    # x[i] is the symbol at time lo + i, -1 while unresolved; the window grows
    # backward in blocks when an ancestry walks past lo
    block = max(1024, 4 * model.order)
    lo = -n - block
    x = [-1] * (-lo)

    steps = 0
    for t in range(-n, 0):
        if x[t - lo] >= 0:
            continue
        # each time point draws its component exactly once, at first visit
        u = uni.next()
        stack = [(t, 0 if u <= lag_cum[0] else lags[bisect_right(lag_cum, u) - 1])]
        while stack:
            steps += 1
            if steps > step_cap:
                raise RuntimeError(
                    f"perfect sampling exceeded the step cap of {step_cap} "
                    f"resolution steps; raise step_cap or use a larger lambda0"
                )
            s, lag = stack[-1]
            if lag == 0:
                x[s - lo] = bisect_right(p0_cum, uni.next())
                stack.pop()
                continue
            ps = s - lag
            if ps < lo:
                grow = max(block, lo - ps)
                x[:0] = [-1] * grow
                lo -= grow
            pv = x[ps - lo]
            if pv >= 0:
                x[s - lo] = bisect_right(pj_cum[lag][pv], uni.next())
                stack.pop()
            else:
                u = uni.next()
                stack.append(
                    (ps, 0 if u <= lag_cum[0] else lags[bisect_right(lag_cum, u) - 1])
                )
    values = np.array(x[-n:], dtype=np.int64)
    return Sample(values, model.alphabet), steps


def forward_sample(
    model: MtdModel,
    n: int,
    initial_past,
    rng: RandomSource | None = None,
) -> Sample:
    """Simulate n symbols forward from a given past.

    ``initial_past`` supplies at least ``model.order`` symbol indices in
    chronological order; only the trailing ``model.order`` of them are used.
    Each step draws a mixture component and then a symbol from it, which is
    distributionally identical to drawing from the mixed transition row. The
    returned sample contains the n new symbols only.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    past = [int(v) for v in initial_past]
    order = model.order
    if len(past) < order:
        raise ValueError(
            f"initial_past supplies {len(past)} symbols but the model order is {order}"
        )
    A = len(model.alphabet)
    if any(not 0 <= v < A for v in past):
        raise ValueError("initial_past entries must be valid alphabet indices")
    gen = (rng if rng is not None else fresh_source()).generator()
    uni = UniformBuffer(gen)

    lags = list(model.lags)
    lag_cum = _cumulative([model.lambda0] + list(model.lambdas))
    p0_cum = _cumulative(model.p0)
    pj_cum = {j: [_cumulative(row) for row in model.pj[i]] for i, j in enumerate(lags)}

    buf = past[-order:]
    out = []
    for _ in range(n):
        u = uni.next()
        if u <= lag_cum[0]:
            v = bisect_right(p0_cum, uni.next())
        else:
            lag = lags[bisect_right(lag_cum, u) - 1]
            v = bisect_right(pj_cum[lag][buf[-lag]], uni.next())
        out.append(v)
        buf.append(v)
        if len(buf) > order:
            del buf[0]
    return Sample(np.array(out, dtype=np.int64), model.alphabet)
