"""Order-preserving parallel map.

Results always come back in submission order, so callers can fan work out
over processes without their output depending on the worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def ordered_map(fn, items, workers: int = 1) -> list:
    """Apply ``fn`` to every item, in parallel when workers > 1.

    ``fn`` must be a module-level function and the items picklable.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as ex:
        return list(ex.map(fn, items))


def split_chunks(items, k: int) -> list:
    """Split items into at most k contiguous, near-equal chunks (none empty)."""
    items = list(items)
    k = max(1, min(k, len(items)))
    bounds = [round(i * len(items) / k) for i in range(k + 1)]
    return [items[bounds[i] : bounds[i + 1]] for i in range(k) if bounds[i] < bounds[i + 1]]
