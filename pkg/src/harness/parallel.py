from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Tuple, TypeVar

K = TypeVar("K")
R = TypeVar("R")


def ordered_map(fn: Callable[[K], R], keys: Iterable[K], jobs: int) -> List[Tuple[K, R]]:
    """
    Apply fn to every key, in parallel when jobs > 1.
    Results come back in key order; the first failure is re-raised with its key
    attached as `exc.failed_key`.
    """
    keys = list(keys)
    if jobs <= 1 or len(keys) <= 1:
        out = []
        for k in keys:
            try:
                out.append((k, fn(k)))
            except Exception as e:
                e.failed_key = k
                raise
        return out

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [(k, pool.submit(fn, k)) for k in keys]
        out = []
        for k, fut in futures:
            try:
                out.append((k, fut.result()))
            except Exception as e:
                e.failed_key = k
                for _k, other in futures:
                    other.cancel()
                raise
        return out
