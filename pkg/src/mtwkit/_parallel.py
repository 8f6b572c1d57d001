"""Deterministic worker-pool helper.

MTWKIT_THREADS caps the pool size (default: available cores).  Results
are always collected in submission order, so reductions downstream are
identical whatever the pool size.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    raw = os.environ.get("MTWKIT_THREADS", "")
    if raw.strip():
        try:
            n = int(raw)
        except ValueError:
            n = 1
        return max(1, n)
    return os.cpu_count() or 1


def parallel_map(fn, items):
    """Ordered map over items, threaded when MTWKIT_THREADS allows."""
    items = list(items)
    n = worker_count()
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
