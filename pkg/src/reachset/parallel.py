"""Minimal deterministic worker pool.

Independent work items (boundary rays, sweep cells, multi-starts) map over
a process pool when workers > 1, falling back to a serial loop otherwise.
Result order always follows input order, so merged outputs are
deterministic regardless of the worker count.
"""

import os
from multiprocessing import get_context


def worker_count(requested=None):
    """Resolve the worker count: argument, then REACHSET_WORKERS, then 1."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("REACHSET_WORKERS")
    if env:
        return max(1, int(env))
    return 1


def parallel_map(fn, items, workers):
    """Order-preserving map, serial for workers <= 1."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    ctx = get_context("spawn")
    with ctx.Pool(processes=min(workers, len(items))) as pool:
        return pool.map(fn, items)
