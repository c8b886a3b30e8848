import os
from concurrent.futures import ProcessPoolExecutor


def worker_count() -> int:
    """Worker count hint from ``APLAB_THREADS`` (default: available CPUs)."""
    raw = os.environ.get("APLAB_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return os.cpu_count() or 1


def pmap(fn, items, min_items=512):
    """Order-preserving map; fans out to processes only for large batches.

    ``fn`` must be picklable (a module-level function or a partial of one).
    """
    items = list(items)
    n = worker_count()
    if n <= 1 or len(items) < min_items:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * n))
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
