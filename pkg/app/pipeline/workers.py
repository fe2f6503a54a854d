"""Per-record fan-out over a process pool."""
from multiprocessing import Pool
from typing import Callable, List, Sequence, TypeVar

from app.logging_config import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def run_parallel(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> List[R]:
    """``[fn(item) for item in items]`` spread over ``threads`` processes.

    Results come back in input order, so output never depends on the
    worker count. ``fn`` must be a module-level function.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    processes = min(threads, len(items))
    chunksize = max(1, len(items) // (4 * processes))
    logger.debug("worker_pool_started", processes=processes, items=len(items), chunksize=chunksize)
    with Pool(processes=processes) as pool:
        return pool.map(fn, items, chunksize=chunksize)
