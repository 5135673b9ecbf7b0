import logging
from multiprocessing import Pool
from typing import Callable, List, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> List[R]:
    """
    Map `fn` over `items` keeping the input order.

    With threads > 1 the work runs on a process pool; `fn` must be picklable
    (a module-level function or a functools.partial of one). Output order,
    and therefore any file written from it, does not depend on `threads`.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    processes = min(threads, len(items))
    chunksize = max(1, len(items) // (processes * 8))
    logger.debug(f"Mapping {len(items)} items over {processes} processes (chunksize {chunksize})")
    with Pool(processes=processes) as pool:
        return pool.map(fn, items, chunksize=chunksize)
