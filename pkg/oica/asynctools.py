"""Asynchronous helpers (:mod:`oica.asynctools`)
===============================================

Independent units of work (Gabor fits, random trials) are mapped over a
process pool driven by an asyncio event loop. Results always come back in
the order of the inputs.

.. autofunction:: worker_count

.. autofunction:: synchronize_function

.. autofunction:: gather_map

"""

import os
import asyncio
from concurrent.futures import ProcessPoolExecutor
from functools import partial

__all__ = ["worker_count", "synchronize_function", "gather_map"]


def worker_count(requested=None):
    """Number of worker processes: ``requested`` if given, else the
    ``OICA_THREADS`` environment variable, else the number of CPUs.
    """
    if requested is None:
        env = os.environ.get("OICA_THREADS")
        if env:
            try:
                requested = int(env)
            except ValueError:
                raise ValueError(
                    "OICA_THREADS must be an integer, got {:}".format(env)
                ) from None
        else:
            requested = os.cpu_count() or 1
    return max(int(requested), 1)


def synchronize_function(async_func, *args, **kwargs):
    """
    Execute synchronously an asynchronous function
    """

    return asyncio.run(async_func(*args, **kwargs))


async def _gather_map_async(func, items, workers):
    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [loop.run_in_executor(pool, partial(func, item)) for item in items]
        return await asyncio.gather(*futures)


def gather_map(func, items, workers=None):
    """Returns ``[func(item) for item in items]``, computed by a pool of
    worker processes when more than one worker is allowed.

    :param func: picklable (module-level) function of one argument
    :type func: callable
    :param items: arguments
    :type items: iterable
    :param workers: number of processes, defaults to :func:`worker_count`
    :type workers: int, optional
    :rtype: list
    """
    items = list(items)
    workers = min(worker_count(workers), max(len(items), 1))
    if workers == 1:
        return [func(item) for item in items]
    return list(synchronize_function(_gather_map_async, func, items, workers))
