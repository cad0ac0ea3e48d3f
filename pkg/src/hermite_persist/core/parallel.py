"""Replica-parallel execution.

Replica ranges are cut into fixed-size chunks that do not depend on the
worker count; chunk results are returned in replica order. Together with the
keyed random streams this makes every output independent of ``workers``.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from concurrent.futures import FIRST_EXCEPTION, Future, ThreadPoolExecutor, wait
from typing import Any, TypeVar

import numpy as np
import structlog

from hermite_persist.core.errors import HermiteError, WorkerError

logger = structlog.get_logger()

T = TypeVar("T")

ChunkTask = Callable[[int, int], T]


def chunk_bounds(replicas: range, chunk_size: int) -> list[tuple[int, int]]:
    """Split a replica range into ``[start, stop)`` chunks of ``chunk_size``."""
    if chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    return [
        (start, min(start + chunk_size, replicas.stop))
        for start in range(replicas.start, replicas.stop, chunk_size)
    ]


def parallel_map(
    replicas: range,
    task: ChunkTask[T],
    workers: int = 1,
    chunk_size: int = 2048,
) -> list[T]:
    """
    Run ``task(start, stop)`` over fixed chunks of ``replicas``.

    Args:
        replicas: Replica indices to process (step must be 1).
        task: Pure function of its replica bounds.
        workers: Thread count; never changes results.
        chunk_size: Replicas per task call.

    Returns:
        Chunk results in replica order (empty for an empty range).

    Raises:
        WorkerError: If any chunk raised; remaining chunks are cancelled.
    """
    if replicas.step != 1:
        raise ValueError("replica range must be contiguous")
    bounds = chunk_bounds(replicas, chunk_size)
    if not bounds:
        return []

    if workers <= 1 or len(bounds) == 1:
        results: list[T] = []
        for start, stop in bounds:
            results.append(_run_chunk(task, start, stop))
        return results

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures: list[Future[T]] = [
            pool.submit(_run_chunk, task, start, stop) for start, stop in bounds
        ]
        done, _ = wait(futures, return_when=FIRST_EXCEPTION)
        failed = next((f for f in futures if f in done and f.exception() is not None), None)
        if failed is not None:
            for future in futures:
                future.cancel()
            error = failed.exception()
            assert error is not None
            raise error
        return [future.result() for future in futures]


def _run_chunk(task: ChunkTask[T], start: int, stop: int) -> T:
    try:
        return task(start, stop)
    except WorkerError:
        raise
    except Exception as e:
        logger.error("Replica chunk failed", start=start, stop=stop, error=str(e))
        details: dict[str, Any] = {"cause": e.to_dict()} if isinstance(e, HermiteError) else {}
        raise WorkerError(
            f"Replicas [{start}, {stop}) failed: {e}",
            chunk=(start, stop),
            details=details or None,
        ) from e


def concat_chunks(results: Sequence[Any], axis: int = 0) -> Any:
    """
    Merge chunk results by concatenation in replica order.

    Arrays are concatenated along ``axis``; tuples are merged element-wise.
    """
    if not results:
        return np.empty((0,))
    first = results[0]
    if isinstance(first, tuple):
        return tuple(concat_chunks([r[i] for r in results], axis) for i in range(len(first)))
    return np.concatenate(results, axis=axis)
