"""Bounded, order-preserving parallel evaluation."""

import os
from collections.abc import Callable, Iterable, Sequence
from typing import TypeVar

from joblib import Parallel, delayed

from app.core.config import settings

T = TypeVar("T")
R = TypeVar("R")


def worker_count(threads: int | None = None) -> int:
    """Resolve the worker cap; 0 means one worker per CPU."""
    n = settings.THREADS if threads is None else threads
    if n <= 0:
        return os.cpu_count() or 1
    return n


def parallel_map(
    fn: Callable[[T], R], items: Iterable[T], threads: int | None = None
) -> list[R]:
    """Apply fn to every item; results come back in input order."""
    seq: Sequence[T] = list(items)
    n_jobs = min(worker_count(threads), max(len(seq), 1))
    if n_jobs == 1:
        return [fn(item) for item in seq]
    # numpy releases the GIL inside BLAS, threads avoid pickling panels
    return Parallel(n_jobs=n_jobs, prefer="threads")(delayed(fn)(item) for item in seq)
