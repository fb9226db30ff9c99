"""Deterministic chunked evaluation over point sets."""

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .exceptions import ValidationError

WORKERS_ENV = "SINGMIN_WORKERS"


def resolve_workers(workers=None):
    """Worker count: explicit value, else ``$SINGMIN_WORKERS``, else all CPUs."""
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        if env:
            try:
                workers = int(env)
            except ValueError:
                raise ValidationError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
        else:
            workers = os.cpu_count() or 1
    if workers < 1:
        raise ValidationError(f"worker count must be >= 1, got {workers}")
    return int(workers)


def chunked_map(func, points, workers=None, chunk=2048):
    """Apply a row-wise vectorized ``func`` to ``points`` in ordered chunks.

    Chunks are independent and results are concatenated in input order, so
    the output does not depend on the worker count.
    """
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        return np.empty(0)
    pieces = [points[i : i + chunk] for i in range(0, len(points), chunk)]
    workers = min(resolve_workers(workers), len(pieces))
    if workers == 1:
        return np.concatenate([func(p) for p in pieces])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.concatenate(list(pool.map(func, pieces)))


def stable_rms(values):
    """Root mean square with compensated summation (order independent)."""
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        return 0.0
    return math.sqrt(math.fsum((values * values).tolist()) / values.size)
