"""Shared odds and ends."""

from __future__ import annotations

import os

THREADS_ENV = "COOPT_THREADS"


def worker_count(n_tasks: int) -> int:
    """Worker threads to use for n_tasks independent updates.

    Capped by the COOPT_THREADS environment variable (default 1); never more
    than one worker per task.
    """
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, min(cap, n_tasks))
