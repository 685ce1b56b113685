"""Numerical tolerances and runtime settings shared across modules."""

import os
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    metric_degeneracy: float = 1e-12
    lagrangian_residual: float = 1e-10
    sphere_radius: float = 1e-10


DEFAULT_TOLERANCES = Tolerances()

THREADS_ENV = "SHRINKER_LAB_THREADS"


def worker_count(default: int = 1) -> int:
    """Worker cap from ``SHRINKER_LAB_THREADS`` (at least 1)."""
    raw = os.environ.get(THREADS_ENV, "")
    try:
        n = int(raw)
    except ValueError:
        return default
    return max(1, n)
