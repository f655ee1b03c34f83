"""Limit estimation from a small-parameter sweep."""

from __future__ import annotations

from typing import Sequence

import numpy as np

SMOOTH_POWERS = (1.0, 2.0)
# a kinked density smooths like sqrt(t) under Gaussian blurring
KINKED_POWERS = (0.5, 1.0)


def richardson_limit(params: Sequence[float], values: Sequence[float], powers=SMOOTH_POWERS) -> float:
    """Value at ``param -> 0`` assuming ``v(p) = L + sum_k c_k p**powers[k]``.

    Uses the ``len(powers) + 1`` smallest parameters, so with the default
    powers the last three points of a sweep.
    """
    p = np.asarray(params, dtype=float)
    v = np.asarray(values, dtype=float)
    m = len(powers) + 1
    if p.size < m:
        raise ValueError(f"need at least {m} points, got {p.size}")
    order = np.argsort(p)[:m]
    p, v = p[order], v[order]
    a = np.column_stack([np.ones(m)] + [p**q for q in powers])
    return float(np.linalg.solve(a, v)[0])


def geometric_sweep(start: float = 0.1, ratio: float = 0.5, count: int = 7) -> list:
    """``start * ratio**k`` for ``k = 0 .. count-1`` (strictly decreasing)."""
    return [start * ratio**k for k in range(count)]


DEFAULT_T_VALUES = tuple(geometric_sweep())
