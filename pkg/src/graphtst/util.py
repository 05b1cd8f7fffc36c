"""Shared helpers: seeding and small numeric utilities."""

from __future__ import annotations

import numpy as np


def rng_for(*keys) -> np.random.Generator:
    """Build a Generator from an ordered tuple of integer keys.

    Derived streams are independent across distinct key tuples, so callers
    can hand out per-trial or per-stage generators without coordinating a
    global state. Pass an existing Generator as the single key to use it
    directly.
    """
    if len(keys) == 1 and isinstance(keys[0], np.random.Generator):
        return keys[0]
    flat = []
    stack = list(keys)
    while stack:
        k = stack.pop(0)
        if k is None:
            flat.append(0)
        elif isinstance(k, (list, tuple)):
            stack = list(k) + stack
        else:
            flat.append(int(k))
    return np.random.default_rng(np.random.SeedSequence(flat))


def fsum_pairs(values: np.ndarray) -> float:
    """Compensated sum of a 1-d array in fixed index order."""
    import math

    return math.fsum(values.tolist())
