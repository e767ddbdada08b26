"""Input checks shared by the public API."""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils import check_scalar


def check_probability(value, name: str) -> float:
    return float(check_scalar(value, name, numbers.Real, min_val=0.0, max_val=1.0))


def check_positive_int(value, name: str, min_val: int = 1) -> int:
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    return int(check_scalar(value, name, numbers.Integral, min_val=min_val))


def check_rng(seed) -> np.random.Generator:
    """Accept ``None``, an int, a ``SeedSequence`` or a ``Generator``."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def check_schedule(sizes) -> list[int]:
    sizes = [int(s) for s in sizes]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("snapshot sizes must be strictly increasing")
    if sizes and sizes[0] < 1:
        raise ValueError("snapshot sizes must be positive")
    return sizes
