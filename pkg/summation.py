"""Compensated summation helpers.

Every sum over coordinates, subsets or enumeration chunks goes through this module so
that tiny-regime discrepancies (of order 1/n) are not swamped by accumulation noise.
"""

import math
from typing import Iterable

import numpy as np


class KahanSum:
    """Running sum with Neumaier compensation.

    Example:
        >>> acc = KahanSum()
        >>> for value in (1.0, 1e100, 1.0, -1e100):
        ...     acc += value
        >>> acc.value
        2.0
    """

    __slots__ = ("total", "carry")

    def __init__(self, start: float = 0.0):
        self.total = float(start)
        self.carry = 0.0

    def add(self, value: float) -> "KahanSum":
        value = float(value)
        t = self.total + value
        if abs(self.total) >= abs(value):
            self.carry += (self.total - t) + value
        else:
            self.carry += (value - t) + self.total
        self.total = t
        return self

    def __iadd__(self, value: float) -> "KahanSum":
        return self.add(value)

    @property
    def value(self) -> float:
        return self.total + self.carry

    def __repr__(self):
        return f"KahanSum({self.value})"


def compensated_sum(values: Iterable[float]) -> float:
    """Sum an iterable of scalars with Neumaier compensation"""
    acc = KahanSum()
    for value in values:
        acc.add(value)
    return acc.value


def array_sum(values: np.ndarray) -> float:
    """Correctly rounded sum of a float array.

    Bulk arrays produced by the atom traversal use math.fsum, which tracks the
    exact partial sums instead of a single carry term.
    """
    if values.size == 0:
        return 0.0
    return math.fsum(values.tolist())
