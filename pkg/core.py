"""Domain types for pairs of Bernoulli product measures.

A measure Ber(y) on {0,1}^n is parameterized by a ParamVec y. Atoms are identified
with subsets S of [n] (the coordinates equal to one) and encoded as bit masks where
bit i-1 stands for coordinate i.
"""

import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Sequence, Tuple

import numpy as np

from errors import DimensionMismatchError, IndexOutOfRangeError, InvalidParameterError
from summation import compensated_sum

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParamVec:
    """Parameter vector in [0,1]^n, n >= 1"""

    values: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not values:
            raise InvalidParameterError("parameter vector must have at least one entry")
        for i, v in enumerate(values):
            if not math.isfinite(v) or v < 0.0 or v > 1.0:
                raise InvalidParameterError(f"entry {i + 1} = {v!r} is outside [0, 1]")
        object.__setattr__(self, "values", values)

    @classmethod
    def of(cls, values: Iterable[float]) -> "ParamVec":
        return cls(tuple(values))

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[float]:
        return iter(self.values)

    def __getitem__(self, index):
        return self.values[index]

    @property
    def n(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.float64)

    def reflected(self) -> "ParamVec":
        """Complement every coordinate: y -> 1 - y"""
        return ParamVec(tuple(1.0 - v for v in self.values))

    def concat(self, other: "ParamVec") -> "ParamVec":
        return ParamVec(self.values + other.values)


@dataclass(frozen=True)
class ParamPair:
    """Two parameter vectors of equal length with the cached difference x = p - q"""

    p: ParamVec
    q: ParamVec
    x: Tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.p) != len(self.q):
            raise DimensionMismatchError(
                f"p has length {len(self.p)} but q has length {len(self.q)}"
            )
        object.__setattr__(self, "x", tuple(pi - qi for pi, qi in zip(self.p, self.q)))

    @classmethod
    def from_lists(cls, p: Iterable[float], q: Iterable[float]) -> "ParamPair":
        return cls(ParamVec.of(p), ParamVec.of(q))

    @property
    def n(self) -> int:
        return len(self.p)

    def swapped(self) -> "ParamPair":
        return ParamPair(self.q, self.p)

    def reflected(self) -> "ParamPair":
        """Complement both measures coordinatewise; TV is unchanged"""
        return ParamPair(self.p.reflected(), self.q.reflected())

    def concat(self, other: "ParamPair") -> "ParamPair":
        return ParamPair(self.p.concat(other.p), self.q.concat(other.q))

    def max_entry(self) -> float:
        return max(max(self.p.values), max(self.q.values))


class RegimeTag(str, Enum):
    TINY = "tiny"
    SMALL = "small"
    GENERAL = "general"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    n: int
    lambda_n: float
    beta_n: float

    @classmethod
    def for_n(cls, tag: RegimeTag, n: int) -> "Regime":
        lambda_n = 1.0 / (2 * n)
        beta_n = 1.0 / (2 * n - 1)
        return cls(tag=tag, n=n, lambda_n=lambda_n, beta_n=beta_n)

    @property
    def is_tiny(self) -> bool:
        return self.tag is RegimeTag.TINY

    @property
    def is_small(self) -> bool:
        """True for Small, and for Tiny once n >= 2 (where Tiny implies Small)"""
        if self.tag is RegimeTag.SMALL:
            return True
        return self.tag is RegimeTag.TINY and self.n >= 2


def tiny_bound(n: int) -> float:
    return 1.0 / (n * n)


def small_bound(n: int) -> float:
    return 1.0 / (2 * n)


@dataclass(frozen=True)
class SubsetIndex:
    """Subset S of [n] encoded as a bit mask"""

    n: int
    mask: int

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameterError(f"universe size must be >= 1, got {self.n}")
        if self.mask < 0 or self.mask >= (1 << self.n):
            raise IndexOutOfRangeError(f"mask {self.mask} is not a subset of [{self.n}]")

    @classmethod
    def from_members(cls, members: Iterable[int], n: int) -> "SubsetIndex":
        """Build from 1-based coordinate indices"""
        mask = 0
        for i in members:
            if i < 1 or i > n:
                raise IndexOutOfRangeError(f"coordinate {i} is outside [1, {n}]")
            mask |= 1 << (i - 1)
        return cls(n=n, mask=mask)

    @property
    def cardinality(self) -> int:
        return self.mask.bit_count()

    def members(self) -> Tuple[int, ...]:
        return tuple(i + 1 for i in range(self.n) if self.mask >> i & 1)

    def __contains__(self, i: int) -> bool:
        return 1 <= i <= self.n and bool(self.mask >> (i - 1) & 1)


def atom_mass(y: ParamVec, subset: SubsetIndex) -> float:
    """P_S(y): product of y_i over S and (1 - y_i) over the complement"""
    if subset.n != len(y):
        raise DimensionMismatchError(
            f"subset universe has size {subset.n} but the vector has length {len(y)}"
        )
    mask = subset.mask
    return math.prod(v if mask >> i & 1 else 1.0 - v for i, v in enumerate(y.values))


def classify_regime(pair: ParamPair) -> Regime:
    """Tightest regime containing the pair; intervals are closed.

    For n = 1 the tiny box [0, 1] is the whole cube, so every pair is Tiny.
    """
    n = pair.n
    largest = pair.max_entry()
    if largest <= tiny_bound(n):
        tag = RegimeTag.TINY
    elif n >= 2 and largest <= small_bound(n):
        tag = RegimeTag.SMALL
    else:
        tag = RegimeTag.GENERAL
    logger.debug(f"Classified n={n}, max entry {largest!r} as {tag.value}")
    return Regime.for_n(tag, n)


def l1_distance(pair: ParamPair) -> float:
    return compensated_sum(abs(v) for v in pair.x)


def l2_distance(pair: ParamPair) -> float:
    return math.sqrt(compensated_sum(v * v for v in pair.x))


def leave_one_out_products(values: Sequence[float]) -> np.ndarray:
    """P_{-i}(y) = prod over j != i of (1 - y_j), for every i.

    Built from prefix and suffix products, so entries equal to 1 give exact
    zeros without any division.
    """
    complements = 1.0 - np.asarray(values, dtype=np.float64)
    n = complements.size
    prefix = np.ones(n + 1)
    suffix = np.ones(n + 1)
    for i in range(n):
        prefix[i + 1] = prefix[i] * complements[i]
        suffix[n - 1 - i] = suffix[n - i] * complements[n - 1 - i]
    return prefix[:n] * suffix[1:]
