"""Exact TV and Hamming-slice discrepancies by exhaustive atom enumeration.

This is the brute-force oracle every bound is checked against.

Atom traversal: the n coordinates are split into `low` coordinates (the first
min(n, chunk_bits)) and `top` coordinates (the rest). Partial products over each
group are built by repeated doubling, masses[j] = prod of y_i or (1 - y_i) over the
bits of j, so every atom mass is a fresh product of at most n factors and no division
is ever taken. Chunk c covers the atoms whose top bits equal c; the chunk partition
depends only on n and chunk_bits, never on the worker count, and chunk results are
combined in chunk order, so results are bit-identical for any number of workers.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Tuple

import numpy as np

from core import ParamPair, SubsetIndex, atom_mass
from errors import DimensionMismatchError, DimensionTooLargeError, IndexOutOfRangeError
from settings import get_settings
from summation import KahanSum, array_sum

logger = logging.getLogger(__name__)

AtomKernel = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SliceReport:
    n: int
    delta: Tuple[float, ...]
    tv_exact: float
    identity_residual: float

    @property
    def slice_sum(self) -> float:
        acc = KahanSum()
        for d in self.delta:
            acc.add(d)
        return acc.value

    def identity_holds(self, tolerance: float = 1e-12) -> bool:
        return self.identity_residual <= tolerance * max(1.0, 2.0 * self.tv_exact)


def _resolve_limit(limit: Optional[int]) -> int:
    return get_settings().enumeration_limit if limit is None else limit


def _check_limit(n: int, limit: Optional[int]) -> None:
    limit = _resolve_limit(limit)
    if n > limit:
        raise DimensionTooLargeError(n, limit)


def slice_delta(pair: ParamPair, subset: SubsetIndex) -> float:
    """Signed atom discrepancy delta_S = P_S(p) - P_S(q)"""
    if subset.n != pair.n:
        raise DimensionMismatchError(
            f"subset universe has size {subset.n} but the pair has n={pair.n}"
        )
    return atom_mass(pair.p, subset) - atom_mass(pair.q, subset)


def _next_mask(mask: int) -> int:
    """Next larger integer with the same popcount"""
    lowest = mask & -mask
    ripple = mask + lowest
    return (((ripple ^ mask) >> 2) // lowest) | ripple


def iter_k_subsets(n: int, k: int) -> Iterator[SubsetIndex]:
    """All k-subsets of [n] in increasing mask order"""
    if k < 0 or k > n:
        raise IndexOutOfRangeError(f"slice index k={k} is outside [0, {n}]")
    if k == 0:
        yield SubsetIndex(n=n, mask=0)
        return
    mask = (1 << k) - 1
    end = 1 << n
    while mask < end:
        yield SubsetIndex(n=n, mask=mask)
        mask = _next_mask(mask)


def slice_discrepancy(pair: ParamPair, k: int, limit: Optional[int] = None) -> float:
    """Delta_k: sum of |delta_S| over the C(n, k) subsets of size k"""
    if k < 0 or k > pair.n:
        raise IndexOutOfRangeError(f"slice index k={k} is outside [0, {pair.n}]")
    _check_limit(pair.n, limit)
    acc = KahanSum()
    for subset in iter_k_subsets(pair.n, k):
        acc.add(abs(slice_delta(pair, subset)))
    return acc.value


def _partial_products(values: np.ndarray) -> np.ndarray:
    masses = np.ones(1)
    for y in values:
        masses = np.concatenate((masses * (1.0 - y), masses * y))
    return masses


def _popcounts(bits: int) -> np.ndarray:
    counts = np.zeros(1, dtype=np.int64)
    for _ in range(bits):
        counts = np.concatenate((counts, counts + 1))
    return counts


class _AtomLayout:
    """Precomputed low/top partial products for one pair"""

    def __init__(self, pair: ParamPair, chunk_bits: int):
        p = pair.p.as_array()
        q = pair.q.as_array()
        self.n = pair.n
        self.low_bits = min(self.n, chunk_bits)
        self.low_p = _partial_products(p[: self.low_bits])
        self.low_q = _partial_products(q[: self.low_bits])
        self.top_p = _partial_products(p[self.low_bits:])
        self.top_q = _partial_products(q[self.low_bits:])
        self.top_popcounts = _popcounts(self.n - self.low_bits)

        # stable grouping of the low atoms by popcount for per-slice sums
        low_popcounts = _popcounts(self.low_bits)
        self.low_order = np.argsort(low_popcounts, kind="stable")
        self.low_bounds = np.searchsorted(
            low_popcounts[self.low_order], np.arange(self.low_bits + 2)
        )

    @property
    def chunks(self) -> int:
        return self.top_p.size


def _chunk_sums(layout: _AtomLayout, chunk: int, kernel: AtomKernel,
                by_slice: bool) -> Tuple[float, List[float]]:
    masses_p = layout.top_p[chunk] * layout.low_p
    masses_q = layout.top_q[chunk] * layout.low_q
    values = kernel(masses_p, masses_q)
    total = array_sum(values)
    if not by_slice:
        return total, []
    grouped = values[layout.low_order]
    bounds = layout.low_bounds
    slices = [array_sum(grouped[bounds[j]:bounds[j + 1]]) for j in range(layout.low_bits + 1)]
    return total, slices


def _traverse(pair: ParamPair, kernel: AtomKernel, by_slice: bool,
              limit: Optional[int], workers: Optional[int],
              chunk_bits: Optional[int]) -> Tuple[float, List[float]]:
    settings = get_settings()
    _check_limit(pair.n, limit)
    layout = _AtomLayout(pair, chunk_bits or settings.chunk_bits)
    workers = workers or settings.workers
    logger.debug(
        f"Enumerating 2^{pair.n} atoms in {layout.chunks} chunk(s) of 2^{layout.low_bits} "
        f"with {workers} worker(s)"
    )

    def run(chunk: int) -> Tuple[float, List[float]]:
        return _chunk_sums(layout, chunk, kernel, by_slice)

    if workers > 1 and layout.chunks > 1:
        with ThreadPoolExecutor(max_workers=min(workers, layout.chunks)) as pool:
            results = list(pool.map(run, range(layout.chunks)))
    else:
        results = [run(chunk) for chunk in range(layout.chunks)]

    # fixed chunk order keeps the reduction independent of scheduling
    total = KahanSum()
    slices = [KahanSum() for _ in range(pair.n + 1)] if by_slice else []
    for chunk, (chunk_total, chunk_slices) in enumerate(results):
        total.add(chunk_total)
        offset = int(layout.top_popcounts[chunk])
        for j, value in enumerate(chunk_slices):
            slices[offset + j].add(value)
    return total.value, [acc.value for acc in slices]


def _absolute_difference(masses_p: np.ndarray, masses_q: np.ndarray) -> np.ndarray:
    return np.abs(masses_p - masses_q)


def atom_sum(pair: ParamPair, kernel: AtomKernel, limit: Optional[int] = None,
             workers: Optional[int] = None, chunk_bits: Optional[int] = None) -> float:
    """Compensated sum of kernel(P_S(p), P_S(q)) over all 2^n atoms"""
    total, _ = _traverse(pair, kernel, False, limit, workers, chunk_bits)
    return total


def tv_exact(pair: ParamPair, limit: Optional[int] = None, workers: Optional[int] = None,
             chunk_bits: Optional[int] = None) -> float:
    """Exact total variation distance, 1/2 sum over atoms of |P_S(p) - P_S(q)|"""
    total = atom_sum(pair, _absolute_difference, limit, workers, chunk_bits)
    return min(1.0, 0.5 * total)


def full_slice_report(pair: ParamPair, limit: Optional[int] = None,
                      workers: Optional[int] = None,
                      chunk_bits: Optional[int] = None) -> SliceReport:
    """All slice discrepancies and the exact TV from one traversal"""
    total, slices = _traverse(pair, _absolute_difference, True, limit, workers, chunk_bits)
    tv = min(1.0, 0.5 * total)
    acc = KahanSum()
    for value in slices:
        acc.add(value)
    residual = abs(2.0 * tv - acc.value)
    return SliceReport(n=pair.n, delta=tuple(slices), tv_exact=tv, identity_residual=residual)
