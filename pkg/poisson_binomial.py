"""Poisson-binomial machinery: pmf, odds, elementary symmetric polynomials and the
monotonicity/extremal facts used to bound the higher Hamming slices.
"""

import math
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from core import ParamVec
from errors import (
    IndexOutOfRangeError,
    InvalidParameterError,
    LambdaTooLargeError,
    OddsConstraintError,
    OddsUndefinedError,
)
from summation import compensated_sum

logger = logging.getLogger(__name__)

MONOTONE_SLACK = 1e-14
FINITE_DIFFERENCE_STEP = 1e-6


@dataclass(frozen=True)
class PoissonBinomial:
    """Law of X = X_1 + ... + X_N with independent X_i ~ Ber(r_i)"""

    r: ParamVec

    @classmethod
    def of(cls, values: Iterable[float]) -> "PoissonBinomial":
        return cls(ParamVec.of(values))

    @property
    def N(self) -> int:
        return len(self.r)

    def leave_one_out(self, j: int) -> Tuple[float, ...]:
        """Success probabilities with coordinate j (1-based) removed; may be empty"""
        if j < 1 or j > self.N:
            raise IndexOutOfRangeError(f"coordinate j={j} is outside [1, {self.N}]")
        return self.r.values[: j - 1] + self.r.values[j:]


@dataclass(frozen=True)
class OddsVec:
    a: Tuple[float, ...]

    @classmethod
    def from_probabilities(cls, r: Iterable[float]) -> "OddsVec":
        odds = []
        for i, ri in enumerate(r):
            if ri >= 1.0:
                raise OddsUndefinedError(f"odds undefined at coordinate {i + 1}: r = {ri!r}")
            odds.append(ri / (1.0 - ri))
        return cls(tuple(odds))

    @property
    def N(self) -> int:
        return len(self.a)

    @property
    def total(self) -> float:
        return compensated_sum(self.a)


@dataclass(frozen=True)
class MonotonicityResult:
    is_nonincreasing: bool
    first_violation: Optional[int] = None
    max_increase: float = 0.0  # largest f_m - f_{m-1} over m >= 1


def convolve_bernoullis(values: Sequence[float]) -> np.ndarray:
    """pmf of a sum of independent Bernoullis by one-coordinate-at-a-time convolution.

    Works for r_i in {0, 1} exactly; an empty sequence gives the point mass at 0.
    """
    f = np.zeros(len(values) + 1)
    f[0] = 1.0
    for i, ri in enumerate(values):
        f[1:i + 2] = f[1:i + 2] * (1.0 - ri) + f[:i + 1] * ri
        f[0] *= 1.0 - ri
    return f


def pmf(pb: PoissonBinomial) -> np.ndarray:
    """P[X = m] for m = 0..N"""
    return convolve_bernoullis(pb.r.values)


def elementary_symmetric_all(a: OddsVec) -> np.ndarray:
    """e_0..e_N of the odds by the triangular recurrence"""
    e = np.zeros(a.N + 1)
    e[0] = 1.0
    for i, ai in enumerate(a.a):
        e[1:i + 2] = e[1:i + 2] + ai * e[:i + 1]
    return e


def elementary_symmetric(a: OddsVec, m: int) -> float:
    if m < 0 or m > a.N:
        raise IndexOutOfRangeError(f"order m={m} is outside [0, {a.N}]")
    return float(elementary_symmetric_all(a)[m])


def pmf_via_factorization(pb: PoissonBinomial) -> np.ndarray:
    """f_m = f_0 * e_m(odds); only defined when every r_i < 1"""
    odds = OddsVec.from_probabilities(pb.r.values)
    f0 = math.prod(1.0 - ri for ri in pb.r.values)
    return f0 * elementary_symmetric_all(odds)


def pmf_is_nonincreasing(pb: PoissonBinomial, force: bool = False) -> MonotonicityResult:
    """Check f_{m-1} >= f_m for all m >= 1 under the hypothesis sum of odds <= 1.

    With force=True the hypothesis is not checked (nor are the odds formed), so the
    result also describes pairs where the lemma does not apply.
    """
    if not force:
        odds = OddsVec.from_probabilities(pb.r.values)
        if odds.total > 1.0:
            raise OddsConstraintError(f"sum of odds is {odds.total:.6g} > 1")
    f = pmf(pb)
    increases = f[1:] - f[:-1]
    max_increase = float(increases.max())
    for m in range(1, pb.N + 1):
        if increases[m - 1] > MONOTONE_SLACK:
            logger.debug(f"pmf increases at m={m}: {f[m - 1]!r} < {f[m]!r}")
            return MonotonicityResult(False, m, max_increase)
    return MonotonicityResult(True, None, max_increase)


def binomial(n: int, k: int) -> float:
    """C(n, k) as a float; exact integer arithmetic, rounded once"""
    if k < 0 or k > n:
        return 0.0
    return float(math.comb(n, k))


def pmf_extremal_bound(N: int, lam: float, m: int) -> float:
    """C(N,m) lam^m (1-lam)^(N-m), the maximum of P[X=m] over r in [0, lam]^N"""
    if m < 1 or m > N:
        raise IndexOutOfRangeError(f"order m={m} is outside [1, {N}]")
    if lam < 0.0:
        raise InvalidParameterError(f"lambda must be non-negative, got {lam!r}")
    if lam > 1.0 / (N + 1):
        raise LambdaTooLargeError(f"lambda={lam!r} exceeds 1/(N+1) = {1.0 / (N + 1)!r}")
    return binomial(N, m) * lam ** m * (1.0 - lam) ** (N - m)


def pmf_coordinate_derivative(pb: PoissonBinomial, j: int, m: int) -> float:
    """d P[X=m] / d r_j = P[X^(-j) = m-1] - P[X^(-j) = m]"""
    if m < 0 or m > pb.N:
        raise IndexOutOfRangeError(f"order m={m} is outside [0, {pb.N}]")
    rest = convolve_bernoullis(pb.leave_one_out(j))
    below = rest[m - 1] if m >= 1 else 0.0
    at = rest[m] if m < rest.size else 0.0
    return float(below - at)


def pmf_central_difference(pb: PoissonBinomial, j: int, m: int,
                           step: float = FINITE_DIFFERENCE_STEP) -> float:
    """Central finite difference of P[X=m] in r_j; r_j +- step must stay in [0, 1]"""
    if j < 1 or j > pb.N:
        raise IndexOutOfRangeError(f"coordinate j={j} is outside [1, {pb.N}]")
    values = list(pb.r.values)
    center = values[j - 1]
    values[j - 1] = center + step
    upper = convolve_bernoullis(values)[m]
    values[j - 1] = center - step
    lower = convolve_bernoullis(values)[m]
    return float((upper - lower) / (2.0 * step))
