"""Bhattacharyya coefficient of two Bernoulli product measures, the TV bound it gives,
and the quasi-symmetric sqrt(2) l2 bound built on top of it.
"""

import math
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np

from bounds import BoundEntry
from core import ParamPair, ParamVec, l2_distance
from enumeration import atom_sum, tv_exact
from errors import NotQuasiSymmetricError, RegimeMismatchError
from summation import compensated_sum

logger = logging.getLogger(__name__)

SYMMETRY_SLACK = 1e-15


@dataclass(frozen=True)
class QuasiSymmetryCertificate:
    is_quasi_symmetric: bool
    reflected_pair: Optional[ParamPair]  # None unless quasi-symmetric
    offending_indices: Tuple[int, ...]   # 1-based


@dataclass(frozen=True)
class TightnessWitness:
    pair: ParamPair
    tv: float
    l2: float

    @property
    def ratio(self) -> float:
        return self.tv / self.l2


def one_d_coefficient(p: float, q: float) -> float:
    """b(p, q) = sqrt(pq) + sqrt((1-p)(1-q))"""
    return math.sqrt(p * q) + math.sqrt((1.0 - p) * (1.0 - q))


def straddle_inner_product(p: float, q: float) -> float:
    """sqrt(p(1-q)) + sqrt(q(1-p)); at least 1/sqrt(2) whenever p >= 1/2 >= q"""
    return math.sqrt(p * (1.0 - q)) + math.sqrt(q * (1.0 - p))


def bhattacharyya_coefficient(pair: ParamPair) -> float:
    """Product over coordinates of b(p_i, q_i); lies in [0, 1]"""
    bc = math.prod(one_d_coefficient(pi, qi) for pi, qi in zip(pair.p, pair.q))
    return min(1.0, bc)


def _sqrt_product(masses_p: np.ndarray, masses_q: np.ndarray) -> np.ndarray:
    return np.sqrt(masses_p * masses_q)


def bhattacharyya_atom_sum(pair: ParamPair, limit: Optional[int] = None,
                           workers: Optional[int] = None,
                           chunk_bits: Optional[int] = None) -> float:
    """sum over all atoms of sqrt(P_S(p) P_S(q)); equals the product formula"""
    return atom_sum(pair, _sqrt_product, limit, workers, chunk_bits)


def tv_bc_bound(pair: ParamPair) -> float:
    """sqrt(1 - BC^2), with 1 - BC^2 clamped at 0"""
    bc = bhattacharyya_coefficient(pair)
    return math.sqrt(max(0.0, 1.0 - bc * bc))


def one_d_identity_residual(p: float, q: float) -> float:
    """Residual of 1 - b(p,q)^2 = (sqrt(p(1-q)) - sqrt(q(1-p)))^2.

    When sqrt(p(1-q)) + sqrt(q(1-p)) is nonzero the fraction form
    (p-q)^2 / (sqrt(p(1-q)) + sqrt(q(1-p)))^2 is checked as well and the larger
    residual is returned.
    """
    b = one_d_coefficient(p, q)
    lhs = 1.0 - b * b
    u = math.sqrt(p * (1.0 - q))
    v = math.sqrt(q * (1.0 - p))
    residual = abs(lhs - (u - v) ** 2)
    denominator = (u + v) ** 2
    if denominator > 0.0:
        residual = max(residual, abs(lhs - (p - q) ** 2 / denominator))
    return residual


def _straddles(u: float, v: float) -> bool:
    return (u <= 0.5 <= v) or (v <= 0.5 <= u)


def check_one_d_bound(p: float, q: float, force: bool = False) -> BoundEntry:
    """1 - b(p,q)^2 <= 2(p-q)^2 for a straddling coordinate pair"""
    straddles = _straddles(p, q)
    if not straddles and not force:
        raise NotQuasiSymmetricError(f"({p!r}, {q!r}) does not straddle 1/2")
    b = one_d_coefficient(p, q)
    return BoundEntry.evaluate("one_d", 1.0 - b * b, 2.0 * (p - q) ** 2,
                               out_of_regime=not straddles)


def weakest_link_slack(values: Iterable[float]) -> float:
    """sum(1 - y_i) - (1 - prod y_i), non-negative for y in [0,1]^n"""
    values = list(values)
    return compensated_sum(1.0 - y for y in values) - (1.0 - math.prod(values))


def quasi_symmetry(pair: ParamPair) -> QuasiSymmetryCertificate:
    """Straddle check per coordinate (1/2 counts on both sides).

    The reflected pair flips coordinate i to (1 - p_i, 1 - q_i) whenever p_i < 1/2
    or q_i > 1/2, which orients every coordinate as p_i >= 1/2 >= q_i.
    """
    offending = tuple(
        i + 1 for i, (pi, qi) in enumerate(zip(pair.p, pair.q)) if not _straddles(pi, qi)
    )
    if offending:
        return QuasiSymmetryCertificate(False, None, offending)
    p_values = []
    q_values = []
    for pi, qi in zip(pair.p, pair.q):
        if pi < 0.5 or qi > 0.5:
            pi, qi = 1.0 - pi, 1.0 - qi
        p_values.append(pi)
        q_values.append(qi)
    reflected = ParamPair(ParamVec(tuple(p_values)), ParamVec(tuple(q_values)))
    return QuasiSymmetryCertificate(True, reflected, ())


def is_symmetric(pair: ParamPair) -> bool:
    """True when q = 1 - p coordinatewise"""
    return all(abs(qi - (1.0 - pi)) <= SYMMETRY_SLACK for pi, qi in zip(pair.p, pair.q))


def check_sqrt2_bound(pair: ParamPair, tv: float, force: bool = False) -> BoundEntry:
    """TV <= sqrt(2) ||p-q||_2 for quasi-symmetric pairs"""
    certificate = quasi_symmetry(pair)
    if not certificate.is_quasi_symmetric:
        if not force:
            raise NotQuasiSymmetricError(
                f"coordinates {list(certificate.offending_indices)} do not straddle 1/2"
            )
        logger.debug("Evaluating sqrt(2) bound on a pair that is not quasi-symmetric")
    return BoundEntry.evaluate("sqrt2_l2", tv, math.sqrt(2.0) * l2_distance(pair),
                               out_of_regime=not certificate.is_quasi_symmetric)


def check_symmetric_l2_bound(pair: ParamPair, tv: float, force: bool = False) -> BoundEntry:
    """TV <= ||p-q||_2 when q = 1 - p"""
    symmetric = is_symmetric(pair)
    if not symmetric and not force:
        raise RegimeMismatchError("symmetric l2 bound requires q = 1 - p")
    return BoundEntry.evaluate("symmetric_l2", tv, l2_distance(pair), out_of_regime=not symmetric)


def tightness_witness() -> TightnessWitness:
    """p = (1, 1), q = (1/2, 1/2): TV / ||p-q||_2 = 3/sqrt(8)"""
    pair = ParamPair.from_lists([1.0, 1.0], [0.5, 0.5])
    return TightnessWitness(pair=pair, tv=tv_exact(pair), l2=l2_distance(pair))
