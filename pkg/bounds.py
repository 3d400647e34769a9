"""Theorem-level bounds on TV and the slice discrepancies, the B_k(n) sequence, and the
auxiliary identity behind the Delta_2 bound.

Every check returns BoundEntry objects expressing `lhs <= rhs`. Checks tied to a regime
refuse out-of-regime pairs unless called with force=True, in which case the entries are
still evaluated and flagged out_of_regime.
"""

import math
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

from core import (
    ParamPair,
    Regime,
    SubsetIndex,
    atom_mass,
    classify_regime,
    l1_distance,
    l2_distance,
    leave_one_out_products,
)
from enumeration import SliceReport, slice_delta
from errors import IndexOutOfRangeError, NTooSmallError, OddsUndefinedError, RegimeMismatchError
from poisson_binomial import binomial
from settings import get_settings
from summation import KahanSum, compensated_sum

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundEntry:
    name: str
    lhs: float
    rhs: float
    margin: float
    satisfied: bool
    out_of_regime: bool = False

    @classmethod
    def evaluate(cls, name: str, lhs: float, rhs: float, tolerance: Optional[float] = None,
                 scale: Optional[float] = None, out_of_regime: bool = False) -> "BoundEntry":
        """Entry for lhs <= rhs, satisfied when rhs - lhs >= -tolerance * scale.

        scale defaults to max(1, |rhs|).
        """
        if tolerance is None:
            tolerance = get_settings().tolerance
        if scale is None:
            scale = max(1.0, abs(rhs))
        margin = rhs - lhs
        return cls(
            name=name,
            lhs=float(lhs),
            rhs=float(rhs),
            margin=float(margin),
            satisfied=bool(margin >= -tolerance * scale),
            out_of_regime=out_of_regime,
        )


@dataclass(frozen=True)
class BoundReport:
    regime: Regime
    tv: float
    l1: float
    delta0: float
    delta1: float
    delta2: float
    entries: Tuple[BoundEntry, ...]

    @property
    def out_of_regime(self) -> bool:
        return any(e.out_of_regime for e in self.entries)

    @property
    def all_satisfied(self) -> bool:
        return all(e.satisfied for e in self.entries)

    @property
    def worst(self) -> Optional[BoundEntry]:
        if not self.entries:
            return None
        return min(self.entries, key=lambda e: e.margin)


@dataclass(frozen=True)
class BkSequence:
    n: int
    by_recurrence: Tuple[float, ...]   # B_1..B_n
    by_closed_form: Tuple[float, ...]  # B_2..B_n
    sum_tail: float

    def recurrence(self, k: int) -> float:
        return self.by_recurrence[k - 1]

    def closed_form(self, k: int) -> float:
        return self.by_closed_form[k - 2]

    @property
    def target(self) -> float:
        return (self.n - 1) / self.n

    @property
    def max_relative_gap(self) -> float:
        gaps = [
            abs(self.recurrence(k) - self.closed_form(k)) / abs(self.closed_form(k))
            for k in range(2, self.n + 1)
        ]
        return max(gaps, default=0.0)


@dataclass(frozen=True)
class TVEnvelope:
    """Certified interval for TV that needs no enumeration"""

    lower: float
    upper: float
    lower_source: str
    upper_source: str


def _require_n(n: int, minimum: int, what: str) -> None:
    if n < minimum:
        raise NTooSmallError(f"{what} requires n >= {minimum}, got n={n}")


def _admit(pair: ParamPair, allowed: Callable[[Regime], bool], what: str,
           force: bool) -> Tuple[Regime, bool]:
    """Classify the pair; returns (regime, out_of_regime)"""
    regime = classify_regime(pair)
    if allowed(regime):
        return regime, False
    if not force:
        raise RegimeMismatchError(f"{what} does not apply to a {regime.tag.value} pair (n={pair.n})")
    logger.debug(f"Evaluating {what} out of regime ({regime.tag.value}, n={pair.n})")
    return regime, True


def _tiny(regime: Regime) -> bool:
    return regime.is_tiny


def _small(regime: Regime) -> bool:
    return regime.is_small


def delta1_closed_form(pair: ParamPair) -> float:
    """Delta_1 = sum_i |p_i P_{-i}(p) - q_i P_{-i}(q)| in O(n)"""
    rest_p = leave_one_out_products(pair.p.values)
    rest_q = leave_one_out_products(pair.q.values)
    return compensated_sum(
        abs(pi * float(rp) - qi * float(rq))
        for pi, qi, rp, rq in zip(pair.p.values, pair.q.values, rest_p, rest_q)
    )


def check_tiny_sandwich(pair: ParamPair, tv: float, force: bool = False) -> Tuple[BoundEntry, BoundEntry]:
    """1/4 ||p-q||_1 <= TV <= ||p-q||_1 on [0, 1/n^2]^n"""
    _, outside = _admit(pair, _tiny, "tiny sandwich", force)
    l1 = l1_distance(pair)
    return (
        BoundEntry.evaluate("tiny_lower", 0.25 * l1, tv, out_of_regime=outside),
        BoundEntry.evaluate("tiny_upper", tv, l1, out_of_regime=outside),
    )


def check_tiny_lemmas(pair: ParamPair, delta1: float, force: bool = False) -> List[BoundEntry]:
    """Intermediate steps of the tiny lower bound.

    P_{-i}(y) >= 3/4 for y in {p, q}; |P_{-i}(p) - P_{-i}(q)| <= sum_{k != i} |x_k|
    (reported for the tightest i); Delta_1 >= 1/2 ||p-q||_1.
    """
    _, outside = _admit(pair, _tiny, "tiny lemmas", force)
    rest_p = leave_one_out_products(pair.p.values)
    rest_q = leave_one_out_products(pair.q.values)
    floor = min(float(rest_p.min()), float(rest_q.min()))

    abs_x = [abs(v) for v in pair.x]
    lipschitz = None
    for i in range(pair.n):
        entry = BoundEntry.evaluate(
            "tiny_lipschitz",
            abs(float(rest_p[i]) - float(rest_q[i])),
            compensated_sum(v for k, v in enumerate(abs_x) if k != i),
            out_of_regime=outside,
        )
        if lipschitz is None or entry.margin < lipschitz.margin:
            lipschitz = entry

    return [
        BoundEntry.evaluate("tiny_product_floor", 0.75, floor, out_of_regime=outside),
        lipschitz,
        BoundEntry.evaluate("tiny_delta1_half_l1", 0.5 * compensated_sum(abs_x), delta1,
                            out_of_regime=outside),
    ]


def check_small_sandwich(pair: ParamPair, delta1: float, tv: float,
                         force: bool = False) -> Tuple[BoundEntry, BoundEntry]:
    """1/2 Delta_1 <= TV <= (2 - 1/n) Delta_1 on [0, 1/(2n)]^n, n >= 2"""
    _require_n(pair.n, 2, "small sandwich")
    _, outside = _admit(pair, _small, "small sandwich", force)
    n = pair.n
    return (
        BoundEntry.evaluate("small_lower", 0.5 * delta1, tv, out_of_regime=outside),
        BoundEntry.evaluate("small_upper", tv, (2.0 - 1.0 / n) * delta1, out_of_regime=outside),
    )


def check_delta0_bound(pair: ParamPair, delta0: float, delta1: float,
                       force: bool = False) -> BoundEntry:
    _require_n(pair.n, 2, "Delta_0 bound")
    _, outside = _admit(pair, _small, "Delta_0 bound", force)
    n = pair.n
    return BoundEntry.evaluate("delta0", delta0, (2 * n - 1) / n * delta1, out_of_regime=outside)


def delta2_coefficient(n: int) -> float:
    """3(n-1) / (2(2n-1))"""
    _require_n(n, 2, "Delta_2 coefficient")
    return 3 * (n - 1) / (2 * (2 * n - 1))


def check_delta2_bound(pair: ParamPair, delta2: float, delta1: float,
                       force: bool = False) -> BoundEntry:
    _require_n(pair.n, 2, "Delta_2 bound")
    _, outside = _admit(pair, _small, "Delta_2 bound", force)
    return BoundEntry.evaluate("delta2", delta2, delta2_coefficient(pair.n) * delta1,
                               out_of_regime=outside)


def k_of_n(n: int) -> float:
    """K(n) = (2n-1) / (n (1 - lambda_n)^(n-1)), the l1-versus-Delta_1 constant"""
    _require_n(n, 2, "K(n)")
    lam = 1.0 / (2 * n)
    return (2 * n - 1) / (n * (1.0 - lam) ** (n - 1))


def check_l1_control(pair: ParamPair, delta1: float, force: bool = False) -> BoundEntry:
    """||p-q||_1 <= K(n) Delta_1"""
    _require_n(pair.n, 2, "l1 control")
    _, outside = _admit(pair, _small, "l1 control", force)
    return BoundEntry.evaluate("l1_control", l1_distance(pair), k_of_n(pair.n) * delta1,
                               out_of_regime=outside)


def bk_sequence(n: int) -> BkSequence:
    """B_1..B_n by the recurrence and B_2..B_n by the closed form.

    The recurrence runs on U_k = B_k (2n-1)^(k-1), which satisfies
    U_1 = 1, U_k = ((n-k+1) U_{k-1} + 2 C(n-1, k-1)) / k, so each B_k is one
    division of a well-scaled number by an integer power built by repeated
    multiplication.
    """
    _require_n(n, 2, "B_k(n)")
    base = float(2 * n - 1)

    recurrence = [1.0]
    scaled = 1.0
    power = 1.0
    for k in range(2, n + 1):
        scaled = ((n - k + 1) * scaled + 2.0 * binomial(n - 1, k - 1)) / k
        power *= base
        recurrence.append(scaled / power)

    closed = []
    power = 1.0
    for k in range(2, n + 1):
        power *= base
        numerator = (2 * k - 1) * binomial(n - 2, k - 2) * (n - 1)
        closed.append(numerator / (k * (k - 1) * power))

    acc = KahanSum()
    for value in recurrence[1:]:
        acc.add(value)
    return BkSequence(
        n=n,
        by_recurrence=tuple(recurrence),
        by_closed_form=tuple(closed),
        sum_tail=acc.value,
    )


def bk_tail_sum_closed_form(n: int) -> float:
    """2(1+t)^(n-1) - 1 - ((1+t)^n - 1)/(n t) with t = 1/(2n-1); equals (n-1)/n"""
    _require_n(n, 2, "B_k tail sum")
    t = 1.0 / (2 * n - 1)
    return 2.0 * (1.0 + t) ** (n - 1) - 1.0 - ((1.0 + t) ** n - 1.0) / (n * t)


def check_universal_slice_bounds(pair: ParamPair, report: SliceReport,
                                 force: bool = False) -> List[BoundEntry]:
    """Delta_k <= B_k(n) Delta_1 for k = 2..n, then sum_{k>=2} Delta_k <= (n-1)/n Delta_1"""
    _require_n(pair.n, 2, "universal slice bounds")
    _, outside = _admit(pair, _small, "universal slice bounds", force)
    n = pair.n
    delta1 = report.delta[1]
    bk = bk_sequence(n)
    entries = [
        BoundEntry.evaluate(f"slice_{k}", report.delta[k], bk.recurrence(k) * delta1,
                            out_of_regime=outside)
        for k in range(2, n + 1)
    ]
    tail = compensated_sum(report.delta[2:])
    entries.append(BoundEntry.evaluate("slice_tail", tail, (n - 1) / n * delta1,
                                       out_of_regime=outside))
    return entries


def check_recursive_slice_bounds(pair: ParamPair, report: SliceReport,
                                 force: bool = False) -> List[BoundEntry]:
    """k Delta_k <= beta_n (n-k+1) Delta_{k-1} + C(n-1,k-1) lambda_n^(k-1) (1-lambda_n)^(n-k-1) K(n) Delta_1"""
    _require_n(pair.n, 2, "recursive slice bounds")
    regime, outside = _admit(pair, _small, "recursive slice bounds", force)
    n = pair.n
    lam, beta = regime.lambda_n, regime.beta_n
    k_const = k_of_n(n)
    delta = report.delta
    entries = []
    for k in range(2, n + 1):
        tail = binomial(n - 1, k - 1) * lam ** (k - 1) * (1.0 - lam) ** (n - k - 1) * k_const
        rhs = beta * (n - k + 1) * delta[k - 1] + tail * delta[1]
        entries.append(BoundEntry.evaluate(f"recursive_{k}", k * delta[k], rhs, out_of_regime=outside))
    return entries


def check_slice_total(pair: ParamPair, report: SliceReport, force: bool = False) -> BoundEntry:
    """sum_k Delta_k <= (4 - 2/n) Delta_1"""
    _require_n(pair.n, 2, "slice total")
    _, outside = _admit(pair, _small, "slice total", force)
    return BoundEntry.evaluate("slice_total", report.slice_sum,
                               (4.0 - 2.0 / pair.n) * report.delta[1], out_of_regime=outside)


def delta2_auxiliary_identity(pair: ParamPair, a: int, b: int, strict: bool = False) -> float:
    """Residual of beta/2 (delta_a + delta_b) - delta_ab = 1/2 (S(p;a,b) - S(q;a,b)).

    Also checks the odds expansion of Delta S_ab when o_a(p) and o_b(q) exist and
    returns the larger residual. When p_a = 1 or q_b = 1 the expansion is skipped
    (or OddsUndefinedError is raised with strict=True).
    """
    n = pair.n
    if not (1 <= a < b <= n):
        raise IndexOutOfRangeError(f"need 1 <= a < b <= {n}, got a={a}, b={b}")
    beta = 1.0 / (2 * n - 1)
    single_a = SubsetIndex.from_members((a,), n)
    single_b = SubsetIndex.from_members((b,), n)
    double = SubsetIndex.from_members((a, b), n)
    empty = SubsetIndex(n=n, mask=0)

    def auxiliary(y) -> float:
        return beta * (atom_mass(y, single_a) + atom_mass(y, single_b)) - 2.0 * atom_mass(y, double)

    delta_a = slice_delta(pair, single_a)
    delta_b = slice_delta(pair, single_b)
    delta_ab = slice_delta(pair, double)
    delta_s = auxiliary(pair.p) - auxiliary(pair.q)
    residual = abs(0.5 * beta * (delta_a + delta_b) - delta_ab - 0.5 * delta_s)

    pa, qb = pair.p[a - 1], pair.q[b - 1]
    if pa >= 1.0 or qb >= 1.0:
        if strict:
            raise OddsUndefinedError(f"odds undefined for p_{a}={pa!r} or q_{b}={qb!r}")
        logger.debug(f"Skipping odds expansion for (a, b) = ({a}, {b})")
        return residual

    odds_a = pa / (1.0 - pa)
    odds_b = qb / (1.0 - qb)
    delta_empty = slice_delta(pair, empty)
    expanded = ((beta - 2.0 * odds_b) * delta_a + (beta - 2.0 * odds_a) * delta_b
                + 2.0 * odds_a * odds_b * delta_empty)
    return max(residual, abs(delta_s - expanded))


def tv_envelope(pair: ParamPair, delta1: Optional[float] = None) -> TVEnvelope:
    """Best enumeration-free interval for TV from the bounds this package proves or uses"""
    from bhattacharyya import is_symmetric, quasi_symmetry, tv_bc_bound

    regime = classify_regime(pair)
    n = pair.n
    if delta1 is None:
        delta1 = delta1_closed_form(pair)
    l1 = l1_distance(pair)

    # TV = 1/2 sum_k Delta_k >= 1/2 Delta_1 holds for every pair
    lowers = [("slice_1", 0.5 * delta1)]
    uppers = [("trivial", 1.0), ("l1", l1), ("bhattacharyya", tv_bc_bound(pair))]
    if regime.is_tiny:
        lowers.append(("tiny_lower", 0.25 * l1))
    if regime.is_small:
        uppers.append(("small_upper", (2.0 - 1.0 / n) * delta1))
    if quasi_symmetry(pair).is_quasi_symmetric:
        uppers.append(("sqrt2_l2", math.sqrt(2.0) * l2_distance(pair)))
    if is_symmetric(pair):
        uppers.append(("symmetric_l2", l2_distance(pair)))

    lower_source, lower = max(lowers, key=lambda item: item[1])
    upper_source, upper = min(uppers, key=lambda item: item[1])
    return TVEnvelope(lower=lower, upper=upper, lower_source=lower_source, upper_source=upper_source)


def evaluate_bounds(pair: ParamPair, report: SliceReport, force: bool = False) -> BoundReport:
    """Every bound that applies to the pair, evaluated against the enumeration oracle.

    With force=True the regime-specific checks run regardless of regime (n >= 2 still
    required for the small-regime family) and are marked out_of_regime.
    """
    from bhattacharyya import check_sqrt2_bound, check_symmetric_l2_bound, is_symmetric, quasi_symmetry, tv_bc_bound

    regime = classify_regime(pair)
    n = pair.n
    tv = report.tv_exact
    delta = report.delta
    delta1 = delta[1]
    l1 = l1_distance(pair)

    entries: List[BoundEntry] = [
        BoundEntry.evaluate("slice_identity", report.identity_residual, 0.0,
                            scale=max(1.0, 2.0 * tv)),
        BoundEntry.evaluate("tv_le_l1", tv, l1),
        BoundEntry.evaluate("tv_le_bhattacharyya", tv, tv_bc_bound(pair)),
    ]
    if regime.is_tiny or force:
        entries.extend(check_tiny_sandwich(pair, tv, force=force))
        entries.extend(check_tiny_lemmas(pair, delta1, force=force))
    if n >= 2 and (regime.is_small or force):
        entries.extend(check_small_sandwich(pair, delta1, tv, force=force))
        entries.append(check_delta0_bound(pair, delta[0], delta1, force=force))
        entries.append(check_delta2_bound(pair, delta[2], delta1, force=force))
        entries.append(check_l1_control(pair, delta1, force=force))
        entries.extend(check_universal_slice_bounds(pair, report, force=force))
        entries.extend(check_recursive_slice_bounds(pair, report, force=force))
        entries.append(check_slice_total(pair, report, force=force))
    if quasi_symmetry(pair).is_quasi_symmetric or force:
        entries.append(check_sqrt2_bound(pair, tv, force=force))
    if is_symmetric(pair):
        entries.append(check_symmetric_l2_bound(pair, tv))

    return BoundReport(
        regime=regime,
        tv=tv,
        l1=l1,
        delta0=delta[0],
        delta1=delta1,
        delta2=delta[2] if n >= 2 else 0.0,
        entries=tuple(entries),
    )
