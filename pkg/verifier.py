"""Seeded randomized verification of every bound and identity against the enumeration
oracle.

Each trial t draws from its own Philox stream keyed by (seed, t), so a run is
reproducible bit for bit and does not depend on how trials are spread over workers.
"""

import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Callable, Dict, List, Optional

import numpy as np

from bhattacharyya import (
    bhattacharyya_atom_sum,
    bhattacharyya_coefficient,
    check_one_d_bound,
    check_sqrt2_bound,
    check_symmetric_l2_bound,
    one_d_coefficient,
    one_d_identity_residual,
    straddle_inner_product,
    tv_bc_bound,
    weakest_link_slack,
)
from bounds import (
    BoundEntry,
    bk_sequence,
    bk_tail_sum_closed_form,
    check_delta0_bound,
    check_delta2_bound,
    check_l1_control,
    check_recursive_slice_bounds,
    check_slice_total,
    check_small_sandwich,
    check_tiny_lemmas,
    check_tiny_sandwich,
    check_universal_slice_bounds,
    delta1_closed_form,
    delta2_auxiliary_identity,
)
from core import ParamPair, ParamVec, l1_distance, l2_distance, small_bound, tiny_bound
from enumeration import full_slice_report, tv_exact
from errors import DimensionTooLargeError, InvalidParameterError, NTooSmallError
from poisson_binomial import (
    FINITE_DIFFERENCE_STEP,
    MONOTONE_SLACK,
    OddsVec,
    PoissonBinomial,
    pmf,
    pmf_central_difference,
    pmf_coordinate_derivative,
    pmf_extremal_bound,
    pmf_is_nonincreasing,
)
from settings import get_settings

logger = logging.getLogger(__name__)

DERIVATIVE_TOLERANCE = 1e-8
BOUNDARY_FRACTION = 0.5


class TheoremId(str, Enum):
    TINY_SANDWICH = "TinySandwich"
    SMALL_SANDWICH = "SmallSandwich"
    DELTA0 = "Delta0"
    DELTA2 = "Delta2"
    L1_DELTA1 = "L1Delta1"
    UNIVERSAL_SLICES = "UniversalSlices"
    SUM_SLICES = "SumSlices"
    PBIN_EXTREMUM = "PbinExtremum"
    PBIN_MONOTONE = "PbinMonotone"
    SQRT2 = "Sqrt2"
    BC_TENSOR = "BCTensor"
    SLICE_IDENTITY = "SliceIdentity"
    AUX_IDENTITY = "AuxIdentity"
    ONE_D_IDENTITY = "OneDIdentity"
    TINY_LEMMAS = "TinyLemmas"
    RECURSIVE_SLICES = "RecursiveSlices"
    SLICE_TOTAL = "SliceTotal"
    TV_BC = "TVBC"
    ONE_D_BOUND = "OneDBound"
    PBIN_DERIVATIVE = "PbinDerivative"
    SYMMETRIC_L2 = "SymmetricL2"
    BK_SUMMATION = "BkSummation"

    @classmethod
    def parse(cls, name: str) -> "TheoremId":
        for member in cls:
            if member.value.lower() == name.lower():
                return member
        raise InvalidParameterError(f"unknown theorem id: {name}")


class SamplingRegime(str, Enum):
    TINY = "tiny"
    SMALL = "small"
    GENERAL = "general"
    QUASI_SYMMETRIC = "quasi_symmetric"
    SYMMETRIC = "symmetric"


@dataclass(frozen=True)
class VerifyRun:
    theorem_id: TheoremId
    n_min: int
    n_max: int
    trials: int
    seed: int
    violations: int
    worst_margin: float
    worst_case: Optional[ParamPair]
    worst_trial: Optional[int]
    sampling_regime: SamplingRegime
    boundary_biased: bool = False
    out_of_regime: bool = False

    @property
    def passed(self) -> bool:
        return self.violations == 0


Evaluator = Callable[[ParamPair, bool, Optional[int]], List[BoundEntry]]


@dataclass(frozen=True)
class TheoremSpec:
    theorem_id: TheoremId
    regime: SamplingRegime
    n_min: int
    enumerates: bool
    evaluate: Evaluator


def trial_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent counter-based stream for one trial, keyed by (seed, *key)"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(key))))


def _box(n: int, regime: SamplingRegime) -> float:
    if regime is SamplingRegime.TINY:
        return tiny_bound(n)
    if regime is SamplingRegime.SMALL:
        return small_bound(n)
    return 1.0


def sample_pair(n: int, regime: SamplingRegime, rng: np.random.Generator,
                boundary_biased: bool = False) -> ParamPair:
    """Draw (p, q) for the given sampling regime.

    Box regimes draw every entry uniformly in [0, bound]. Quasi-symmetric draws
    p_i in [1/2, 1], q_i in [0, 1/2] and then reflects each coordinate jointly with
    probability 1/2. Symmetric draws p uniformly and sets q = 1 - p.

    With boundary_biased=True a random subset of entries is pinned to the regime
    boundary: the box bound (0 or 1 for the general box), (1, 1/2) for a
    quasi-symmetric coordinate, and an endpoint or 1/2 for a symmetric one.
    """
    regime = SamplingRegime(regime)
    if n < 1:
        raise NTooSmallError(f"sampling requires n >= 1, got n={n}")
    if regime is SamplingRegime.SMALL and n < 2:
        raise NTooSmallError(f"small-regime sampling requires n >= 2, got n={n}")

    if regime is SamplingRegime.QUASI_SYMMETRIC:
        p = rng.uniform(0.5, 1.0, size=n)
        q = rng.uniform(0.0, 0.5, size=n)
        if boundary_biased:
            pinned = rng.random(n) < BOUNDARY_FRACTION
            p[pinned] = 1.0
            q[pinned] = 0.5
        flip = rng.random(n) < 0.5
        p[flip], q[flip] = 1.0 - p[flip], 1.0 - q[flip]
    elif regime is SamplingRegime.SYMMETRIC:
        p = rng.uniform(0.0, 1.0, size=n)
        if boundary_biased:
            pinned = rng.random(n) < BOUNDARY_FRACTION
            p[pinned] = rng.choice([0.0, 0.5, 1.0], size=int(pinned.sum()))
        q = 1.0 - p
    else:
        bound = _box(n, regime)
        p = rng.uniform(0.0, bound, size=n)
        q = rng.uniform(0.0, bound, size=n)
        if boundary_biased:
            pinned_p = rng.random(n) < BOUNDARY_FRACTION
            pinned_q = rng.random(n) < BOUNDARY_FRACTION
            if regime is SamplingRegime.GENERAL:
                p[pinned_p] = rng.choice([0.0, 1.0], size=int(pinned_p.sum()))
                q[pinned_q] = rng.choice([0.0, 1.0], size=int(pinned_q.sum()))
            else:
                p[pinned_p] = bound
                q[pinned_q] = bound
    return ParamPair(ParamVec(tuple(p.tolist())), ParamVec(tuple(q.tolist())))


# evaluators: one per theorem id, each returning the entries of one trial

def _tiny_sandwich(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    return list(check_tiny_sandwich(pair, tv_exact(pair, limit=limit), force=force))


def _tiny_lemmas(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    return check_tiny_lemmas(pair, delta1_closed_form(pair), force=force)


def _small_sandwich(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    tv = tv_exact(pair, limit=limit)
    return list(check_small_sandwich(pair, delta1_closed_form(pair), tv, force=force))


def _delta0(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    report = full_slice_report(pair, limit=limit)
    return [check_delta0_bound(pair, report.delta[0], report.delta[1], force=force)]


def _delta2(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    report = full_slice_report(pair, limit=limit)
    return [check_delta2_bound(pair, report.delta[2], report.delta[1], force=force)]


def _l1_delta1(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    return [check_l1_control(pair, delta1_closed_form(pair), force=force)]


def _universal_slices(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    return check_universal_slice_bounds(pair, full_slice_report(pair, limit=limit), force=force)[:-1]


def _sum_slices(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    return check_universal_slice_bounds(pair, full_slice_report(pair, limit=limit), force=force)[-1:]


def _recursive_slices(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    return check_recursive_slice_bounds(pair, full_slice_report(pair, limit=limit), force=force)


def _slice_total(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    return [check_slice_total(pair, full_slice_report(pair, limit=limit), force=force)]


def _pbin_extremum(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    # the small box [0, 1/(2N)] is stretched onto [0, lam]: max(q) fixes lam in
    # (0, 1/(N+1)] and p fixes r, so pinned entries reach the cap and the corner r = lam
    N = pair.n
    box = small_bound(N)
    cap = 1.0 / (N + 1)
    outside = pair.max_entry() > box
    if outside:
        r = pair.p.values
        lam = min(max(r), cap)
    else:
        lam = min(cap, cap * max(pair.q.values) / box)
        r = tuple(min(lam, pi / box * lam) for pi in pair.p)
    f = pmf(PoissonBinomial.of(r))
    return [
        BoundEntry.evaluate(f"pbin_extremum_{m}", float(f[m]), pmf_extremal_bound(N, lam, m),
                            out_of_regime=outside)
        for m in range(1, N + 1)
    ]


def _pbin_monotone(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    outside = any(r >= 1.0 for r in pair.p) or OddsVec.from_probabilities(pair.p.values).total > 1.0
    result = pmf_is_nonincreasing(PoissonBinomial(pair.p), force=outside)
    return [BoundEntry.evaluate("pbin_monotone", result.max_increase, 0.0,
                                tolerance=MONOTONE_SLACK, scale=1.0, out_of_regime=outside)]


def _pbin_derivative(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    pb = PoissonBinomial(pair.p)
    entries = []
    for j in range(1, pb.N + 1):
        for m in range(pb.N + 1):
            gap = abs(pmf_coordinate_derivative(pb, j, m)
                      - pmf_central_difference(pb, j, m, FINITE_DIFFERENCE_STEP))
            entries.append(BoundEntry.evaluate(f"pbin_derivative_{j}_{m}", gap, DERIVATIVE_TOLERANCE,
                                               tolerance=0.0))
    return entries


def _sqrt2(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    return [check_sqrt2_bound(pair, tv_exact(pair, limit=limit), force=force)]


def _symmetric_l2(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    return [check_symmetric_l2_bound(pair, tv_exact(pair, limit=limit), force=force)]


def _bc_tensor(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    product = bhattacharyya_coefficient(pair)
    atoms = bhattacharyya_atom_sum(pair, limit=limit)
    scale = product if product > 0.0 else 1.0
    return [BoundEntry.evaluate("bc_tensor", abs(atoms - product), 0.0, scale=scale)]


def _tv_bc(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    return [BoundEntry.evaluate("tv_bc", tv_exact(pair, limit=limit), tv_bc_bound(pair))]


def _slice_identity(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    report = full_slice_report(pair, limit=limit)
    return [BoundEntry.evaluate("slice_identity", report.identity_residual, 0.0,
                                scale=max(1.0, 2.0 * report.tv_exact))]


def _aux_identity(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    return [
        BoundEntry.evaluate(f"aux_identity_{a}_{b}", delta2_auxiliary_identity(pair, a, b), 0.0)
        for a, b in combinations(range(1, pair.n + 1), 2)
    ]


def _one_d_identity(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    return [
        BoundEntry.evaluate("one_d_identity", one_d_identity_residual(pi, qi), 0.0)
        for pi, qi in zip(pair.p, pair.q)
    ]


def _one_d_bound(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    entries = []
    for pi, qi in zip(pair.p, pair.q):
        entry = check_one_d_bound(pi, qi, force=force)
        entries.append(entry)
        entries.append(BoundEntry.evaluate("straddle_angle", 1.0 / math.sqrt(2.0),
                                           straddle_inner_product(pi, qi),
                                           out_of_regime=entry.out_of_regime))
    factors = [one_d_coefficient(pi, qi) for pi, qi in zip(pair.p, pair.q)]
    entries.append(BoundEntry.evaluate("weakest_link", 0.0, weakest_link_slack(factors)))
    return entries


def _bk_summation(pair: ParamPair, force: bool, limit: Optional[int]) -> List[BoundEntry]:
    n = pair.n
    bk = bk_sequence(n)
    return [
        BoundEntry.evaluate("bk_closed_form", bk.max_relative_gap, 0.0),
        BoundEntry.evaluate("bk_sum_tail", abs(bk.sum_tail - bk.target), 0.0),
        BoundEntry.evaluate("bk_generating_function", abs(bk_tail_sum_closed_form(n) - bk.target), 0.0),
    ]


_T = TheoremId
_R = SamplingRegime

THEOREMS: Dict[TheoremId, TheoremSpec] = {
    spec.theorem_id: spec
    for spec in (
        TheoremSpec(_T.TINY_SANDWICH, _R.TINY, 1, True, _tiny_sandwich),
        TheoremSpec(_T.SMALL_SANDWICH, _R.SMALL, 2, True, _small_sandwich),
        TheoremSpec(_T.DELTA0, _R.SMALL, 2, True, _delta0),
        TheoremSpec(_T.DELTA2, _R.SMALL, 2, True, _delta2),
        TheoremSpec(_T.L1_DELTA1, _R.SMALL, 2, False, _l1_delta1),
        TheoremSpec(_T.UNIVERSAL_SLICES, _R.SMALL, 2, True, _universal_slices),
        TheoremSpec(_T.SUM_SLICES, _R.SMALL, 2, True, _sum_slices),
        TheoremSpec(_T.PBIN_EXTREMUM, _R.SMALL, 2, False, _pbin_extremum),
        TheoremSpec(_T.PBIN_MONOTONE, _R.SMALL, 2, False, _pbin_monotone),
        TheoremSpec(_T.SQRT2, _R.QUASI_SYMMETRIC, 1, True, _sqrt2),
        TheoremSpec(_T.BC_TENSOR, _R.GENERAL, 1, True, _bc_tensor),
        TheoremSpec(_T.SLICE_IDENTITY, _R.GENERAL, 1, True, _slice_identity),
        TheoremSpec(_T.AUX_IDENTITY, _R.SMALL, 2, False, _aux_identity),
        TheoremSpec(_T.ONE_D_IDENTITY, _R.GENERAL, 1, False, _one_d_identity),
        TheoremSpec(_T.TINY_LEMMAS, _R.TINY, 1, False, _tiny_lemmas),
        TheoremSpec(_T.RECURSIVE_SLICES, _R.SMALL, 2, True, _recursive_slices),
        TheoremSpec(_T.SLICE_TOTAL, _R.SMALL, 2, True, _slice_total),
        TheoremSpec(_T.TV_BC, _R.GENERAL, 1, True, _tv_bc),
        TheoremSpec(_T.ONE_D_BOUND, _R.QUASI_SYMMETRIC, 1, False, _one_d_bound),
        TheoremSpec(_T.PBIN_DERIVATIVE, _R.SMALL, 2, False, _pbin_derivative),
        TheoremSpec(_T.SYMMETRIC_L2, _R.SYMMETRIC, 1, True, _symmetric_l2),
        TheoremSpec(_T.BK_SUMMATION, _R.SMALL, 2, False, _bk_summation),
    )
}


@dataclass(frozen=True)
class _TrialOutcome:
    trial: int
    pair: ParamPair
    margin: float
    violated: bool


def _run_trial(spec: TheoremSpec, regime: SamplingRegime, force: bool, n_min: int,
               n_max: int, seed: int, boundary_biased: bool, limit: int, trial: int) -> _TrialOutcome:
    rng = trial_rng(seed, trial)
    n = int(rng.integers(n_min, n_max + 1))
    pair = sample_pair(n, regime, rng, boundary_biased)
    entries = spec.evaluate(pair, force, limit)
    worst = min(entries, key=lambda e: e.margin)
    violated = not all(e.satisfied for e in entries)
    if violated:
        logger.debug(f"{spec.theorem_id.value} trial {trial} (n={n}): {worst.name} margin {worst.margin!r}")
    return _TrialOutcome(trial=trial, pair=pair, margin=worst.margin, violated=violated)


def run_verification(theorem_id: TheoremId, n_min: int, n_max: int, trials: int, seed: int,
                     boundary_biased: bool = False, sample_regime: Optional[SamplingRegime] = None,
                     workers: Optional[int] = None, limit: Optional[int] = None) -> VerifyRun:
    """Run `trials` seeded trials of one theorem and aggregate the margins.

    Args:
        theorem_id: Theorem to check
        n_min, n_max: Inclusive range n is drawn from, once per trial
        trials: Number of trials
        seed: Root seed; trial t uses the stream (seed, t)
        boundary_biased: Pin random entries to the regime boundary
        sample_regime: Sample from this regime instead of the theorem's own; checks
                       are then forced and the run is marked out of regime
        workers: Trial workers (default from settings)
        limit: Enumeration limit (default from settings)

    Returns:
        VerifyRun; worst_case is kept only when a violation occurred
    """
    theorem_id = TheoremId(theorem_id)
    spec = THEOREMS[theorem_id]
    settings = get_settings()
    regime = SamplingRegime(sample_regime) if sample_regime is not None else spec.regime
    force = regime is not spec.regime

    if trials < 0:
        raise InvalidParameterError(f"trials must be non-negative, got {trials}")
    if n_max < n_min:
        raise InvalidParameterError(f"empty n range [{n_min}, {n_max}]")
    minimum = max(spec.n_min, 2 if regime is SamplingRegime.SMALL else 1)
    if n_min < minimum:
        raise NTooSmallError(f"{theorem_id.value} requires n >= {minimum}, got n_min={n_min}")
    limit = settings.enumeration_limit if limit is None else limit
    if spec.enumerates and n_max > limit:
        raise DimensionTooLargeError(n_max, limit)
    workers = workers or settings.verify_workers

    logger.info(
        f"Verifying {theorem_id.value}: n in [{n_min}, {n_max}], {trials} trials, seed {seed}, "
        f"{regime.value} sampling{' (boundary-biased)' if boundary_biased else ''}"
    )

    def run(trial: int) -> _TrialOutcome:
        return _run_trial(spec, regime, force, n_min, n_max, seed, boundary_biased, limit, trial)

    if workers > 1 and trials > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, range(trials)))
    else:
        outcomes = [run(trial) for trial in range(trials)]

    violations = sum(1 for o in outcomes if o.violated)
    worst_margin = min((o.margin for o in outcomes), default=math.inf)
    worst_violation = None
    if violations:
        # ties go to the lowest trial index
        worst_violation = min((o for o in outcomes if o.violated), key=lambda o: (o.margin, o.trial))
        logger.warning(f"{theorem_id.value}: {violations} violation(s) in {trials} trials")

    return VerifyRun(
        theorem_id=theorem_id,
        n_min=n_min,
        n_max=n_max,
        trials=trials,
        seed=seed,
        violations=violations,
        worst_margin=worst_margin,
        worst_case=worst_violation.pair if worst_violation else None,
        worst_trial=worst_violation.trial if worst_violation else None,
        sampling_regime=regime,
        boundary_biased=boundary_biased,
        out_of_regime=force,
    )


def run_all(n_min: int, n_max: int, trials: int, seed: int, boundary_biased: bool = False,
            workers: Optional[int] = None, limit: Optional[int] = None) -> List[VerifyRun]:
    """Every theorem in its own regime, with n_min raised to what each theorem admits"""
    runs = []
    for theorem_id, spec in THEOREMS.items():
        low = max(n_min, spec.n_min)
        high = max(n_max, low)
        runs.append(run_verification(theorem_id, low, high, trials, seed,
                                     boundary_biased=boundary_biased, workers=workers, limit=limit))
    return runs


@dataclass(frozen=True)
class SweepRow:
    n: int
    trial: int
    tv: float
    delta1: float
    l1: float
    l2: float

    @property
    def ratio_tv_delta1(self) -> float:
        return self.tv / self.delta1 if self.delta1 > 0.0 else math.nan

    @property
    def ratio_tv_l1(self) -> float:
        return self.tv / self.l1 if self.l1 > 0.0 else math.nan


def run_sweep(regime: SamplingRegime, n_list: List[int], trials: int, seed: int,
              boundary_biased: bool = False, limit: Optional[int] = None) -> List[SweepRow]:
    """Exact TV against Delta_1 and the l1/l2 distances for `trials` pairs per n.

    Pairs for dimension n come from the streams (seed, n, trial), so adding or
    removing an n from the list leaves the other groups unchanged.
    """
    regime = SamplingRegime(regime)
    rows = []
    for n in n_list:
        logger.info(f"Sweeping n={n}: {trials} {regime.value} pairs")
        for trial in range(trials):
            pair = sample_pair(n, regime, trial_rng(seed, n, trial), boundary_biased)
            rows.append(SweepRow(
                n=n,
                trial=trial,
                tv=tv_exact(pair, limit=limit),
                delta1=delta1_closed_form(pair),
                l1=l1_distance(pair),
                l2=l2_distance(pair),
            ))
    return rows
