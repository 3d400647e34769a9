import math

import numpy as np
import pytest

from bhattacharyya import is_symmetric, quasi_symmetry
from core import ParamPair, small_bound, tiny_bound
from errors import DimensionTooLargeError, InvalidParameterError, NTooSmallError
from poisson_binomial import pmf_extremal_bound
from settings import get_settings, use_settings
from verifier import (
    THEOREMS,
    SamplingRegime,
    TheoremId,
    run_all,
    run_sweep,
    run_verification,
    sample_pair,
    trial_rng,
)


class TestSamplePair:
    @pytest.mark.parametrize("n", [1, 2, 4, 9])
    def test_tiny_box(self, n):
        rng = np.random.default_rng(42)
        for _ in range(100):
            pair = sample_pair(n, SamplingRegime.TINY, rng)
            assert pair.n == n
            assert pair.max_entry() <= tiny_bound(n)

    @pytest.mark.parametrize("n", [2, 3, 10])
    def test_small_box(self, n):
        rng = np.random.default_rng(42)
        for _ in range(100):
            assert sample_pair(n, SamplingRegime.SMALL, rng).max_entry() <= small_bound(n)

    def test_small_needs_two_coordinates(self):
        with pytest.raises(NTooSmallError):
            sample_pair(1, SamplingRegime.SMALL, np.random.default_rng(0))
        with pytest.raises(NTooSmallError):
            sample_pair(0, SamplingRegime.GENERAL, np.random.default_rng(0))

    def test_quasi_symmetric_and_symmetric(self):
        rng = np.random.default_rng(42)
        for n in range(1, 8):
            for boundary_biased in (False, True):
                pair = sample_pair(n, SamplingRegime.QUASI_SYMMETRIC, rng, boundary_biased)
                assert quasi_symmetry(pair).is_quasi_symmetric
                pair = sample_pair(n, SamplingRegime.SYMMETRIC, rng, boundary_biased)
                assert is_symmetric(pair)

    def test_boundary_bias_hits_the_box_edge(self):
        rng = np.random.default_rng(42)
        n = 6
        hits = 0
        for _ in range(20):
            pair = sample_pair(n, SamplingRegime.SMALL, rng, boundary_biased=True)
            assert pair.max_entry() <= small_bound(n)
            hits += sum(v == small_bound(n) for v in pair.p.values + pair.q.values)
        assert hits > 0

    def test_same_stream_same_pair(self):
        a = sample_pair(5, SamplingRegime.GENERAL, trial_rng(123, 7))
        b = sample_pair(5, SamplingRegime.GENERAL, trial_rng(123, 7))
        c = sample_pair(5, SamplingRegime.GENERAL, trial_rng(123, 8))
        assert a == b
        assert a != c


class TestRunVerification:
    def test_slice_identity(self):
        run = run_verification(TheoremId.SLICE_IDENTITY, 1, 8, 50, seed=42)
        assert run.passed
        assert run.worst_case is None and run.worst_trial is None
        assert not run.out_of_regime

    def test_small_sandwich(self):
        run = run_verification(TheoremId.SMALL_SANDWICH, 2, 8, 200, seed=42)
        assert run.violations == 0
        assert run.sampling_regime is SamplingRegime.SMALL

    def test_deterministic_for_seed(self):
        a = run_verification(TheoremId.SQRT2, 1, 6, 40, seed=2024)
        b = run_verification(TheoremId.SQRT2, 1, 6, 40, seed=2024)
        assert a == b

    def test_independent_of_worker_count(self):
        a = run_verification(TheoremId.TV_BC, 1, 6, 40, seed=9, workers=1)
        b = run_verification(TheoremId.TV_BC, 1, 6, 40, seed=9, workers=4)
        assert a == b

    def test_forced_sampling_is_marked(self):
        run = run_verification(TheoremId.SMALL_SANDWICH, 2, 4, 20, seed=1, sample_regime=SamplingRegime.GENERAL)
        assert run.out_of_regime
        assert run.sampling_regime is SamplingRegime.GENERAL
        assert run.trials == 20

    def test_n_too_small(self):
        with pytest.raises(NTooSmallError):
            run_verification(TheoremId.SMALL_SANDWICH, 1, 3, 10, seed=0)

    def test_dimension_limit(self):
        with pytest.raises(DimensionTooLargeError):
            run_verification(TheoremId.SLICE_IDENTITY, 2, 8, 5, seed=0, limit=6)
        run = run_verification(TheoremId.L1_DELTA1, 2, 40, 5, seed=0, limit=6)
        assert run.passed

    def test_explicit_limit_reaches_the_trials(self):
        use_settings(get_settings().with_overrides(enumeration_limit=6))
        run = run_verification(TheoremId.SLICE_IDENTITY, 2, 9, 10, seed=5, limit=10)
        assert run.passed
        assert run.n_max == 9
        with pytest.raises(DimensionTooLargeError):
            run_verification(TheoremId.SLICE_IDENTITY, 2, 9, 10, seed=5)

    def test_invalid_ranges(self):
        with pytest.raises(InvalidParameterError):
            run_verification(TheoremId.SLICE_IDENTITY, 5, 3, 10, seed=0)
        with pytest.raises(InvalidParameterError):
            run_verification(TheoremId.SLICE_IDENTITY, 1, 3, -1, seed=0)

    def test_zero_trials(self):
        run = run_verification(TheoremId.SLICE_IDENTITY, 1, 3, 0, seed=0)
        assert run.passed
        assert math.isinf(run.worst_margin)


def test_run_all():
    runs = run_all(2, 5, 5, seed=7)
    assert len(runs) == len(THEOREMS) == 22
    assert [run.theorem_id for run in runs] == list(THEOREMS)
    for run in runs:
        assert run.passed, run.theorem_id


def test_theorem_parse():
    assert TheoremId.parse("sqrt2") is TheoremId.SQRT2
    assert TheoremId.parse("TVBC") is TheoremId.TV_BC
    with pytest.raises(InvalidParameterError):
        TheoremId.parse("Nope")


def test_sweep():
    rows = run_sweep(SamplingRegime.SMALL, [2, 3, 6], 10, seed=3)
    assert len(rows) == 30
    for row in rows:
        assert 0.5 - 1e-12 <= row.ratio_tv_delta1 <= 2.0 - 1.0 / row.n + 1e-12
        assert row.tv <= row.l1 + 1e-12
    again = run_sweep(SamplingRegime.SMALL, [6], 10, seed=3)
    assert again == rows[-10:]


class TestPoissonBinomialTheorems:
    def test_extremum_reaches_the_cap(self):
        N = 5
        corner = [small_bound(N)] * N
        entries = THEOREMS[TheoremId.PBIN_EXTREMUM].evaluate(ParamPair.from_lists(corner, corner), False, None)
        assert len(entries) == N
        for m, entry in enumerate(entries, start=1):
            assert entry.rhs == pytest.approx(pmf_extremal_bound(N, 1.0 / (N + 1), m), rel=1e-12)
            assert entry.lhs == pytest.approx(entry.rhs, rel=1e-12)
            assert entry.satisfied

    def test_extremum_boundary_biased(self):
        run = run_verification(TheoremId.PBIN_EXTREMUM, 2, 10, 200, seed=8, boundary_biased=True)
        assert run.passed

    def test_monotone_in_regime(self):
        run = run_verification(TheoremId.PBIN_MONOTONE, 2, 10, 200, seed=8)
        assert run.passed
        assert not run.out_of_regime

    def test_monotone_outside_the_odds_hypothesis(self):
        entries = THEOREMS[TheoremId.PBIN_MONOTONE].evaluate(ParamPair.from_lists([0.6, 0.6], [0.0, 0.0]), False, None)
        assert len(entries) == 1
        assert entries[0].out_of_regime
        assert not entries[0].satisfied
        assert entries[0].lhs == pytest.approx(0.32)
        run = run_verification(TheoremId.PBIN_MONOTONE, 2, 5, 20, seed=1, sample_regime=SamplingRegime.GENERAL)
        assert run.out_of_regime
