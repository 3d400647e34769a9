import numpy as np
import pytest

from core import ParamPair, SubsetIndex
from enumeration import (
    atom_sum,
    full_slice_report,
    iter_k_subsets,
    slice_delta,
    slice_discrepancy,
    tv_exact,
)
from errors import DimensionMismatchError, DimensionTooLargeError, IndexOutOfRangeError


def random_pair(rng, n, bound=1.0):
    return ParamPair.from_lists(rng.uniform(0.0, bound, size=n).tolist(),
                                rng.uniform(0.0, bound, size=n).tolist())


class TestTvExact:
    def test_two_coordinate_swap(self):
        pair = ParamPair.from_lists([0.1, 0.2], [0.2, 0.1])
        assert tv_exact(pair) == pytest.approx(0.1, abs=1e-15)

    def test_equal_measures(self):
        pair = ParamPair.from_lists([0.3, 0.7, 0.1], [0.3, 0.7, 0.1])
        assert tv_exact(pair) == 0.0

    def test_disjoint_supports(self):
        assert tv_exact(ParamPair.from_lists([0.0], [1.0])) == 1.0

    def test_hand_enumerated_pair(self):
        pair = ParamPair.from_lists([0.25, 0.25], [0.0, 0.0])
        assert tv_exact(pair) == pytest.approx(0.4375, abs=1e-15)

    def test_limit(self):
        pair = ParamPair.from_lists([0.1] * 5, [0.2] * 5)
        with pytest.raises(DimensionTooLargeError) as excinfo:
            tv_exact(pair, limit=4)
        assert excinfo.value.n == 5
        assert excinfo.value.limit == 4

    def test_bit_identical_across_worker_counts(self):
        pair = random_pair(np.random.default_rng(7), 18)
        serial = tv_exact(pair, workers=1, chunk_bits=10)
        parallel = tv_exact(pair, workers=4, chunk_bits=10)
        assert serial == parallel
        assert full_slice_report(pair, workers=1, chunk_bits=10) == \
            full_slice_report(pair, workers=4, chunk_bits=10)

    def test_chunk_size_changes_only_rounding(self):
        pair = random_pair(np.random.default_rng(8), 14)
        assert tv_exact(pair, chunk_bits=4) == pytest.approx(tv_exact(pair, chunk_bits=16), abs=1e-14)

    def test_reflection_invariance(self):
        rng = np.random.default_rng(42)
        for n in range(1, 10):
            pair = random_pair(rng, n)
            assert tv_exact(pair.reflected()) == pytest.approx(tv_exact(pair), abs=1e-14)

    def test_swap_symmetry_is_exact(self):
        rng = np.random.default_rng(42)
        for n in range(1, 13):
            for _ in range(10):
                pair = random_pair(rng, n)
                assert tv_exact(pair) == tv_exact(pair.swapped())

    def test_common_coordinate_leaves_tv_unchanged(self):
        pair = random_pair(np.random.default_rng(3), 5)
        extended = pair.concat(ParamPair.from_lists([0.37], [0.37]))
        assert tv_exact(extended) == pytest.approx(tv_exact(pair), abs=1e-14)


class TestSlices:
    def test_two_coordinate_swap(self):
        report = full_slice_report(ParamPair.from_lists([0.1, 0.2], [0.2, 0.1]))
        np.testing.assert_allclose(report.delta, [0.0, 0.2, 0.0], atol=1e-15)
        assert report.identity_holds()

    def test_equal_measures_give_zero_slices(self):
        report = full_slice_report(ParamPair.from_lists([0.4, 0.6], [0.4, 0.6]))
        assert report.delta == (0.0, 0.0, 0.0)
        assert report.tv_exact == 0.0

    def test_slice_identity(self):
        rng = np.random.default_rng(42)
        for n in range(1, 13):
            for _ in range(20):
                report = full_slice_report(random_pair(rng, n))
                assert report.identity_residual <= 1e-12 * max(1.0, 2.0 * report.tv_exact)

    def test_per_slice_enumeration_matches_traversal(self):
        rng = np.random.default_rng(11)
        pair = random_pair(rng, 8)
        report = full_slice_report(pair)
        direct = [slice_discrepancy(pair, k) for k in range(9)]
        np.testing.assert_allclose(report.delta, direct, rtol=1e-12, atol=1e-15)

    def test_slice_index_out_of_range(self):
        pair = ParamPair.from_lists([0.1, 0.2], [0.2, 0.1])
        with pytest.raises(IndexOutOfRangeError):
            slice_discrepancy(pair, 3)
        with pytest.raises(IndexOutOfRangeError):
            slice_discrepancy(pair, -1)

    def test_slice_delta_is_signed(self):
        pair = ParamPair.from_lists([0.1, 0.2], [0.2, 0.1])
        assert slice_delta(pair, SubsetIndex.from_members([1], 2)) == pytest.approx(-0.1)
        with pytest.raises(DimensionMismatchError):
            slice_delta(pair, SubsetIndex(n=3, mask=1))


def test_iter_k_subsets():
    subsets = list(iter_k_subsets(5, 2))
    assert len(subsets) == 10
    assert all(s.cardinality == 2 for s in subsets)
    masks = [s.mask for s in subsets]
    assert masks == sorted(masks)
    assert [s.mask for s in iter_k_subsets(3, 0)] == [0]
    assert [s.mask for s in iter_k_subsets(3, 3)] == [7]


def test_atom_sum_with_mass_kernel_is_one():
    pair = random_pair(np.random.default_rng(5), 10)
    assert atom_sum(pair, lambda masses_p, masses_q: masses_p) == pytest.approx(1.0, abs=1e-14)
