"""Max-norm neighbor queries against the linear-scan oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_array_equal

from entcomb import (
    EmbeddingSpec,
    InsufficientPointsError,
    NonFiniteSampleError,
    PointSet,
    SearchWindow,
    TrialEnsemble,
    build_window_index,
    delay_embed,
    oracle_count_within_strict,
    oracle_kth_nn_distance,
)

LINE = np.array([0.0, 0.3, 0.6, 2.0])


def random_points(seed, n_points=None, dim=None, quantize=False):
    rng = np.random.default_rng(seed)
    n = n_points or int(rng.integers(5, 60))
    d = dim or int(rng.integers(1, 5))
    pts = rng.normal(size=(n, d))
    if quantize:
        pts = np.round(pts, 1)  # heavy ties and exact duplicates
    return pts


class TestKthNeighborDistance:
    def test_known_line(self):
        assert PointSet(LINE).kth_nn_distance(0, 2) == 0.6
        assert oracle_kth_nn_distance(LINE, 0, 2) == 0.6

    def test_duplicate_gives_zero(self):
        pts = np.array([0.0, 0.0, 1.0])
        assert PointSet(pts).kth_nn_distance(0, 1) == 0.0

    def test_k_equal_to_set_size_rejected(self):
        with pytest.raises(InsufficientPointsError):
            PointSet(LINE).kth_nn_distance(0, 4)
        with pytest.raises(InsufficientPointsError):
            oracle_kth_nn_distance(LINE, 0, 4)

    def test_batch_matches_single(self):
        pts = random_points(0, 40, 3)
        ps = PointSet(pts)
        batch = ps.kth_nn_distances(3)
        for i in range(40):
            assert batch[i] == ps.kth_nn_distance(i, 3)


class TestStrictRadiusCount:
    def test_known_line(self):
        assert PointSet(LINE).count_within_strict(1, 0.5) == 3
        assert oracle_count_within_strict(LINE, 1, 0.5) == 3

    def test_zero_radius_counts_only_self(self):
        pts = np.array([0.5, 0.5, 0.9])  # exact duplicate present
        assert PointSet(pts).count_within_strict(0, 0.0) == 1
        assert oracle_count_within_strict(pts, 0, 0.0) == 1

    def test_infinite_radius_counts_everything(self):
        assert PointSet(LINE).count_within_strict(2, np.inf) == 4

    def test_boundary_is_excluded(self):
        # point at exactly the radius must not count
        pts = np.array([0.0, 1.0, 2.0])
        assert PointSet(pts).count_within_strict(0, 1.0) == 1
        assert PointSet(pts).count_within_strict(0, np.nextafter(1.0, 2)) == 2

    def test_negative_radius_rejected(self):
        with pytest.raises(InsufficientPointsError):
            PointSet(LINE).count_within_strict(0, -0.1)

    def test_radius_shape_mismatch_rejected(self):
        with pytest.raises(InsufficientPointsError):
            PointSet(LINE).counts_within_strict(np.array([0.1, 0.2]))


class TestOracleAgreement:
    @given(seed=st.integers(0, 10_000), k=st.integers(1, 6))
    @settings(max_examples=60)
    def test_distances_match(self, seed, k):
        pts = random_points(seed, quantize=seed % 2 == 0)
        if k >= pts.shape[0]:
            return
        ps = PointSet(pts)
        for i in range(0, pts.shape[0], 7):
            assert ps.kth_nn_distance(i, k) == oracle_kth_nn_distance(pts, i, k)

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=60)
    def test_counts_match(self, seed):
        pts = random_points(seed, quantize=seed % 3 == 0)
        rng = np.random.default_rng(seed + 1)
        radii = np.abs(rng.normal(0.5, 0.4, size=pts.shape[0]))
        ps = PointSet(pts)
        got = ps.counts_within_strict(radii)
        want = [
            oracle_count_within_strict(pts, i, radii[i])
            for i in range(pts.shape[0])
        ]
        assert_array_equal(got, want)

    @given(seed=st.integers(0, 10_000), k=st.integers(1, 5))
    @settings(max_examples=60)
    def test_count_at_kth_distance_at_most_k(self, seed, k):
        pts = random_points(seed, quantize=True)
        if k >= pts.shape[0]:
            return
        ps = PointSet(pts)
        eps = ps.kth_nn_distances(k)
        counts = ps.counts_within_strict(eps)
        assert (counts <= k).all()
        assert (counts >= 1).all()

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=40)
    def test_permutation_of_points_irrelevant(self, seed):
        pts = random_points(seed)
        perm = np.random.default_rng(seed + 5).permutation(pts.shape[0])
        a = PointSet(pts)
        b = PointSet(pts[perm])
        for new_id, old_id in enumerate(perm):
            if pts.shape[0] > 3:
                assert (b.kth_nn_distance(new_id, 3)
                        == a.kth_nn_distance(old_id, 3))

    @given(seed=st.integers(0, 10_000), power=st.integers(-20, 20))
    @settings(max_examples=40)
    def test_power_of_two_scaling_exact(self, seed, power):
        pts = random_points(seed)
        a = 2.0 ** power
        base = PointSet(pts)
        scaled = PointSet(pts * a)
        eps = base.kth_nn_distances(2)
        assert_array_equal(scaled.kth_nn_distances(2), eps * a)
        assert_array_equal(
            scaled.counts_within_strict(eps * a),
            base.counts_within_strict(eps),
        )


class TestPointSetValidation:
    def test_one_dimensional_input_promoted(self):
        assert PointSet(LINE).dim == 1
        assert PointSet(LINE).n_points == 4

    def test_non_finite_rejected(self):
        with pytest.raises(NonFiniteSampleError):
            PointSet(np.array([0.0, np.inf]))

    def test_empty_rejected(self):
        with pytest.raises(InsufficientPointsError):
            PointSet(np.empty((0, 2)))

    def test_bad_point_id(self):
        with pytest.raises(InsufficientPointsError):
            PointSet(LINE).kth_nn_distance(9, 1)


class TestSearchWindow:
    def test_truncates_at_edges(self):
        assert SearchWindow(2, 5).bounds(100) == (0, 7)
        assert SearchWindow(98, 5).bounds(100) == (93, 99)
        assert SearchWindow(50, 5).bounds(100) == (45, 55)

    def test_zero_width_is_single_instant(self):
        assert SearchWindow(3, 0).bounds(10) == (3, 3)

    def test_negative_width_rejected(self):
        with pytest.raises(InsufficientPointsError):
            SearchWindow(0, -1)


class TestWindowIndex:
    @staticmethod
    def embedded(r=4, t=12, c=2, seed=0):
        rng = np.random.default_rng(seed)
        ens = TrialEnsemble(rng.normal(size=(r, t, c)))
        return delay_embed(ens, (EmbeddingSpec(0), EmbeddingSpec(1)))

    def test_covers_whole_series_when_wide(self):
        emb = self.embedded(r=1, t=12)
        ps = build_window_index(emb, None, SearchWindow(5, 10_000))
        assert ps.n_points == 12

    def test_zero_width_takes_one_point_per_trial(self):
        emb = self.embedded(r=50)
        ps = build_window_index(emb, None, SearchWindow(6, 0))
        assert ps.n_points == 50
        assert_array_equal(ps.times, np.full(50, 6))

    def test_truncation_shrinks_count(self):
        emb = self.embedded(r=3, t=12)
        ps = build_window_index(emb, None, SearchWindow(1, 4))
        assert ps.n_points == 3 * len(range(0, 6))  # [-3, 5] clipped to [0, 5]

    def test_marginal_projection(self):
        emb = self.embedded()
        ps = build_window_index(emb, [1], SearchWindow(5, 2))
        assert ps.dim == 1
        assert_array_equal(
            ps.points[:, 0].reshape(4, 5), emb.data[:, 3:8, 1]
        )

    def test_point_order_is_trial_major(self):
        emb = self.embedded(r=2, t=8)
        ps = build_window_index(emb, None, SearchWindow(4, 1))
        assert_array_equal(ps.trials, [0, 0, 0, 1, 1, 1])
        assert_array_equal(ps.times, [3, 4, 5, 3, 4, 5])

    def test_empty_window_rejected(self):
        emb = self.embedded(t=12)
        with pytest.raises(InsufficientPointsError):
            build_window_index(emb, None, SearchWindow(40, 2))
