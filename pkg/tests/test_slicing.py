import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topslice.errors import EmptyCloud, EmptySlice, InvalidParams
from topslice.slicing import (
    ColumnizedSlice,
    Slice,
    SliceFrame,
    SliceParams,
    columnize,
    slice_cloud,
)

SP = SliceParams(sigma1=0.1, sigma2=0.025)


def cloud_at(zs, x=0.0, y=0.0):
    pts = np.zeros((len(zs), 3))
    pts[:, 0] = x
    pts[:, 1] = y
    pts[:, 2] = zs
    return pts


class TestParams:
    def test_defaults_satisfy_ordering(self):
        p = SliceParams(0.1, 0.025)
        assert 0 < 2 * p.eps1 < p.eps2 < p.sigma1

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(sigma1=0.0, sigma2=0.025),
            dict(sigma1=0.1, sigma2=-1.0),
            dict(sigma1=0.1, sigma2=0.025, eps1=0.01, eps2=0.015),  # 2*eps1 > eps2
            dict(sigma1=0.1, sigma2=0.025, eps1=0.04, eps2=0.2),  # eps2 > sigma1
        ],
    )
    def test_invalid_params(self, kwargs):
        with pytest.raises(InvalidParams):
            SliceParams(**kwargs)


class TestSliceCloud:
    def test_floor_indexing(self):
        slices = slice_cloud(cloud_at([0.05, 0.12, 0.31]), SP)
        assert [s.index for s in slices] == [0, 1, 3]

    def test_all_in_one_slab(self):
        slices = slice_cloud(cloud_at([0.0, 0.0, 0.0]), SP)
        assert len(slices) == 1
        assert slices[0].index == 0
        assert slices[0].points.shape[0] == 3

    def test_partition_count(self):
        rng = np.random.default_rng(0)
        pts = np.zeros((200, 3))
        pts[:, 2] = rng.uniform(0.0, 0.35, size=200) * (1 - 1e-12)
        slices = slice_cloud(pts, SP)
        assert [s.index for s in slices] == [0, 1, 2, 3]
        assert sum(s.points.shape[0] for s in slices) == 200

    def test_z_flattened_exactly(self):
        slices = slice_cloud(cloud_at([0.05, 0.12, 0.31]), SP)
        for s in slices:
            assert (s.points[:, 2] == s.index * SP.sigma1).all()

    def test_top_boundary_clamped(self):
        # exact top of the box joins the last slab instead of opening a new one
        slices = slice_cloud(cloud_at([0.0, 0.1, 0.2]), SP)
        assert [s.index for s in slices] == [0, 1]
        assert slices[1].points.shape[0] == 2

    def test_empty_cloud(self):
        with pytest.raises(EmptyCloud):
            slice_cloud(np.zeros((0, 3)), SP)

    def test_pinned_frame_keeps_indices(self):
        pts = cloud_at([0.0, 0.15, 0.25])
        frame = SliceFrame.of_points(pts)
        full = slice_cloud(pts, SP, frame=frame)
        assert [s.index for s in full] == [0, 1, 2]
        subset = pts[1:]  # drop the lowest point
        slices = slice_cloud(subset, SP, frame=frame)
        assert [s.index for s in slices] == [1, 2]

    def test_exact_top_multiple_clamps_down(self):
        pts = cloud_at([0.0, 0.1, 0.2])
        frame = SliceFrame.of_points(pts)  # height exactly 2 * sigma1
        slices = slice_cloud(pts, SP, frame=frame)
        assert [s.index for s in slices] == [0, 1]
        assert slices[1].points.shape[0] == 2


class TestColumnize:
    def test_singleton_column(self):
        slc = slice_cloud(np.array([[0.01, 0.4, 0.0]]), SP)[0]
        cs = columnize(slc, SP)
        assert cs.occupied_columns.tolist() == [0]
        assert np.allclose(cs.origins[0], [0.025, 0.4, SP.eps1])
        assert np.allclose(cs.terminations[0], [0.025, 0.4, SP.eps2])

    def test_hand_partition(self):
        pts = np.array([[0.01, 0.2, 0.0], [0.02, 0.9, 0.0], [0.06, 0.5, 0.0]])
        cs = columnize(slice_cloud(pts, SP)[0], SP)
        assert cs.occupied_columns.tolist() == [0, 2]
        assert cs.origins[0][1] == 0.2
        assert cs.terminations[0][1] == 0.9
        assert cs.origins[1][1] == 0.5
        assert cs.terminations[1][1] == 0.5

    def test_snapped_x_values(self):
        pts = np.array([[0.01, 0.2, 0.0], [0.02, 0.9, 0.0], [0.06, 0.5, 0.0]])
        cs = columnize(slice_cloud(pts, SP)[0], SP)
        snapped = set(np.unique(cs.slice.points[:, 0]))
        assert snapped == {1 * SP.sigma2, 3 * SP.sigma2}

    def test_empty_slice(self):
        with pytest.raises(EmptySlice):
            columnize(Slice(index=0, points=np.zeros((0, 3))), SP)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10_000), n=st.integers(1, 40))
    def test_origin_below_termination(self, seed, n):
        rng = np.random.default_rng(seed)
        pts = np.zeros((n, 3))
        pts[:, 0] = rng.uniform(0, 0.2, n)
        pts[:, 1] = rng.uniform(-1, 1, n)
        cs = columnize(slice_cloud(pts, SP)[0], SP)
        assert (cs.origins[:, 1] <= cs.terminations[:, 1]).all()
        assert len(cs.origins) == len(cs.terminations) == len(cs.occupied_columns)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_partition_into_columns(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 60))
        pts = np.zeros((n, 3))
        pts[:, 0] = rng.uniform(0, 0.3, n)
        pts[:, 1] = rng.uniform(0, 1, n)
        cs = columnize(slice_cloud(pts, SP)[0], SP)
        # every snapped x is an occupied column value; counts preserved
        col_x = (cs.occupied_columns + 1) * SP.sigma2
        assert cs.slice.points.shape[0] == n
        assert set(np.unique(cs.slice.points[:, 0])) <= set(col_x)

    def test_memory_bound(self):
        rng = np.random.default_rng(5)
        pts = np.zeros((500, 3))
        pts[:, 0] = rng.uniform(0, 0.31, 500)
        cs = columnize(slice_cloud(pts, SP)[0], SP)
        w = pts[:, 0].max() - pts[:, 0].min()
        assert len(cs.occupied_columns) <= np.ceil(w / SP.sigma2) + 1


class TestOcclusionLocality:
    def test_removing_a_slice_leaves_others_bit_identical(self):
        rng = np.random.default_rng(9)
        pts = np.zeros((300, 3))
        pts[:, 0] = rng.uniform(0, 0.3, 300)
        pts[:, 1] = rng.uniform(0, 1, 300)
        pts[:, 2] = rng.uniform(0, 0.39, 300)
        frame = SliceFrame.of_points(pts)
        full = {
            s.index: columnize(s, SP) for s in slice_cloud(pts, SP, frame=frame)
        }
        drop = 1
        keep = np.floor((pts[:, 2] - frame.z_min) / SP.sigma1).astype(int) != drop
        partial = {
            s.index: columnize(s, SP)
            for s in slice_cloud(pts[keep], SP, frame=frame)
        }
        assert drop not in partial
        for idx, cs in partial.items():
            ref = full[idx]
            assert cs.slice.points.tobytes() == ref.slice.points.tobytes()
            assert cs.origins.tobytes() == ref.origins.tobytes()
            assert cs.terminations.tobytes() == ref.terminations.tobytes()
            assert np.array_equal(cs.occupied_columns, ref.occupied_columns)
