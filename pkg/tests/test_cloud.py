import numpy as np
import pytest

from topslice.cloud import (
    DepthScene,
    Frame,
    Intrinsics,
    PointCloud,
    backproject,
    load_cloud,
    load_scene,
    project_pixels,
    save_cloud,
    save_scene,
)
from topslice.errors import EmptyCloud, ParseError, UnknownInstance

K = Intrinsics(fx=280.0, fy=280.0, cx=159.5, cy=119.5)


def make_scene(depth, labels):
    return DepthScene(np.asarray(depth, float), np.asarray(labels), K)


class TestBackproject:
    def test_principal_point_maps_to_optical_axis(self):
        depth = np.zeros((240, 320))
        labels = np.zeros((240, 320), dtype=np.int32)
        # cx, cy are half-integers here; use a scene with integer principal point
        k = Intrinsics(fx=100.0, fy=100.0, cx=160.0, cy=120.0)
        depth[120, 160] = 1.0
        labels[120, 160] = 1
        cloud = backproject(DepthScene(depth, labels, k), 1)
        assert np.allclose(cloud.points, [[0.0, 0.0, 1.0]])

    def test_unit_tangent_times_depth(self):
        k = Intrinsics(fx=100.0, fy=100.0, cx=160.0, cy=120.0)
        depth = np.zeros((240, 320))
        labels = np.zeros((240, 320), dtype=np.int32)
        depth[120, 260] = 2.0  # u = cx + fx
        labels[120, 260] = 7
        cloud = backproject(DepthScene(depth, labels, k), 7)
        assert np.allclose(cloud.points, [[2.0, 0.0, 2.0]])

    def test_small_grid_hand_computed(self):
        k = Intrinsics(fx=50.0, fy=40.0, cx=1.0, cy=1.0)
        depth = np.array([[0.0, 2.0, 0.0], [0.5, 0.0, 0.0], [0.0, 0.0, 1.5]])
        labels = np.array([[0, 3, 0], [3, 0, 0], [0, 0, 5]], dtype=np.int32)
        cloud = backproject(DepthScene(depth, labels, k), 3)
        # row-major: (v=0,u=1) then (v=1,u=0)
        want = np.array(
            [
                [(1 - 1.0) * 2.0 / 50.0, (0 - 1.0) * 2.0 / 40.0, 2.0],
                [(0 - 1.0) * 0.5 / 50.0, (1 - 1.0) * 0.5 / 40.0, 0.5],
            ]
        )
        assert np.allclose(cloud.points, want)

    def test_point_count_matches_labelled_valid_pixels(self):
        rng = np.random.default_rng(3)
        depth = rng.uniform(0.5, 2.0, size=(32, 24))
        depth[rng.random((32, 24)) < 0.3] = 0.0
        labels = (rng.random((32, 24)) < 0.4).astype(np.int32) * 2
        scene = make_scene(depth, labels)
        n_expected = int(((labels == 2) & (depth > 0)).sum())
        assert len(backproject(scene, 2)) == n_expected

    def test_reprojection_recovers_pixels(self):
        rng = np.random.default_rng(4)
        depth = rng.uniform(0.5, 2.0, size=(40, 50))
        labels = np.ones((40, 50), dtype=np.int32)
        scene = make_scene(depth, labels)
        cloud = backproject(scene, 1)
        uv = project_pixels(cloud.points, K)
        vs, us = np.nonzero(labels)
        assert np.abs(uv[:, 0] - us).max() < 0.5
        assert np.abs(uv[:, 1] - vs).max() < 0.5

    def test_unknown_instance(self):
        scene = make_scene(np.ones((4, 4)), np.zeros((4, 4), dtype=np.int32))
        with pytest.raises(UnknownInstance):
            backproject(scene, 9)

    def test_all_invalid_depth(self):
        labels = np.zeros((4, 4), dtype=np.int32)
        labels[1, 1] = 3
        scene = make_scene(np.zeros((4, 4)), labels)
        with pytest.raises(EmptyCloud):
            backproject(scene, 3)


class TestCloudIO:
    def test_round_trip_bit_exact(self, tmp_path):
        cloud = PointCloud(np.array([[0.1, 0.2, 0.3]]))
        path = tmp_path / "c.xyz"
        save_cloud(cloud, path)
        again = load_cloud(path)
        assert again.points.tobytes() == cloud.points.tobytes()

    def test_round_trip_random(self, tmp_path):
        rng = np.random.default_rng(0)
        cloud = PointCloud(rng.normal(size=(257, 3)) * 1e3)
        path = tmp_path / "c.xyz"
        save_cloud(cloud, path)
        assert load_cloud(path).points.tobytes() == cloud.points.tobytes()

    def test_comments_allowed(self, tmp_path):
        path = tmp_path / "c.xyz"
        path.write_text("# comment\n0 0 0\n")
        cloud = load_cloud(path)
        assert len(cloud) == 1
        assert np.allclose(cloud.points, 0.0)

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = tmp_path / "c.xyz"
        path.write_text("0 0\n")
        with pytest.raises(ParseError) as err:
            load_cloud(path)
        assert err.value.line == 1

    def test_save_is_byte_stable(self, tmp_path):
        rng = np.random.default_rng(5)
        cloud = PointCloud(rng.normal(size=(64, 3)))
        p1, p2 = tmp_path / "a.xyz", tmp_path / "b.xyz"
        save_cloud(cloud, p1)
        save_cloud(cloud, p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestSceneIO:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        depth = rng.uniform(0, 2, size=(6, 8))
        labels = rng.integers(0, 3, size=(6, 8)).astype(np.int32)
        c, s = np.cos(0.3), np.sin(0.3)
        rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])
        scene = DepthScene(depth, labels, K, rot, np.array([0.1, -0.2, 1.5]))
        path = tmp_path / "scene.dsc"
        save_scene(scene, path)
        again = load_scene(path)
        assert again.depth.tobytes() == scene.depth.tobytes()
        assert again.labels.tobytes() == scene.labels.tobytes()
        assert again.camera_rotation.tobytes() == scene.camera_rotation.tobytes()
        assert again.camera_translation.tobytes() == scene.camera_translation.tobytes()
        assert again.intrinsics == scene.intrinsics

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "x.dsc"
        path.write_text("nonsense 1\n")
        with pytest.raises(ParseError):
            load_scene(path)


class TestValidation:
    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            PointCloud(np.array([[np.nan, 0, 0]]))

    def test_mismatched_grids_rejected(self):
        with pytest.raises(ValueError):
            DepthScene(np.zeros((3, 3)), np.zeros((4, 3), dtype=np.int32), K)

    def test_bad_rotation_rejected(self):
        with pytest.raises(ValueError):
            DepthScene(
                np.zeros((3, 3)),
                np.zeros((3, 3), dtype=np.int32),
                K,
                np.eye(3) * 2.0,
                np.zeros(3),
            )

    def test_empty_cloud_guard(self):
        with pytest.raises(EmptyCloud):
            PointCloud(np.zeros((0, 3))).require_nonempty()

    def test_frame_tag(self):
        cloud = PointCloud(np.zeros((1, 3)), Frame.NORMALIZED)
        assert cloud.frame is Frame.NORMALIZED
