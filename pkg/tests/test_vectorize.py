import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topslice.errors import InvalidParams, TooManySlices
from topslice.topology.persistence import EMPTY_DIAGRAM, PersistenceDiagram
from topslice.vectorize import (
    ObjectDescriptor,
    PiParams,
    build_descriptor,
    dump_descriptor,
    gaussian_lipschitz_bound,
    load_descriptor,
    persistence_image,
)


def diagram(points):
    return PersistenceDiagram(np.asarray(points, dtype=float).reshape(-1, 2))


PI16 = PiParams(grid=(16, 16), birth_range=(0.0, 0.5), pers_range=(0.0, 1.5))


class TestParams:
    def test_defaults(self):
        p = PiParams(pers_range=(0.0, 1.0))
        assert p.bandwidth == pytest.approx(0.1)
        assert p.pi_size == 256

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(grid=(0, 16)),
            dict(birth_range=(1.0, 0.0)),
            dict(pers_range=(2.0, 2.0)),
            dict(bandwidth=-1.0),
            dict(weighting="cubic"),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidParams):
            PiParams(**kwargs)


class TestPersistenceImage:
    def test_empty_diagram_all_zero(self):
        img = persistence_image(EMPTY_DIAGRAM, PI16)
        assert img.shape == (16, 16)
        assert (img == 0).all()

    def test_gaussian_mass_integral(self):
        # single mid-range point, bandwidth = 2 cell widths: the Riemann sum
        # of the normalized kernel over the grid captures ~all its mass
        params = PiParams(
            grid=(32, 32),
            birth_range=(0.0, 1.0),
            pers_range=(0.0, 1.0),
            bandwidth=2.0 / 32,
            weighting="constant",
        )
        pd = diagram([[0.5, 1.0]])  # birth 0.5, persistence 0.5
        img = persistence_image(pd, params)
        assert img.sum() * params.cell_area == pytest.approx(1.0, rel=0.02)

    def test_peak_location(self):
        pd = diagram([[0.025, 1.025]])  # birth-persistence point (0.025, 1.0)
        img = persistence_image(pd, PI16)
        r, c = np.unravel_index(np.argmax(img), img.shape)
        assert c == int(0.025 / 0.5 * 16)
        assert r == int(1.0 / 1.5 * 16)

    def test_clamping_out_of_range(self):
        inside = persistence_image(diagram([[0.5, 2.0]]), PI16)  # pers 1.5 = hi
        outside = persistence_image(diagram([[0.5, 9.0]]), PI16)  # clamped
        assert np.array_equal(inside, outside)

    def test_linear_weighting_scales(self):
        params_lin = PiParams(
            grid=(16, 16), birth_range=(0, 0.5), pers_range=(0, 1.5),
            weighting="linear_persistence",
        )
        pd = diagram([[0.1, 0.85]])  # persistence 0.75 = pers_hi / 2
        a = persistence_image(pd, PI16)  # constant weighting
        b = persistence_image(pd, params_lin)
        assert np.allclose(b, a * 0.5)

    def test_deterministic_bytes(self):
        rng = np.random.default_rng(0)
        pts = rng.uniform(0, 0.4, size=(9, 2))
        pd = diagram(np.stack([pts[:, 0], pts[:, 0] + pts[:, 1]], axis=1))
        a = persistence_image(pd, PI16)
        b = persistence_image(pd, PI16)
        assert a.tobytes() == b.tobytes()


class TestStability:
    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_lipschitz_bound(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 10))
        births = rng.uniform(0.05, 0.45, n)
        pers = rng.uniform(0.1, 1.4, n)
        pd = diagram(np.stack([births, births + pers], axis=1))
        delta = PI16.bandwidth / 10
        # random displacement of Euclidean norm <= delta per point
        ang = rng.uniform(0, 2 * np.pi, n)
        r = delta * np.sqrt(rng.random(n))
        d_birth = r * np.cos(ang)
        d_pers = r * np.sin(ang)
        moved = diagram(
            np.stack(
                [births + d_birth, births + d_birth + pers + d_pers], axis=1
            )
        )
        a = persistence_image(pd, PI16)
        b = persistence_image(moved, PI16)
        bound = gaussian_lipschitz_bound(PI16, n) * delta
        assert np.abs(a - b).max() <= bound + 1e-15


class TestLinearity:
    def test_union_equals_sum_of_parts(self):
        # constant weighting, no clamping: PI is a sum of per-point kernels,
        # so the union equals the sum of the parts up to float addition
        # regrouping (the two sides accumulate in different orders)
        rng = np.random.default_rng(1)
        b1 = np.sort(rng.uniform(0.0, 0.2, 5))
        b2 = np.sort(rng.uniform(0.3, 0.5, 4))
        p1 = rng.uniform(0.1, 1.0, 5)
        p2 = rng.uniform(0.1, 1.0, 4)
        d1 = diagram(np.stack([b1, b1 + p1], axis=1))
        d2 = diagram(np.stack([b2, b2 + p2], axis=1))
        both = diagram(
            np.concatenate([np.stack([b1, b1 + p1], 1), np.stack([b2, b2 + p2], 1)])
        )
        img = persistence_image(both, PI16)
        total = persistence_image(d1, PI16) + persistence_image(d2, PI16)
        assert np.abs(img - total).max() < 1e-12


class TestBuildDescriptor:
    def test_padding_layout(self):
        pds = [diagram([[0.1, 0.5]]), diagram([[0.2, 0.3]])]
        desc = build_descriptor(pds, 4, PI16)
        assert desc.values.shape[0] == 4 * 256
        assert desc.n_slices == 2
        assert (desc.values[2 * 256 :] == 0).all()
        assert desc.values[: 2 * 256].any()

    def test_zero_slices(self):
        desc = build_descriptor([], 3, PI16)
        assert desc.values.shape[0] == 3 * 256
        assert (desc.values == 0).all()

    def test_prefix_property(self):
        pds = [diagram([[0.1, 0.5]]), diagram([[0.2, 0.3]]), diagram([[0.3, 0.4]])]
        small = build_descriptor(pds[:2], 5, PI16)
        big = build_descriptor(pds, 5, PI16)
        k = 2 * 256
        assert small.values[:k].tobytes() == big.values[:k].tobytes()
        exact = build_descriptor(pds, 3, PI16)
        assert exact.values.tobytes() == big.values[: 3 * 256].tobytes()

    def test_too_many_slices(self):
        with pytest.raises(TooManySlices):
            build_descriptor([EMPTY_DIAGRAM] * 4, 3, PI16)

    def test_blocks_view(self):
        desc = build_descriptor([diagram([[0.1, 0.5]])], 3, PI16)
        assert desc.n_padded == 3
        assert desc.blocks().shape == (3, 256)
        assert np.array_equal(desc.block(0), desc.blocks()[0])


class TestDescriptorIO:
    def test_round_trip(self, tmp_path):
        desc = build_descriptor([diagram([[0.1, 0.5]])], 2, PI16)
        path = tmp_path / "d.txt"
        dump_descriptor(desc, path)
        again = load_descriptor(path)
        assert again.values.tobytes() == desc.values.tobytes()
        assert again.n_slices == desc.n_slices
        assert again.pi_size == desc.pi_size
