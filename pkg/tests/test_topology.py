import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topslice.slicing import Slice, SliceParams, columnize, slice_cloud
from topslice.topology import (
    KIND_ORIGIN,
    KIND_SLICE,
    KIND_TERMINATION,
    FiltVertex,
    build_filtration,
    dump_diagram,
    eval_f,
    filter_diagram,
    load_diagram,
    persistence_h0,
)
from topslice.topology.oracle import (
    brute_force_diagram,
    random_columnized_slice,
    run_oracle_trials,
)
from topslice.topology.persistence import EMPTY_DIAGRAM, PersistenceDiagram

SP = SliceParams(sigma1=0.1, sigma2=0.025)


def columnized(pts):
    return columnize(slice_cloud(np.asarray(pts, float), SP)[0], SP)


class TestEvalF:
    def test_termination_pair_is_zero_even_across_columns(self):
        a = FiltVertex(0.025, 0.1, SP.eps2, KIND_TERMINATION)
        b = FiltVertex(0.050, 0.9, SP.eps2, KIND_TERMINATION)
        assert eval_f(a, b, SP) == 0.0

    def test_slice_point_vs_own_termination_is_infinite(self):
        a = FiltVertex(0.025, 0.1, 0.0, KIND_SLICE)
        b = FiltVertex(0.025, 0.9, SP.eps2, KIND_TERMINATION)
        assert math.isinf(eval_f(a, b, SP))

    def test_different_columns_infinite(self):
        a = FiltVertex(0.025, 0.1, 0.0, KIND_SLICE)
        b = FiltVertex(0.050, 0.1, 0.0, KIND_SLICE)
        assert math.isinf(eval_f(a, b, SP))

    def test_same_column_pair_value(self):
        a = FiltVertex(0.025, 0.2, 0.0, KIND_SLICE)
        b = FiltVertex(0.025, 0.5, 0.0, KIND_SLICE)
        assert eval_f(a, b, SP) == pytest.approx(0.325, abs=1e-15)

    def test_origin_termination_finite(self):
        a = FiltVertex(0.025, 0.2, SP.eps1, KIND_ORIGIN)
        b = FiltVertex(0.025, 0.9, SP.eps2, KIND_TERMINATION)
        assert eval_f(a, b, SP) == pytest.approx(0.025 + 0.7, abs=1e-15)

    def test_symmetry_and_vertex_values(self):
        a = FiltVertex(0.05, 0.3, 0.0, KIND_SLICE)
        t = FiltVertex(0.05, 0.8, SP.eps2, KIND_TERMINATION)
        assert eval_f(a, t, SP) == eval_f(t, a, SP)
        assert eval_f(a, a, SP) == 0.05  # vertex value = snapped x
        assert eval_f(t, t, SP) == 0.0


class TestBuildFiltration:
    def test_single_column_single_point(self):
        g = build_filtration(columnized([[0.01, 0.4, 0.0]]), SP)
        assert g.vertex_count == 3
        edges = sorted(zip(g.edge_u, g.edge_v, g.edge_w))
        assert len(edges) == 2
        # point-origin at column x, origin-termination at x + 0
        assert g.edge_w.tolist() == [0.025, 0.025]

    def test_two_columns_one_point_each(self):
        g = build_filtration(columnized([[0.01, 0.3, 0.0], [0.06, 0.7, 0.0]]), SP)
        assert g.vertex_count == 6
        assert g.edge_count == 2 * 2 + 1  # 2 intra-column pairs + backbone chain
        assert (g.edge_w[-1:] == 0.0).all()

    def test_edge_count_bound(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            cs, params = random_columnized_slice(rng)
            g = build_filtration(cs, params)
            counts = {}
            for x in cs.slice.points[:, 0]:
                counts[x] = counts.get(x, 0) + 1
            m = len(cs.occupied_columns)
            bound = sum((c + 1) * c // 2 for c in counts.values()) + m + (m - 1)
            assert g.edge_count <= bound

    def test_monotone(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            cs, params = random_columnized_slice(rng)
            g = build_filtration(cs, params)
            if g.edge_count:
                lo = np.maximum(g.values[g.edge_u], g.values[g.edge_v])
                assert (g.edge_w >= lo - 1e-12).all()

    def test_termination_values_zero(self):
        g = build_filtration(columnized([[0.01, 0.4, 0.0], [0.06, 0.5, 0.0]]), SP)
        assert (g.values[g.kinds == KIND_TERMINATION] == 0).all()
        assert (g.values[g.kinds == KIND_SLICE] > 0).all()


class TestPersistence:
    def test_worked_example(self):
        cs = columnized([[0.01, 0.0, 0.0], [0.02, 1.0, 0.0]])
        pd = persistence_h0(build_filtration(cs, SP))
        pts = pd.points.tolist()
        assert [0.025, 0.025] in pts
        assert [0.025, 1.025] in pts
        assert pd.essential_count == 1
        assert pd.essential_births.tolist() == [0.0]
        filtered = filter_diagram(pd)
        assert filtered.points.tolist() == [[0.025, 1.025]]

    def test_single_termination_vertex(self):
        g = build_filtration(columnized([[0.0, 0.5, 0.0]]), SP)
        pd = persistence_h0(g)
        # one column: point+origin merge at x, column joins backbone at x
        assert pd.essential_count == 1

    def test_death_never_below_birth(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            cs, params = random_columnized_slice(rng)
            pd = persistence_h0(build_filtration(cs, params))
            if len(pd):
                assert (pd.points[:, 1] >= pd.points[:, 0]).all()

    def test_oracle_equivalence_sample(self):
        mismatches, first_fail = run_oracle_trials(150, seed=101)
        assert mismatches == 0, f"first failing seed {first_fail}"

    def test_oracle_catches_broken_kernel(self):
        def broken(graph):
            pd = persistence_h0(graph)
            if len(pd):
                pts = pd.points.copy()
                pts[0, 1] += 1.0  # off-by-one style corruption
                return PersistenceDiagram(pts, pd.essential_births)
            return pd

        mismatches, first_fail = run_oracle_trials(
            50, seed=0, pairs_from_graph=broken
        )
        assert mismatches > 0
        assert first_fail is not None

    def test_pure_python_backend_matches(self):
        from topslice.topology import _kernel_py

        rng = np.random.default_rng(3)
        for _ in range(40):
            cs, params = random_columnized_slice(rng)
            g = build_filtration(cs, params)
            order = np.argsort(g.edge_w)
            pairs, ess = _kernel_py.persistence_pairs(
                g.values, g.edge_u[order], g.edge_v[order], g.edge_w[order]
            )
            got = PersistenceDiagram(
                pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))] if len(pairs) else pairs,
                ess,
            )
            assert got.multiset_equal(persistence_h0(g))

    def test_deterministic(self):
        rng = np.random.default_rng(4)
        cs, params = random_columnized_slice(rng)
        g = build_filtration(cs, params)
        a = persistence_h0(g)
        b = persistence_h0(g)
        assert a.points.tobytes() == b.points.tobytes()
        assert a.essential_births.tobytes() == b.essential_births.tobytes()


class TestFilterDiagram:
    def test_rule_application(self):
        pd = PersistenceDiagram(
            np.array([[0.1, 0.3], [0.1, 0.5], [0.2, 0.25]]), np.array([0.0])
        )
        out = filter_diagram(pd)
        assert out.points.tolist() == [[0.1, 0.5], [0.2, 0.25]]
        assert out.essential_count == 0

    def test_empty(self):
        assert len(filter_diagram(EMPTY_DIAGRAM)) == 0

    def test_essential_cap(self):
        pd = PersistenceDiagram(np.array([[0.1, 0.3]]), np.array([0.0]))
        out = filter_diagram(pd, essential_cap=2.0)
        assert [0.0, 2.0] in out.points.tolist()

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 5000))
    def test_one_point_per_birth_max_death(self, seed):
        rng = np.random.default_rng(seed)
        births = rng.choice([0.025, 0.05, 0.075], size=8)
        pers = rng.uniform(0, 1, size=8)
        pd = PersistenceDiagram(np.stack([births, births + pers], axis=1))
        out = filter_diagram(pd)
        assert len(np.unique(out.points[:, 0])) == len(out)
        for b in np.unique(births):
            want = (births + pers)[births == b].max()
            got = out.points[out.points[:, 0] == b, 1]
            assert got.tolist() == [want]


class TestColumnSemantics:
    def test_one_point_per_column_exact(self):
        # columns with >= 3 evenly spread y values are y-contiguous: every
        # internal gap merges strictly before the backbone bridge
        rng = np.random.default_rng(7)
        for _ in range(25):
            n_cols = int(rng.integers(1, 6))
            pts = []
            for j in range(n_cols):
                if rng.random() < 0.4:
                    continue
                x = (j + rng.uniform(0.05, 0.95)) * SP.sigma2
                y0 = rng.uniform(-0.5, 0.5)
                ext = rng.uniform(0.05, 0.4)
                k = int(rng.integers(3, 7))
                for i in range(k):
                    pts.append([x, y0 + ext * i / (k - 1), 0.0])
            if not pts:
                continue
            cs = columnized(pts)
            pd = filter_diagram(persistence_h0(build_filtration(cs, SP)))
            col_x = (cs.occupied_columns + 1) * SP.sigma2
            y_ext = cs.terminations[:, 1] - cs.origins[:, 1]
            want = np.stack([col_x, col_x + y_ext], axis=1)
            # exactly one point per occupied column, with the exact column
            # birth/death; the only other allowed point is the backbone's
            # zero-level consolidation at (0, 0)
            got = pd.points[pd.points[:, 0] != 0.0]
            assert np.array_equal(got, want)
            extra = pd.points[pd.points[:, 0] == 0.0]
            assert (extra == 0.0).all()


class TestDiagramIO:
    def test_round_trip(self, tmp_path):
        pd = PersistenceDiagram(np.array([[0.025, 1.025], [0.05, 0.0751]]))
        path = tmp_path / "d.txt"
        dump_diagram(pd, path)
        again = load_diagram(path)
        assert again.points.tobytes() == pd.points.tobytes()

    def test_sorted_output(self, tmp_path):
        pd = PersistenceDiagram(np.array([[0.5, 0.6], [0.1, 0.9], [0.1, 0.2]]))
        path = tmp_path / "d.txt"
        dump_diagram(pd, path)
        lines = path.read_text().splitlines()
        births = [float(l.split()[0]) for l in lines]
        assert births == sorted(births)
