"""Brute-force verification oracle for the union-find persistence kernel.

The oracle never touches union-find: it sweeps every critical value,
recomputes the connected components of the sublevel graph from scratch by
breadth-first traversal, and assigns births/deaths by component containment
under the elder rule.  Diagrams must match the kernel's output as exact
multisets (all values are copied, never recomputed, so comparisons are
bit-level).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ..cloud import Frame, PointCloud
from ..slicing import SliceParams, columnize, slice_cloud
from .filtration import FiltrationGraph, build_filtration
from .persistence import PersistenceDiagram, _canonical, persistence_h0


def brute_force_diagram(graph: FiltrationGraph) -> PersistenceDiagram:
    """Sublevel H0 diagram via exhaustive threshold sweep."""
    n = graph.vertex_count
    values = graph.values
    ew = graph.edge_w
    critical = np.unique(np.concatenate([values, ew]))

    edge_order = np.argsort(ew, kind="stable")
    sorted_u = graph.edge_u[edge_order]
    sorted_v = graph.edge_v[edge_order]
    sorted_w = ew[edge_order]

    entities = []  # (member frozenset, birth_value, birth_index)
    assigned = set()
    births, deaths = [], []
    adjacency = [[] for _ in range(n)]
    edge_ptr = 0
    active = np.zeros(n, dtype=bool)

    for t in critical:
        active |= values <= t
        while edge_ptr < sorted_w.shape[0] and sorted_w[edge_ptr] <= t:
            u, v = int(sorted_u[edge_ptr]), int(sorted_v[edge_ptr])
            adjacency[u].append(v)
            adjacency[v].append(u)
            edge_ptr += 1

        # components of the sublevel graph at threshold t, by BFS
        seen = set()
        components = []
        for s in np.nonzero(active)[0]:
            s = int(s)
            if s in seen:
                continue
            comp = {s}
            seen.add(s)
            queue = deque([s])
            while queue:
                a = queue.popleft()
                for b in adjacency[a]:
                    if b not in comp:
                        comp.add(b)
                        seen.add(b)
                        queue.append(b)
            components.append(comp)

        next_entities = []
        for comp in components:
            merged = [e for e in entities if e[2] in comp]  # containment via founder
            fresh = [i for i in comp if i not in assigned]
            candidates = sorted(
                [(e[1], e[2]) for e in merged]
                + [(float(values[i]), i) for i in fresh]
            )
            for bv, _ in candidates[1:]:  # elder (min) survives
                births.append(bv)
                deaths.append(float(t))
            next_entities.append((comp, candidates[0][0], candidates[0][1]))
        entities = next_entities
        assigned.update(seen)

    pairs = np.array([births, deaths], dtype=np.float64).T.reshape(-1, 2)
    essential = np.sort(np.array([e[1] for e in entities], dtype=np.float64))
    return PersistenceDiagram(_canonical(pairs), essential)


@dataclass
class OracleTrial:
    seed: int
    n_points: int
    matched: bool


def random_columnized_slice(rng: np.random.Generator, max_points: int = 12):
    """A random small columnized slice built through the honest pipeline.

    Mixes continuous coordinates with snapped ones (exact column-boundary
    hits) and duplicated y values (tie coverage in the elder rule).
    """
    n = int(rng.integers(1, max_points + 1))
    sigma1 = float(rng.uniform(0.02, 0.3))
    sigma2 = float(rng.uniform(0.2, 1.5)) * sigma1 / 4
    params = SliceParams(sigma1=sigma1, sigma2=sigma2)

    width = sigma2 * float(rng.uniform(0.5, 6.0))
    x = rng.uniform(0.0, width, size=n)
    if rng.random() < 0.3:
        x = np.round(x / sigma2) * sigma2  # exact boundaries
    y = rng.uniform(0.0, 0.5, size=n)
    if rng.random() < 0.4:
        levels = rng.uniform(0.0, 0.5, size=max(1, n // 2))
        y = rng.choice(levels, size=n)  # duplicate y values
    z = rng.uniform(0.0, 2.5 * sigma1, size=n)
    if rng.random() < 0.2:
        z[:] = z[0]

    cloud = PointCloud(np.stack([x, y, z], axis=1), Frame.NORMALIZED)
    slices = slice_cloud(cloud.points, params)
    pick = int(rng.integers(0, len(slices)))
    return columnize(slices[pick], params), params


def run_oracle_trials(
    n_trials: int,
    max_points: int = 12,
    seed: int = 0,
    pairs_from_graph=None,
):
    """Compare the production kernel against the oracle on random slices.

    Returns (n_mismatches, first_failing_seed).  ``pairs_from_graph``
    replaces ``persistence_h0`` when injecting a deliberately broken
    implementation (mutation checks).
    """
    compute = pairs_from_graph or persistence_h0
    mismatches = 0
    first_fail = None
    for k in range(n_trials):
        trial_seed = seed + k
        rng = np.random.default_rng(trial_seed)
        cs, params = random_columnized_slice(rng, max_points)
        graph = build_filtration(cs, params)
        got = compute(graph)
        want = brute_force_diagram(graph)
        if not got.multiset_equal(want):
            mismatches += 1
            if first_fail is None:
                first_fail = trial_seed
    return mismatches, first_fail
