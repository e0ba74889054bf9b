"""Descriptor-function filtration over a columnized slice.

Vertices are the slice points plus the per-column origin/termination
anchors.  The pairwise descriptor value is 0 for termination pairs, infinite
across columns or between a slice point and its own termination, and
otherwise ``x + |dy|`` — so each column fills in bottom-up from its origin
and only reaches the shared zero-level termination backbone through its
origin-termination bridge.

Only finite values are materialized.  Within a column every slice-point /
origin pair is enumerated; the termination backbone is wired as a zero-value
chain, which has the same connectivity as the all-pairs zero clique at every
threshold.  Vertex z-coordinates are stored relative to the slice plane
(0, eps1 or eps2), which makes the ``|dz| == eps2`` case of the descriptor
function exact in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..slicing import ColumnizedSlice, SliceParams

KIND_SLICE = 0
KIND_ORIGIN = 1
KIND_TERMINATION = 2

_MONOTONE_TOL = 1e-12

_PAIR_CACHE = {}


def _pair_indices(k: int):
    """Cached upper-triangle index pairs for a k-clique."""
    if k not in _PAIR_CACHE:
        iu, iv = np.triu_indices(k, 1)
        _PAIR_CACHE[k] = (iu.astype(np.int64), iv.astype(np.int64))
    return _PAIR_CACHE[k]


class FiltVertex(NamedTuple):
    x: float
    y: float
    z: float  # offset above the slice plane: 0, eps1 or eps2
    kind: int


def eval_f(a: FiltVertex, b: FiltVertex, params: SliceParams) -> float:
    """Pairwise descriptor value; total, symmetric, possibly infinite."""
    if a.kind == KIND_TERMINATION and b.kind == KIND_TERMINATION:
        return 0.0
    if a.x != b.x:
        return math.inf
    if abs(a.z - b.z) == params.eps2:
        return math.inf
    return a.x + abs(a.y - b.y)


@dataclass(frozen=True)
class FiltrationGraph:
    """Weighted 1-skeleton of the sublevel filtration of one slice.

    Vertex arrays are parallel; ``values[i]`` is the vertex filtration value
    (0 for terminations, the snapped column x otherwise).  Edges reference
    vertex indices and carry finite values only.
    """

    xs: np.ndarray
    ys: np.ndarray
    zs: np.ndarray
    kinds: np.ndarray
    values: np.ndarray
    edge_u: np.ndarray
    edge_v: np.ndarray
    edge_w: np.ndarray
    slice_index: int

    @property
    def vertex_count(self) -> int:
        return self.values.shape[0]

    @property
    def edge_count(self) -> int:
        return self.edge_w.shape[0]

    def vertex(self, i: int) -> FiltVertex:
        return FiltVertex(
            float(self.xs[i]), float(self.ys[i]), float(self.zs[i]),
            int(self.kinds[i]),
        )

    def max_value(self) -> float:
        top = float(self.values.max()) if self.vertex_count else 0.0
        if self.edge_count:
            top = max(top, float(self.edge_w.max()))
        return top


def build_filtration(cs: ColumnizedSlice, params: SliceParams = None) -> FiltrationGraph:
    """Materialize the finite part of the descriptor-function filtration.

    Vertex order: slice points (input order), then origins, then
    terminations, both in column order.  Edge order: per column all
    slice-point/origin pairs then the origin-termination bridge; finally the
    termination chain.
    """
    if params is None:
        params = cs.params
    pts = cs.slice.points
    n = pts.shape[0]
    m = cs.occupied_columns.shape[0]
    col_x = (cs.occupied_columns + 1).astype(np.float64) * params.sigma2

    xs = np.concatenate([pts[:, 0], col_x, col_x])
    ys = np.concatenate([pts[:, 1], cs.origins[:, 1], cs.terminations[:, 1]])
    zs = np.concatenate(
        [np.zeros(n), np.full(m, params.eps1), np.full(m, params.eps2)]
    )
    kinds = np.concatenate(
        [
            np.full(n, KIND_SLICE, dtype=np.int8),
            np.full(m, KIND_ORIGIN, dtype=np.int8),
            np.full(m, KIND_TERMINATION, dtype=np.int8),
        ]
    )
    values = np.concatenate([pts[:, 0], col_x, np.zeros(m)])

    # Snapped point x equals its column's snapped x bit-for-bit, so the
    # membership lookup is an exact float match.
    point_col = np.searchsorted(col_x, pts[:, 0])
    grouped = np.argsort(point_col, kind="stable")
    counts = np.bincount(point_col, minlength=m)
    offsets = np.concatenate([[0], np.cumsum(counts)])

    eu, ev, ew = [], [], []
    for c in range(m):
        members = grouped[offsets[c] : offsets[c + 1]]
        ids = np.concatenate([members, [n + c]])  # + origin vertex
        if ids.shape[0] > 1:
            iu, iv = _pair_indices(ids.shape[0])
            yy = ys[ids]
            eu.append(ids[iu])
            ev.append(ids[iv])
            ew.append(col_x[c] + np.abs(yy[iu] - yy[iv]))
        # origin-termination bridge: the column's only finite link to the
        # backbone
        eu.append(np.array([n + c], dtype=np.int64))
        ev.append(np.array([n + m + c], dtype=np.int64))
        ew.append(np.array([col_x[c] + abs(cs.terminations[c, 1] - cs.origins[c, 1])]))
    if m > 1:
        t_ids = n + m + np.arange(m, dtype=np.int64)
        eu.append(t_ids[:-1])
        ev.append(t_ids[1:])
        ew.append(np.zeros(m - 1))

    edge_u = np.concatenate(eu) if eu else np.empty(0, np.int64)
    edge_v = np.concatenate(ev) if ev else np.empty(0, np.int64)
    edge_w = np.concatenate(ew) if ew else np.empty(0, np.float64)

    if edge_w.size:
        endpoint_max = np.maximum(values[edge_u], values[edge_v])
        if (edge_w < endpoint_max - _MONOTONE_TOL).any():
            raise AssertionError("filtration monotonicity violated")

    return FiltrationGraph(
        xs=xs, ys=ys, zs=zs, kinds=kinds, values=values,
        edge_u=edge_u, edge_v=edge_v, edge_w=edge_w,
        slice_index=cs.slice.index,
    )
