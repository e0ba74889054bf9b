"""Persistence diagrams of filtration graphs, diagram filtering and dumps.

The union-find kernel has two interchangeable backends: a Cython extension
(built by setup.py) and a pure-Python fallback.  The compiled one is picked
at import when available; set ``TOPSLICE_PURE_PYTHON=1`` to force the
fallback (used by the benchmark and for debugging).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from ..errors import ParseError
from .filtration import FiltrationGraph

if os.environ.get("TOPSLICE_PURE_PYTHON") == "1":
    from . import _kernel_py as _backend

    BACKEND = "python"
else:
    try:
        from . import _kernel as _backend

        BACKEND = "cython"
    except ImportError:
        from . import _kernel_py as _backend

        BACKEND = "python"


def backend_name() -> str:
    """Which union-find kernel is active: "cython" or "python"."""
    return BACKEND


@dataclass(frozen=True)
class PersistenceDiagram:
    """Finite (birth, death) pairs plus the components that never die.

    ``points`` is a (k, 2) float64 array sorted by (birth, death);
    ``essential_births`` records the birth value of each essential class.
    """

    points: np.ndarray
    essential_births: np.ndarray = field(
        default_factory=lambda: np.empty(0, dtype=np.float64)
    )

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        pts = pts.reshape(-1, 2)
        if pts.size and (pts[:, 1] < pts[:, 0]).any():
            raise ValueError("death < birth in persistence diagram")
        ess = np.ascontiguousarray(
            np.asarray(self.essential_births, dtype=np.float64)
        ).ravel()
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "essential_births", ess)

    @property
    def essential_count(self) -> int:
        return self.essential_births.shape[0]

    def __len__(self):
        return self.points.shape[0]

    def multiset_equal(self, other: "PersistenceDiagram") -> bool:
        return (
            np.array_equal(self.points, other.points)
            and np.array_equal(self.essential_births, other.essential_births)
        )


EMPTY_DIAGRAM = PersistenceDiagram(np.empty((0, 2), dtype=np.float64))


def _canonical(pairs: np.ndarray) -> np.ndarray:
    if pairs.shape[0] == 0:
        return np.empty((0, 2), dtype=np.float64)
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    return pairs[order]


def persistence_h0(graph: FiltrationGraph) -> PersistenceDiagram:
    """Exact 0-dim sublevel persistence of a monotone weighted graph.

    Edges are processed in nondecreasing value order (stable in insertion
    order); merges follow the elder rule with ties broken by founding-vertex
    index.  Finite points are canonically sorted by (birth, death).
    """
    # Default (unstable) argsort: the death multiset is invariant to the
    # processing order of equal-valued edges, and the result is canonically
    # re-sorted below, so stability buys nothing and costs ~2x.
    order = np.argsort(graph.edge_w)
    pairs, essential = _backend.persistence_pairs(
        np.ascontiguousarray(graph.values),
        np.ascontiguousarray(graph.edge_u[order]),
        np.ascontiguousarray(graph.edge_v[order]),
        np.ascontiguousarray(graph.edge_w[order]),
    )
    return PersistenceDiagram(_canonical(np.asarray(pairs)), np.asarray(essential))


def filter_diagram(
    pd: PersistenceDiagram, essential_cap: float = None
) -> PersistenceDiagram:
    """Keep one point per distinct birth value: the one of maximum death.

    Birth values are quantized column coordinates, so grouping uses exact
    equality.  Essential classes are dropped; pass ``essential_cap`` to
    instead materialize each of them as (birth, cap) before filtering.
    """
    pts = pd.points
    if essential_cap is not None and pd.essential_count:
        capped = np.stack(
            [pd.essential_births, np.full(pd.essential_count, essential_cap)],
            axis=1,
        )
        pts = np.concatenate([pts, capped], axis=0)
    if pts.shape[0] == 0:
        return EMPTY_DIAGRAM
    pts = _canonical(pts)
    births = pts[:, 0]
    last_of_group = np.nonzero(np.diff(births))[0]
    keep = np.concatenate([last_of_group, [births.shape[0] - 1]])
    return PersistenceDiagram(pts[keep])


def dump_diagram(pd: PersistenceDiagram, path) -> None:
    """Text dump: one "birth death" line per point, sorted, 17 digits."""
    with open(path, "w", encoding="ascii") as fh:
        for b, d in _canonical(pd.points):
            fh.write(f"{b:.17g} {d:.17g}\n")


def load_diagram(path) -> PersistenceDiagram:
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError("expected 'birth death'", line=lineno)
            rows.append([float(parts[0]), float(parts[1])])
    pts = np.array(rows, dtype=np.float64).reshape(-1, 2)
    return PersistenceDiagram(_canonical(pts))
