"""Slab slicing along z and per-slice column quantization along x.

All coordinates handed to this module are already view-normalized.  Slices
and columns index from the axis-aligned bounding box min corner of the cloud
(the post-alpha rotation can push points to negative x/z, so both axes are
shifted before quantization).  An explicit :class:`SliceFrame` can pin that
reference box, which keeps slice/column indices stable when points are
removed — the property occlusion reasoning relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCloud, EmptySlice, InvalidParams


@dataclass(frozen=True)
class SliceParams:
    """Slab thickness along z (sigma1) and column width along x (sigma2).

    The epsilon offsets tag origin/termination anchor points just above the
    slice plane; they must satisfy 0 < 2*eps1 < eps2 < sigma1 so the tags
    can never be confused with slice membership.
    """

    sigma1: float
    sigma2: float
    eps1: float = None
    eps2: float = None

    def __post_init__(self):
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise InvalidParams("sigma1 and sigma2 must be positive")
        if self.eps1 is None:
            object.__setattr__(self, "eps1", self.sigma1 * 1e-4)
        if self.eps2 is None:
            object.__setattr__(self, "eps2", self.sigma1 * 3e-4)
        if not (0 < 2 * self.eps1 < self.eps2 < self.sigma1):
            raise InvalidParams("need 0 < 2*eps1 < eps2 < sigma1")


@dataclass(frozen=True)
class SliceFrame:
    """Reference box for slice/column indexing: min corner and spans."""

    x_min: float
    z_min: float
    width: float
    height: float

    @classmethod
    def of_points(cls, pts: np.ndarray) -> "SliceFrame":
        """Frame anchored at the cloud's own axis-aligned box min corner."""
        if pts.shape[0] == 0:
            raise EmptyCloud("cannot frame an empty cloud")
        return cls(
            x_min=float(pts[:, 0].min()),
            z_min=float(pts[:, 2].min()),
            width=float(pts[:, 0].max() - pts[:, 0].min()),
            height=float(pts[:, 2].max() - pts[:, 2].min()),
        )

    @classmethod
    def anchored(cls, pts: np.ndarray) -> "SliceFrame":
        """Identity frame for already box-anchored coordinates: indices are
        plain floor(value / width) with spans taken from the maxima."""
        if pts.shape[0] == 0:
            raise EmptyCloud("cannot frame an empty cloud")
        return cls(
            x_min=0.0,
            z_min=0.0,
            width=float(pts[:, 0].max()),
            height=float(pts[:, 2].max()),
        )


@dataclass(frozen=True)
class Slice:
    """Points of one z-slab, x already frame-shifted, z flattened to
    index * sigma1."""

    index: int
    points: np.ndarray  # (n, 3) float64


@dataclass(frozen=True)
class ColumnizedSlice:
    """Slice with x snapped to column values plus per-column anchors.

    For occupied column j the snapped x is (j+1)*sigma2; the origin carries
    the column's min y at z-offset eps1 above the slice plane, the
    termination the max y at offset eps2.
    """

    slice: Slice
    origins: np.ndarray  # (m, 3)
    terminations: np.ndarray  # (m, 3)
    occupied_columns: np.ndarray  # (m,) int64, sorted
    params: SliceParams = field(repr=False, default=None)


def _interval_index(values: np.ndarray, width: float, span: float) -> np.ndarray:
    """Half-open interval index floor(v / width) with the exact top boundary
    clamped into the last interval (no spurious single-point bin)."""
    idx = np.floor(values / width).astype(np.int64)
    n_intervals = max(1, int(np.ceil(span / width))) if span > 0 else 1
    return np.minimum(idx, n_intervals - 1)


def slice_cloud(aligned, params: SliceParams, frame: SliceFrame = None):
    """Partition a normalized cloud into z-slabs of thickness sigma1.

    Returns the non-empty slices in ascending index order; indices of empty
    slabs are simply absent.  Slice z-coordinates are flattened to
    index * sigma1 and x is shifted so the frame's min corner is at 0.

    Without an explicit frame the coordinates are taken as already
    box-anchored (min corner at the origin); the descriptor pipeline passes
    the post-rotation bounding-box frame explicitly.
    """
    pts = aligned
    while hasattr(pts, "points"):  # AlignedCloud -> PointCloud -> array
        pts = pts.points
    pts = np.asarray(pts)
    if pts.shape[0] == 0:
        raise EmptyCloud("cannot slice an empty cloud")
    if frame is None:
        frame = SliceFrame.anchored(pts)
    z = pts[:, 2] - frame.z_min
    idx = _interval_index(z, params.sigma1, frame.height)
    x = pts[:, 0] - frame.x_min
    out = []
    for i in np.unique(idx):
        sel = idx == i
        sl = np.empty((int(sel.sum()), 3))
        sl[:, 0] = x[sel]
        sl[:, 1] = pts[sel, 1]
        sl[:, 2] = float(i) * params.sigma1
        out.append(Slice(index=int(i), points=sl))
    return out


def columnize(slc: Slice, params: SliceParams) -> ColumnizedSlice:
    """Quantize a slice into x-columns and build its anchor points.

    Column membership is floor(x / sigma2) over the frame-shifted x (top
    boundary clamped within the slice's own x-span); member x-coordinates
    are snapped to (j+1)*sigma2.  Per occupied column the origin takes the
    min member y, the termination the max.
    """
    pts = slc.points
    if pts.shape[0] == 0:
        raise EmptySlice(f"slice {slc.index} has no points")
    x = pts[:, 0]
    width = float(x.max())
    cols = _interval_index(x, params.sigma2, width)
    occupied, inverse = np.unique(cols, return_inverse=True)
    m = occupied.shape[0]

    snapped = np.array(pts, copy=True)
    snapped[:, 0] = (cols + 1).astype(np.float64) * params.sigma2

    o_y = np.full(m, np.inf)
    t_y = np.full(m, -np.inf)
    np.minimum.at(o_y, inverse, pts[:, 1])
    np.maximum.at(t_y, inverse, pts[:, 1])

    col_x = (occupied + 1).astype(np.float64) * params.sigma2
    z0 = slc.index * params.sigma1
    origins = np.stack([col_x, o_y, np.full(m, z0 + params.eps1)], axis=1)
    terminations = np.stack([col_x, t_y, np.full(m, z0 + params.eps2)], axis=1)
    return ColumnizedSlice(
        slice=Slice(index=slc.index, points=snapped),
        origins=origins,
        terminations=terminations,
        occupied_columns=occupied,
        params=params,
    )
