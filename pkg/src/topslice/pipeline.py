"""End-to-end descriptor pipeline: aligned cloud -> per-slice diagrams -> PI
stack.

Slices are keyed by index; indices with no points yield an empty diagram,
which vectorizes to an all-zero block, so block position always equals slice
index.  Pinning ``frame`` keeps indices (and therefore blocks) stable when
points disappear.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .slicing import SliceFrame, SliceParams, columnize, slice_cloud
from .topology.filtration import build_filtration
from .topology.persistence import (
    EMPTY_DIAGRAM,
    filter_diagram,
    persistence_h0,
)
from .vectorize import ObjectDescriptor, PiParams, build_descriptor


@dataclass(frozen=True)
class SliceDiagrams:
    """Filtered per-slice diagrams, dense in slice index."""

    diagrams: list  # one PersistenceDiagram per index 0..n_blocks-1
    n_nonempty: int  # number of slices that actually contained points

    @property
    def n_blocks(self) -> int:
        return len(self.diagrams)


def slice_diagrams(
    aligned,
    params: SliceParams,
    frame: SliceFrame = None,
    cap_essential: bool = False,
) -> SliceDiagrams:
    """Compute the filtered H0 diagram of every slice of a normalized cloud.

    Slices and columns index from ``frame`` (default: the cloud's own
    post-rotation bounding-box min corner, per the normalization contract).
    """
    pts = aligned
    while hasattr(pts, "points"):
        pts = pts.points
    pts = np.asarray(pts)
    if frame is None and pts.shape[0]:
        frame = SliceFrame.of_points(pts)
    slices = slice_cloud(pts, params, frame=frame)
    by_index = {}
    for slc in slices:
        cs = columnize(slc, params)
        graph = build_filtration(cs, params)
        pd = persistence_h0(graph)
        cap = graph.max_value() if cap_essential else None
        by_index[slc.index] = filter_diagram(pd, essential_cap=cap)
    n_blocks = max(by_index) + 1
    return SliceDiagrams(
        diagrams=[by_index.get(i, EMPTY_DIAGRAM) for i in range(n_blocks)],
        n_nonempty=len(slices),
    )


def compute_descriptor(
    aligned,
    slice_params: SliceParams,
    pi_params: PiParams,
    n_slices_padded: int,
    frame: SliceFrame = None,
    cap_essential: bool = False,
) -> ObjectDescriptor:
    sd = slice_diagrams(aligned, slice_params, frame=frame, cap_essential=cap_essential)
    return build_descriptor(sd.diagrams, n_slices_padded, pi_params)


def diagram_extremes(sd: SliceDiagrams):
    """(max birth, max persistence) over all finite points; zeros if none."""
    max_birth = 0.0
    max_pers = 0.0
    for pd in sd.diagrams:
        if len(pd):
            max_birth = max(max_birth, float(pd.points[:, 0].max()))
            max_pers = max(max_pers, float((pd.points[:, 1] - pd.points[:, 0]).max()))
    return max_birth, max_pers
