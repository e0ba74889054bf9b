"""Slicing-based topological descriptors for occlusion-robust 3D object
recognition: view normalization, slab slicing, exact H0 persistence of the
per-slice filtrations, persistence-image descriptors, and a library of
slice-count-indexed classifiers queried through area/occlusion heuristics.
"""

__version__ = "0.1.0"

from .cloud import (
    DepthScene,
    Frame,
    Intrinsics,
    PointCloud,
    backproject,
    load_cloud,
    load_scene,
    save_cloud,
    save_scene,
)
from .normalize import AlignedCloud, ObbFrame, compute_obb, normalize
from .slicing import ColumnizedSlice, Slice, SliceFrame, SliceParams, columnize, slice_cloud
from .topology import (
    FiltrationGraph,
    PersistenceDiagram,
    backend_name,
    build_filtration,
    filter_diagram,
    persistence_h0,
)
from .vectorize import ObjectDescriptor, PiParams, build_descriptor, persistence_image
