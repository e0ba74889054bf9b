"""Point clouds, depth scenes, pinhole backprojection and text I/O.

Coordinates are metric (meters) throughout.  Depth images use 0 for invalid
pixels, label images use 0 for background.  The camera frame follows the
usual pinhole convention: +x right, +y down, +z along the optical axis.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCloud, ParseError, UnknownInstance

_FLOAT_FMT = "%.17g"  # round-trips every finite float64


class Frame(enum.Enum):
    CAMERA = "camera"
    NORMALIZED = "normalized"


@dataclass(frozen=True)
class PointCloud:
    """Ordered list of 3D points with a frame tag.

    ``points`` is an (N, 3) float64 array; insertion order is preserved and
    significant (descriptor computations are order-deterministic).
    """

    points: np.ndarray
    frame: Frame = Frame.CAMERA

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"expected (N, 3) points, got shape {pts.shape}")
        if pts.size and not np.isfinite(pts).all():
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]

    def require_nonempty(self):
        if len(self) == 0:
            raise EmptyCloud("point cloud is empty")
        return self


@dataclass(frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float
    cy: float


@dataclass(frozen=True)
class DepthScene:
    """Depth + instance label grids with the camera that produced them.

    ``camera_rotation``/``camera_translation`` map camera coordinates into
    world coordinates (world <- camera).
    """

    depth: np.ndarray
    labels: np.ndarray
    intrinsics: Intrinsics
    camera_rotation: np.ndarray = field(
        default_factory=lambda: np.eye(3, dtype=np.float64)
    )
    camera_translation: np.ndarray = field(
        default_factory=lambda: np.zeros(3, dtype=np.float64)
    )

    def __post_init__(self):
        depth = np.ascontiguousarray(np.asarray(self.depth, dtype=np.float64))
        labels = np.ascontiguousarray(np.asarray(self.labels, dtype=np.int32))
        if depth.ndim != 2:
            raise ValueError("depth must be a 2D grid")
        if depth.shape != labels.shape:
            raise ValueError(
                f"depth {depth.shape} and labels {labels.shape} differ"
            )
        if labels.size and labels.min() < 0:
            raise ValueError("instance ids must be non-negative")
        rot = np.ascontiguousarray(np.asarray(self.camera_rotation, dtype=np.float64))
        tra = np.ascontiguousarray(np.asarray(self.camera_translation, dtype=np.float64))
        if rot.shape != (3, 3) or tra.shape != (3,):
            raise ValueError("camera pose must be a 3x3 rotation and 3-vector")
        if not np.allclose(rot @ rot.T, np.eye(3), atol=1e-9):
            raise ValueError("camera rotation is not orthonormal")
        if abs(np.linalg.det(rot) - 1.0) > 1e-9:
            raise ValueError("camera rotation must have determinant +1")
        object.__setattr__(self, "depth", depth)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "camera_rotation", rot)
        object.__setattr__(self, "camera_translation", tra)

    @property
    def shape(self):
        return self.depth.shape

    def instance_ids(self):
        """Sorted ids present in the label image (background excluded)."""
        ids = np.unique(self.labels)
        return [int(i) for i in ids if i != 0]


def backproject(scene: DepthScene, instance_id: int) -> PointCloud:
    """Lift the labelled valid-depth pixels of one instance to 3D.

    One point per pixel with ``labels == instance_id`` and ``depth > 0``, in
    row-major pixel order:  x = (u - cx) * d / fx,  y = (v - cy) * d / fy,
    z = d, expressed in the camera frame.
    """
    mask = scene.labels == instance_id
    if not mask.any():
        raise UnknownInstance(f"instance {instance_id} not present in scene")
    mask &= scene.depth > 0
    if not mask.any():
        raise EmptyCloud(f"instance {instance_id} has no valid depth")
    vs, us = np.nonzero(mask)  # row-major order
    d = scene.depth[vs, us]
    k = scene.intrinsics
    x = (us - k.cx) * d / k.fx
    y = (vs - k.cy) * d / k.fy
    return PointCloud(np.stack([x, y, d], axis=1), Frame.CAMERA)


def project_pixels(points: np.ndarray, intrinsics: Intrinsics) -> np.ndarray:
    """Inverse of :func:`backproject`: camera-frame points to (u, v) pixels."""
    pts = np.asarray(points, dtype=np.float64)
    u = pts[:, 0] * intrinsics.fx / pts[:, 2] + intrinsics.cx
    v = pts[:, 1] * intrinsics.fy / pts[:, 2] + intrinsics.cy
    return np.stack([u, v], axis=1)


# ---------------------------------------------------------------------------
# Text formats.
#
# Cloud file: one "x y z" line per point, 17 significant digits, '#' starts a
# comment.  Depth scene container: "topslice-depthscene 1" magic line, one
# header line per scalar field, then the two grids row-major, one image row
# per line.  Both formats round-trip bit-exactly for finite values.
# ---------------------------------------------------------------------------


def save_cloud(cloud: PointCloud, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# topslice cloud, frame={cloud.frame.value}\n")
        for x, y, z in cloud.points:
            fh.write(f"{x:.17g} {y:.17g} {z:.17g}\n")


def load_cloud(path, frame: Frame = Frame.CAMERA) -> PointCloud:
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                if raw.lstrip().startswith("# topslice cloud, frame=normalized"):
                    frame = Frame.NORMALIZED
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ParseError(
                    f"expected 3 coordinates, got {len(parts)}", line=lineno
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
    pts = np.array(rows, dtype=np.float64).reshape(-1, 3)
    return PointCloud(pts, frame)


_SCENE_MAGIC = "topslice-depthscene"
_SCENE_VERSION = 1


def save_scene(scene: DepthScene, path) -> None:
    h, w = scene.shape
    k = scene.intrinsics
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{_SCENE_MAGIC} {_SCENE_VERSION}\n")
        fh.write(f"height {h}\n")
        fh.write(f"width {w}\n")
        for name in ("fx", "fy", "cx", "cy"):
            fh.write(f"{name} {getattr(k, name):.17g}\n")
        rot = " ".join(_FLOAT_FMT % v for v in scene.camera_rotation.ravel())
        fh.write(f"rotation {rot}\n")
        tra = " ".join(_FLOAT_FMT % v for v in scene.camera_translation)
        fh.write(f"translation {tra}\n")
        fh.write("depth\n")
        for row in scene.depth:
            fh.write(" ".join(_FLOAT_FMT % v for v in row))
            fh.write("\n")
        fh.write("labels\n")
        for row in scene.labels:
            fh.write(" ".join(str(int(v)) for v in row))
            fh.write("\n")


def load_scene(path) -> DepthScene:
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty scene file", line=1)
    magic = lines[0].split()
    if len(magic) != 2 or magic[0] != _SCENE_MAGIC:
        raise ParseError("not a topslice depth scene file", line=1)
    if int(magic[1]) != _SCENE_VERSION:
        raise ParseError(f"unsupported scene version {magic[1]}", line=1)

    header = {}
    i = 1
    while i < len(lines) and lines[i].strip() != "depth":
        key, _, value = lines[i].partition(" ")
        if not value:
            raise ParseError(f"malformed header line {lines[i]!r}", line=i + 1)
        header[key] = value
        i += 1
    try:
        h = int(header["height"])
        w = int(header["width"])
        intr = Intrinsics(*(float(header[n]) for n in ("fx", "fy", "cx", "cy")))
        rot = np.array([float(v) for v in header["rotation"].split()]).reshape(3, 3)
        tra = np.array([float(v) for v in header["translation"].split()])
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad scene header: {exc}", line=i) from None

    def read_grid(start, dtype):
        rows = []
        for r in range(h):
            lineno = start + r
            if lineno >= len(lines):
                raise ParseError("truncated grid", line=lineno + 1)
            vals = lines[lineno].split()
            if len(vals) != w:
                raise ParseError(
                    f"expected {w} values, got {len(vals)}", line=lineno + 1
                )
            rows.append(vals)
        return np.array(rows, dtype=dtype)

    if i >= len(lines) or lines[i].strip() != "depth":
        raise ParseError("missing depth section", line=i + 1)
    depth = read_grid(i + 1, np.float64)
    j = i + 1 + h
    if j >= len(lines) or lines[j].strip() != "labels":
        raise ParseError("missing labels section", line=j + 1)
    labels = read_grid(j + 1, np.int32)
    return DepthScene(depth, labels, intr, rot, tra)
