"""View normalization: PCA box alignment, first-octant shift, mirroring.

The canonical pose used by the descriptor is reached in four steps: rotate so
the principal box axes coincide with the coordinate axes (largest extent on
x, smallest on z), translate the min corner to the origin, optionally mirror
about the box mid-planes (training augmentation), and finally rotate by a
fixed angle about the y-axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import Frame, PointCloud
from .errors import DegenerateCloud

_MOMENT_TIE = 1e-12
_OCTANT_TOL = 1e-9


@dataclass(frozen=True)
class ObbFrame:
    """Oriented bounding box: rotation columns are the box axes.

    ``extents`` are max-min spans of the cloud projected on the axes, sorted
    descending; ``center`` is the box center in the source frame.
    """

    rotation: np.ndarray
    extents: np.ndarray
    center: np.ndarray

    def __post_init__(self):
        rot = np.ascontiguousarray(np.asarray(self.rotation, dtype=np.float64))
        ext = np.ascontiguousarray(np.asarray(self.extents, dtype=np.float64))
        ctr = np.ascontiguousarray(np.asarray(self.center, dtype=np.float64))
        if abs(np.linalg.det(rot) - 1.0) > 1e-9:
            raise ValueError("OBB rotation must have determinant +1")
        if (ext < 0).any() or (np.diff(ext) > 1e-12).any():
            raise ValueError("extents must be non-negative, sorted descending")
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "extents", ext)
        object.__setattr__(self, "center", ctr)

    def face_areas(self) -> np.ndarray:
        """Area of the face perpendicular to each axis (product of the
        other two extents)."""
        e = self.extents
        return np.array([e[1] * e[2], e[0] * e[2], e[0] * e[1]])

    @property
    def volume(self) -> float:
        return float(np.prod(self.extents))


@dataclass(frozen=True)
class AlignedCloud:
    """View-normalized cloud plus everything needed to replay the transform.

    ``octant_shift`` is the min corner subtracted after the box rotation; it
    is stored so external points (e.g. occluder pixels) can be mapped into
    the same frame bit-identically via :meth:`map_points`.
    """

    points: PointCloud
    alpha: float
    mirror_mask: tuple
    source_obb: ObbFrame
    octant_shift: np.ndarray

    def map_points(self, pts: np.ndarray) -> np.ndarray:
        """Apply the stored normalization chain to camera-frame points."""
        q = np.asarray(pts, dtype=np.float64) @ self.source_obb.rotation
        q = q - self.octant_shift
        e = self.source_obb.extents
        for k in range(3):
            if self.mirror_mask[k]:
                q[:, k] = e[k] - q[:, k]
        return q @ _rot_y(self.alpha).T


def _rot_y(alpha: float) -> np.ndarray:
    c, s = np.cos(alpha), np.sin(alpha)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def compute_obb(cloud: PointCloud) -> ObbFrame:
    """PCA approximation of the minimal-volume bounding box.

    Axes are the eigenvectors of the mean-centered covariance, ordered by
    descending extent (largest span first) and sign-fixed so the third
    moment of the projections is non-negative; on a near-zero moment the
    largest-magnitude component of the axis is made positive instead.
    """
    pts = cloud.points
    if pts.shape[0] < 3:
        raise DegenerateCloud("need at least 3 points")
    mean = pts.mean(axis=0)
    centered = pts - mean
    cov = centered.T @ centered / pts.shape[0]
    evals, evecs = np.linalg.eigh(cov)  # ascending
    if evals[1] <= 1e-18 + 1e-12 * max(evals[2], 0.0):
        raise DegenerateCloud("covariance rank < 2 (collinear points)")

    proj = centered @ evecs
    ext_all = proj.max(axis=0) - proj.min(axis=0)
    order = np.lexsort((-evals, -ext_all))  # extent desc, then variance desc
    axes = evecs[:, order].copy()

    proj = centered @ axes
    moments = (proj**3).mean(axis=0)
    for k in range(3):
        if moments[k] < -_MOMENT_TIE:
            axes[:, k] = -axes[:, k]
            moments[k] = -moments[k]
        elif abs(moments[k]) <= _MOMENT_TIE:
            j = int(np.argmax(np.abs(axes[:, k])))
            if axes[j, k] < 0:
                axes[:, k] = -axes[:, k]
    if np.linalg.det(axes) < 0:
        # Moment-based signs produced a reflection; concede the least
        # asymmetric axis (the mirroring augmentation absorbs the residual
        # ambiguity).
        k = int(np.argmin(np.abs(moments)))
        axes[:, k] = -axes[:, k]

    proj = centered @ axes
    lo, hi = proj.min(axis=0), proj.max(axis=0)
    center = mean + axes @ ((lo + hi) / 2.0)
    return ObbFrame(axes, hi - lo, center)


def normalize(
    cloud: PointCloud, alpha: float, mirror_mask=(False, False, False)
) -> AlignedCloud:
    """Produce the canonical descriptor pose of a cloud.

    Steps, in order: box-align (largest extent to x), translate the min
    corner to the origin, mirror about the box mid-planes per
    ``mirror_mask``, rotate by ``alpha`` about the y-axis.  The intermediate
    (pre-alpha) cloud lies in the first octant.
    """
    obb = compute_obb(cloud)
    q = cloud.points @ obb.rotation
    shift = q.min(axis=0)
    q = q - shift
    e = obb.extents
    mask = tuple(bool(m) for m in mirror_mask)
    for k in range(3):
        if mask[k]:
            q[:, k] = e[k] - q[:, k]
    if q.size and q.min() < -_OCTANT_TOL:
        raise AssertionError("octant invariant violated before alpha rotation")
    q = q @ _rot_y(alpha).T
    return AlignedCloud(
        points=PointCloud(q, Frame.NORMALIZED),
        alpha=float(alpha),
        mirror_mask=mask,
        source_obb=obb,
        octant_shift=shift,
    )


def flip_about_y(points: np.ndarray) -> np.ndarray:
    """Rotate points 180 degrees about the y-axis (exact sign flips)."""
    out = np.array(points, dtype=np.float64, copy=True)
    out[:, 0] = -out[:, 0]
    out[:, 2] = -out[:, 2]
    return out
