"""Z-buffer depth rasterizer with per-pixel instance labels.

Triangles are projected through the pinhole model (pixel centers at integer
coordinates, +x right, +y down, +z forward), rasterized over their pixel
bounding box with screen-space barycentrics and perspective-correct 1/z
interpolation.  Purely numpy, deterministic for a fixed scene.
"""

from __future__ import annotations

import numpy as np

from ..cloud import DepthScene, Intrinsics

_Z_NEAR = 0.05


def look_at(camera_pos, target, up_hint=(0.0, 0.0, 1.0)):
    """World<-camera rotation for a camera at ``camera_pos`` looking at
    ``target`` (camera +z toward the target, +y down in the image)."""
    pos = np.asarray(camera_pos, dtype=np.float64)
    fwd = np.asarray(target, dtype=np.float64) - pos
    fwd = fwd / np.linalg.norm(fwd)
    up = np.asarray(up_hint, dtype=np.float64)
    if abs(np.dot(fwd, up)) > 0.999:
        up = np.array([0.0, 1.0, 0.0])
    right = np.cross(fwd, up)
    right /= np.linalg.norm(right)
    down = np.cross(fwd, right)  # right-handed with +y down, +z forward
    rot = np.stack([right, down, fwd], axis=1)  # columns = camera axes in world
    return rot, pos


def rasterize(
    vertex_lists,
    intrinsics: Intrinsics,
    image_size,
    camera_rotation=None,
    camera_translation=None,
) -> DepthScene:
    """Render camera-frame triangle soups into a depth + label image.

    ``vertex_lists`` is a sequence of (verts (V,3) camera frame, faces
    (F,3)); entry i gets instance id i+1.  Nearest surface wins; background
    stays depth 0 / label 0.
    """
    h, w = image_size
    depth = np.zeros((h, w))
    labels = np.zeros((h, w), dtype=np.int32)
    zbuf = np.full((h, w), np.inf)
    fx, fy, cx, cy = intrinsics.fx, intrinsics.fy, intrinsics.cx, intrinsics.cy

    for idx, (verts, faces) in enumerate(vertex_lists):
        instance = idx + 1
        if faces.shape[0] == 0:
            continue
        tri = verts[faces]  # (F, 3, 3)
        ok = (tri[:, :, 2] > _Z_NEAR).all(axis=1)
        tri = tri[ok]
        u = tri[:, :, 0] * fx / tri[:, :, 2] + cx
        v = tri[:, :, 1] * fy / tri[:, :, 2] + cy
        inv_z = 1.0 / tri[:, :, 2]
        for t in range(tri.shape[0]):
            u0, u1, u2 = u[t]
            v0, v1, v2 = v[t]
            area = (u1 - u0) * (v2 - v0) - (u2 - u0) * (v1 - v0)
            if area == 0.0:
                continue
            lo_c = max(0, int(np.ceil(min(u0, u1, u2))))
            hi_c = min(w - 1, int(np.floor(max(u0, u1, u2))))
            lo_r = max(0, int(np.ceil(min(v0, v1, v2))))
            hi_r = min(h - 1, int(np.floor(max(v0, v1, v2))))
            if lo_c > hi_c or lo_r > hi_r:
                continue
            cols = np.arange(lo_c, hi_c + 1)
            rows = np.arange(lo_r, hi_r + 1)
            pu, pv = np.meshgrid(cols, rows)
            w0 = ((u1 - pu) * (v2 - pv) - (u2 - pu) * (v1 - pv)) / area
            w1 = ((u2 - pu) * (v0 - pv) - (u0 - pu) * (v2 - pv)) / area
            w2 = 1.0 - w0 - w1
            inside = (w0 >= -1e-12) & (w1 >= -1e-12) & (w2 >= -1e-12)
            if not inside.any():
                continue
            z = 1.0 / (w0 * inv_z[t, 0] + w1 * inv_z[t, 1] + w2 * inv_z[t, 2])
            rr = pv[inside]
            cc = pu[inside]
            zz = z[inside]
            better = zz < zbuf[rr, cc]
            rr, cc, zz = rr[better], cc[better], zz[better]
            zbuf[rr, cc] = zz
            depth[rr, cc] = zz
            labels[rr, cc] = instance

    rot = np.eye(3) if camera_rotation is None else camera_rotation
    tra = np.zeros(3) if camera_translation is None else camera_translation
    return DepthScene(depth, labels, intrinsics, rot, tra)
