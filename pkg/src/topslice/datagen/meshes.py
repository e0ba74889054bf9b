"""Primitive triangle meshes (desk-scale object stand-ins).

All meshes are centered at the origin with consistent outward winding
(positive signed volume); dimensions are meters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PrimitiveMesh:
    kind: str
    dimensions: dict
    vertices: np.ndarray  # (V, 3) float64
    faces: np.ndarray  # (F, 3) int64

    def __post_init__(self):
        object.__setattr__(
            self, "vertices", np.ascontiguousarray(self.vertices, dtype=np.float64)
        )
        object.__setattr__(
            self, "faces", np.ascontiguousarray(self.faces, dtype=np.int64)
        )
        if min(self.dimensions.values()) <= 0:
            raise ValueError("mesh dimensions must be positive")

    def signed_volume(self) -> float:
        v = self.vertices
        t = v[self.faces]
        return float(np.einsum("ij,ij->i", t[:, 0], np.cross(t[:, 1], t[:, 2])).sum() / 6.0)

    def transformed(self, rotation: np.ndarray, translation: np.ndarray) -> np.ndarray:
        """World-space vertices under rotation then translation."""
        return self.vertices @ np.asarray(rotation).T + np.asarray(translation)

    @property
    def half_height(self) -> float:
        return float(-self.vertices[:, 2].min())


def _extrude(poly: np.ndarray, cap_tris: np.ndarray, height: float):
    """Prism from a CCW (viewed from +z) simple polygon; returns (V, F)."""
    n = poly.shape[0]
    top = np.column_stack([poly, np.full(n, height / 2.0)])
    bot = np.column_stack([poly, np.full(n, -height / 2.0)])
    verts = np.vstack([top, bot])
    faces = []
    for a, b, c in cap_tris:
        faces.append([a, b, c])  # top, CCW from above = outward +z
        faces.append([n + a, n + c, n + b])  # bottom reversed
    for i in range(n):
        j = (i + 1) % n
        # side quad: top i -> top j -> bottom j -> bottom i
        faces.append([i, n + j, j])
        faces.append([i, n + i, n + j])
    return verts, np.array(faces, dtype=np.int64)


def make_box(sx: float, sy: float, sz: float) -> PrimitiveMesh:
    hx, hy = sx / 2.0, sy / 2.0
    poly = np.array([[-hx, -hy], [hx, -hy], [hx, hy], [-hx, hy]])
    verts, faces = _extrude(poly, np.array([[0, 1, 2], [0, 2, 3]]), sz)
    return PrimitiveMesh("box", {"sx": sx, "sy": sy, "sz": sz}, verts, faces)


def make_l_block(a: float, b: float, w: float, h: float) -> PrimitiveMesh:
    """L-shaped prism: an a x b footprint with the (+x, +y) corner cut away
    leaving two bars of width w, extruded to height h."""
    if not (0 < w < min(a, b)):
        raise ValueError("bar width must be smaller than both legs")
    poly = np.array(
        [[0, 0], [a, 0], [a, w], [w, w], [w, b], [0, b]], dtype=np.float64
    )
    poly -= np.array([a / 2.0, b / 2.0])
    cap = np.array([[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5]])
    verts, faces = _extrude(poly, cap, h)
    return PrimitiveMesh("l_block", {"a": a, "b": b, "w": w, "h": h}, verts, faces)


def make_cylinder(radius: float, height: float, segments: int = 24) -> PrimitiveMesh:
    ang = 2 * np.pi * np.arange(segments) / segments
    poly = np.column_stack([radius * np.cos(ang), radius * np.sin(ang)])
    cap = np.array([[0, i, i + 1] for i in range(1, segments - 1)])
    verts, faces = _extrude(poly, cap, height)
    return PrimitiveMesh(
        "cylinder", {"radius": radius, "height": height}, verts, faces
    )


def make_cone(radius: float, height: float, segments: int = 24) -> PrimitiveMesh:
    ang = 2 * np.pi * np.arange(segments) / segments
    base = np.column_stack(
        [radius * np.cos(ang), radius * np.sin(ang), np.full(segments, -height / 2.0)]
    )
    apex = np.array([[0.0, 0.0, height / 2.0]])
    verts = np.vstack([base, apex])
    faces = []
    for i in range(segments):
        j = (i + 1) % segments
        faces.append([i, j, segments])  # side, outward
    for i in range(1, segments - 1):
        faces.append([0, i + 1, i])  # base cap, outward -z
    return PrimitiveMesh(
        "cone", {"radius": radius, "height": height}, verts, np.array(faces, dtype=np.int64)
    )


def make_sphere(radius: float, n_lat: int = 12, n_lon: int = 24) -> PrimitiveMesh:
    verts = [np.array([0.0, 0.0, radius])]
    for i in range(1, n_lat):
        phi = np.pi * i / n_lat
        for j in range(n_lon):
            theta = 2 * np.pi * j / n_lon
            verts.append(
                radius
                * np.array(
                    [np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)]
                )
            )
    verts.append(np.array([0.0, 0.0, -radius]))
    verts = np.array(verts)
    south = verts.shape[0] - 1

    def ring(i, j):
        return 1 + (i - 1) * n_lon + (j % n_lon)

    faces = []
    for j in range(n_lon):
        faces.append([0, ring(1, j), ring(1, j + 1)])
    for i in range(1, n_lat - 1):
        for j in range(n_lon):
            a, b = ring(i, j), ring(i, j + 1)
            c, d = ring(i + 1, j), ring(i + 1, j + 1)
            faces.append([a, c, d])
            faces.append([a, d, b])
    for j in range(n_lon):
        faces.append([south, ring(n_lat - 1, j + 1), ring(n_lat - 1, j)])
    return PrimitiveMesh(
        "sphere", {"radius": radius}, verts, np.array(faces, dtype=np.int64)
    )


_MAKERS = {
    "box": make_box,
    "l_block": make_l_block,
    "cylinder": make_cylinder,
    "cone": make_cone,
    "sphere": make_sphere,
}


def build_mesh(kind: str, dimensions: dict) -> PrimitiveMesh:
    return _MAKERS[kind](**dimensions)


def sample_surface(mesh: PrimitiveMesh, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform area-weighted surface samples (for synthetic test clouds)."""
    tris = mesh.vertices[mesh.faces]
    areas = 0.5 * np.linalg.norm(
        np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0]), axis=1
    )
    pick = rng.choice(areas.shape[0], size=n, p=areas / areas.sum())
    u = rng.random(n)
    v = rng.random(n)
    flip = u + v > 1
    u[flip], v[flip] = 1 - u[flip], 1 - v[flip]
    t = tris[pick]
    return t[:, 0] + u[:, None] * (t[:, 1] - t[:, 0]) + v[:, None] * (t[:, 2] - t[:, 0])
