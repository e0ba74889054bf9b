"""Test-time recognition: occlusion detection, model-set selection, fusion.

Pipeline per instance: backproject, scale-check against the library's
training distance, view-normalize, detect occlusion from surrounding pixels,
re-orient so the intact end supplies the first slice, slice and vectorize,
query the area-appropriate models at the observed slice count, and keep the
single highest-probability prediction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .classify import VIEW_SET_PRIORITY, ModelLibrary, ViewSet, predict
from .cloud import DepthScene, Frame, PointCloud, backproject
from .errors import UnknownInstance
from .normalize import compute_obb, flip_about_y, normalize
from .pipeline import slice_diagrams
from .vectorize import build_descriptor

log = logging.getLogger(__name__)

LOW_Z = "low_z"
HIGH_Z = "high_z"


@dataclass(frozen=True)
class RecognizeConfig:
    tau_ratio: float = 1.15  # face-area dominance factor
    tau_d: float = 0.01  # occluder depth margin, meters
    scale_tolerance: float = 0.05


@dataclass(frozen=True)
class Observation:
    """A backprojected instance with (optionally pinned) occlusion state."""

    cloud: PointCloud
    instance_id: int
    scene: DepthScene = None
    occluded: bool = False
    occluded_end: str = None  # LOW_Z / HIGH_Z, present iff occluded

    def __post_init__(self):
        if self.occluded != (self.occluded_end is not None):
            raise ValueError("occluded_end must be present iff occluded")


@dataclass
class RecognitionResult:
    instance_id: int
    label: str
    probability: float
    occluded: bool
    models_used: list = field(default_factory=list)
    scale_warning: bool = False

    def to_record(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "label": self.label,
            "probability": round(self.probability, 9),
            "occluded": self.occluded,
            "models_used": [[vs.value, k] for vs, k in self.models_used],
        }


def _shift(a: np.ndarray, dr: int, dc: int) -> np.ndarray:
    """out[r, c] = a[r+dr, c+dc], zero outside."""
    out = np.zeros_like(a)
    h, w = a.shape
    rs = slice(max(0, -dr), min(h, h - dr))
    cs = slice(max(0, -dc), min(w, w - dc))
    rt = slice(max(0, dr), min(h, h + dr))
    ct = slice(max(0, dc), min(w, w + dc))
    out[rs, cs] = a[rt, ct]
    return out


def detect_occlusion(scene: DepthScene, instance_id: int, tau_d: float = 0.01):
    """Is the instance partially hidden by a nearer neighbouring instance?

    A pixel on the mask's outer 8-neighbourhood boundary flags occlusion if
    it belongs to a different instance whose depth is smaller than the
    adjacent object pixel's depth by more than ``tau_d``.  Returns
    (occluded, (k, 2) array of such (row, col) pixels, row-major order).
    """
    mask = scene.labels == instance_id
    if not mask.any():
        raise UnknownInstance(f"instance {instance_id} not present in scene")
    other = (scene.labels > 0) & ~mask & (scene.depth > 0)
    hit = np.zeros_like(mask)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            neighbor_mask = _shift(mask, dr, dc)
            neighbor_depth = _shift(scene.depth, dr, dc)
            hit |= other & neighbor_mask & (scene.depth < neighbor_depth - tau_d)
    pixels = np.argwhere(hit)
    return bool(pixels.shape[0]), pixels


def select_model_sets(
    viewed_area: float, other_areas, tau_ratio: float = 1.15
) -> set:
    """Area heuristic with tie handling: a clear largest viewed face means
    front, clear smallest means top, clearly in between means side; any
    ratio within ``tau_ratio`` keeps both adjacent candidates."""
    a, b = sorted(float(x) for x in other_areas)  # b >= a
    greater = 0
    less = 0
    for o in (a, b):
        if viewed_area >= tau_ratio * o:
            greater += 1
        elif o >= tau_ratio * viewed_area:
            less += 1
    tied = 2 - greater - less
    if greater == 2:
        return {ViewSet.FRONT}
    if less == 2:
        return {ViewSet.TOP}
    if greater == 1 and less == 1:
        return {ViewSet.SIDE}
    if greater == 1 and tied == 1:
        return {ViewSet.FRONT, ViewSet.SIDE}
    if less == 1 and tied == 1:
        return {ViewSet.SIDE, ViewSet.TOP}
    return {ViewSet.FRONT, ViewSet.SIDE, ViewSet.TOP}


def _backproject_pixels(scene: DepthScene, pixels: np.ndarray) -> np.ndarray:
    k = scene.intrinsics
    vs = pixels[:, 0].astype(np.float64)
    us = pixels[:, 1].astype(np.float64)
    d = scene.depth[pixels[:, 0], pixels[:, 1]]
    return np.stack([(us - k.cx) * d / k.fx, (vs - k.cy) * d / k.fy, d], axis=1)


def occlusion_edge_pixels(
    scene: DepthScene, instance_id: int, boundary: np.ndarray
) -> np.ndarray:
    """Object pixels adjacent to the occluder's boundary pixels.

    These lie on the object's surface at the occlusion edge, so their
    normalized coordinates localize which end of the object is being eaten
    (the occluder pixels themselves sit at the occluder's depth, far off
    the object)."""
    mask = scene.labels == instance_id
    hit = np.zeros_like(mask)
    hit[boundary[:, 0], boundary[:, 1]] = True
    inner = np.zeros_like(mask)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            inner |= mask & _shift(hit, dr, dc)
    return np.argwhere(inner & (scene.depth > 0))


def recognize_observation(
    obs: Observation, lib: ModelLibrary, config: RecognizeConfig = RecognizeConfig()
) -> RecognitionResult:
    """Recognize a single observation; occlusion state is taken from the
    observation when pinned there, otherwise detected from the scene."""
    pts = obs.cloud.points
    obb = compute_obb(obs.cloud)
    scale_warning = False
    scale = 1.0
    if lib.train_scale > 0:
        distance = float(np.linalg.norm(obb.center))
        if abs(distance / lib.train_scale - 1.0) > config.scale_tolerance:
            # restore the training distance: scale about the camera origin
            scale = lib.train_scale / distance
            pts = pts * scale
    else:
        scale_warning = True

    aligned = normalize(PointCloud(pts, Frame.CAMERA), lib.alpha)

    occluded = obs.occluded
    end = obs.occluded_end
    if not occluded and obs.scene is not None:
        occluded, boundary = detect_occlusion(obs.scene, obs.instance_id, config.tau_d)
        if occluded:
            edge = occlusion_edge_pixels(obs.scene, obs.instance_id, boundary)
            occl_pts = _backproject_pixels(obs.scene, edge) * scale
            q = aligned.map_points(occl_pts)
            zs = aligned.points.points[:, 2]
            mid = (zs.min() + zs.max()) / 2.0
            end = LOW_Z if (q[:, 2] < mid).sum() * 2 > q.shape[0] else HIGH_Z

    work = aligned.points.points
    if occluded and end == LOW_Z:
        # 180-degree flip about y so the intact end supplies slice 0
        work = flip_about_y(work)

    sd = slice_diagrams(work, lib.slice_params)
    n_s = sd.n_nonempty
    diagrams = sd.diagrams[: lib.n_max]
    descriptor = build_descriptor(diagrams, lib.n_max, lib.pi_params)

    cam_dir = obb.center / np.linalg.norm(obb.center)
    dir_obj = obb.rotation.T @ cam_dir
    viewed_axis = int(np.argmax(np.abs(dir_obj)))
    areas = obb.face_areas()
    selected = select_model_sets(
        areas[viewed_axis], np.delete(areas, viewed_axis), config.tau_ratio
    )

    k_query = min(n_s, lib.n_max) if occluded else lib.n_max
    available = set(lib.view_sets())
    queried = [vs for vs in VIEW_SET_PRIORITY if vs in selected and vs in available]
    if not queried:
        queried = [vs for vs in VIEW_SET_PRIORITY if vs in available]

    best = None
    models_used = []
    for vs in queried:
        model = lib.model(vs, k_query)
        probs = predict(model, descriptor)
        models_used.append((vs, k_query))
        top = int(np.argmax(probs))
        cand = (
            -float(probs[top]),
            VIEW_SET_PRIORITY.index(vs),
            k_query,
            model.class_labels[top],
        )
        if best is None or cand < best:
            best = cand
    return RecognitionResult(
        instance_id=obs.instance_id,
        label=best[3],
        probability=-best[0],
        occluded=occluded,
        models_used=models_used,
        scale_warning=scale_warning,
    )


def recognize(
    scene: DepthScene,
    instance_id: int,
    lib: ModelLibrary,
    config: RecognizeConfig = RecognizeConfig(),
) -> RecognitionResult:
    cloud = backproject(scene, instance_id)
    obs = Observation(cloud=cloud, instance_id=instance_id, scene=scene)
    return recognize_observation(obs, lib, config)


def recognize_scene(
    scene: DepthScene, lib: ModelLibrary, config: RecognizeConfig = RecognizeConfig()
):
    """Recognize every instance present; results sorted by instance id."""
    return [recognize(scene, i, lib, config) for i in scene.instance_ids()]
