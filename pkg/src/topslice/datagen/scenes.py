"""Scene specs, viewpoint sampling, occluder placement and suite datasets.

World frame: z up, desk plane at z = 0, objects resting on the plane.  Test
cameras sit on (roughly) the training-distance sphere around the object
cluster so observed scale matches the library without rescaling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..classify import TrainingView
from ..cloud import (
    DepthScene,
    Intrinsics,
    backproject,
    save_cloud,
    save_scene,
)
from ..errors import ParseError, UnreachableFraction
from .meshes import PrimitiveMesh, build_mesh
from .render import look_at, rasterize

IMAGE_SIZE = (240, 320)
INTRINSICS = Intrinsics(fx=280.0, fy=280.0, cx=159.5, cy=119.5)
TRAIN_DISTANCE = 1.0

# Size variants of five primitive kinds, emulating a desk-scale mix of
# cuboidal and curved everyday objects (bottles, boxes, cans, balls).  Tall
# classes keep their second extent well below the first so a ~30% end cut
# cannot reorder the principal axes; the three spheres are deliberately
# close in size (confusable, like assorted balls).
CLASS_CATALOG = {
    "box_small": ("box", {"sx": 0.08, "sy": 0.06, "sz": 0.05}),
    "box_tall": ("box", {"sx": 0.07, "sy": 0.11, "sz": 0.30}),
    "box_flat": ("box", {"sx": 0.28, "sy": 0.15, "sz": 0.04}),
    "l_block_small": ("l_block", {"a": 0.16, "b": 0.16, "w": 0.05, "h": 0.06}),
    "l_block_large": ("l_block", {"a": 0.22, "b": 0.15, "w": 0.06, "h": 0.10}),
    "cyl_thin": ("cylinder", {"radius": 0.035, "height": 0.30}),
    "cyl_wide": ("cylinder", {"radius": 0.05, "height": 0.24}),
    "sphere_small": ("sphere", {"radius": 0.035}),
    "sphere_mid": ("sphere", {"radius": 0.045}),
    "sphere_large": ("sphere", {"radius": 0.06}),
    "cone_small": ("cone", {"radius": 0.06, "height": 0.16}),
    "cone_large": ("cone", {"radius": 0.065, "height": 0.28}),
    # occlusion prop (not a member of any recognition suite): a wide flat
    # board that hides a clean bottom band of whatever stands behind it
    "occluder_board": ("box", {"sx": 0.46, "sy": 0.02, "sz": 0.20}),
}

SUITES = {
    "cuboidal": [
        "box_small", "box_tall", "box_flat", "l_block_small", "l_block_large",
    ],
    "curved": [
        "cyl_thin", "cyl_wide", "sphere_small", "sphere_mid", "sphere_large",
        "cone_small", "cone_large",
    ],
    # 11 classes; sphere_mid stays a curved-suite confusable only
    "mixed": [
        c for c in CLASS_CATALOG if c not in ("occluder_board", "sphere_mid")
    ],
}

_MESH_CACHE = {}


def class_mesh(name: str) -> PrimitiveMesh:
    if name not in _MESH_CACHE:
        kind, dims = CLASS_CATALOG[name]
        _MESH_CACHE[name] = build_mesh(kind, dims)
    return _MESH_CACHE[name]


@dataclass(frozen=True)
class SceneObject:
    label: str
    yaw: float  # rotation about world z
    position: np.ndarray  # (3,) world, base resting on the plane

    def rotation(self) -> np.ndarray:
        c, s = np.cos(self.yaw), np.sin(self.yaw)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class SceneSpec:
    objects: tuple  # of SceneObject, instance ids 1..n in order
    camera_pos: np.ndarray
    camera_target: np.ndarray
    seed: int
    intrinsics: Intrinsics = INTRINSICS
    image_size: tuple = IMAGE_SIZE

    def labels(self):
        return [o.label for o in self.objects]


def render_scene(spec: SceneSpec, subset=None) -> DepthScene:
    """Render the spec (optionally only a subset of instance indices,
    keeping the original instance ids)."""
    rot, pos = look_at(spec.camera_pos, spec.camera_target)
    world_to_cam = rot.T
    vertex_lists = []
    for i, obj in enumerate(spec.objects):
        if subset is not None and i not in subset:
            vertex_lists.append((np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64)))
            continue
        mesh = class_mesh(obj.label)
        world = mesh.transformed(obj.rotation(), obj.position)
        vertex_lists.append(((world - pos) @ world_to_cam.T, mesh.faces))
    return rasterize(
        vertex_lists, spec.intrinsics, spec.image_size,
        camera_rotation=rot, camera_translation=pos,
    )


def hidden_fractions(spec: SceneSpec) -> list:
    """Per instance: fraction of its solo silhouette hidden in the full
    scene (by nearer objects)."""
    full = render_scene(spec)
    out = []
    for i in range(len(spec.objects)):
        solo = render_scene(spec, subset={i})
        n_solo = int((solo.labels == i + 1).sum())
        n_full = int((full.labels == i + 1).sum())
        out.append(1.0 - n_full / n_solo if n_solo else 1.0)
    return out


# ---------------------------------------------------------------------------
# Training views
# ---------------------------------------------------------------------------


def icosahedron_directions(n_dirs: int = 12) -> np.ndarray:
    """Unit view directions: the 12 icosahedron vertices, extended with the
    20 face centers when more than 12 are requested (up to 32)."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    base = []
    for a in (-1.0, 1.0):
        for b in (-phi, phi):
            base.append([0.0, a, b])
            base.append([a, b, 0.0])
            base.append([b, 0.0, a])
    verts = np.array(base)
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    if n_dirs <= 12:
        return verts[:n_dirs]
    # face centers: triples of mutually adjacent vertices (neighbour dot
    # product is 1/sqrt(5) ~ 0.447)
    d = verts @ verts.T
    np.fill_diagonal(d, -2.0)
    faces = set()
    for i in range(12):
        nn = np.argsort(d[i])[::-1][:5]
        for a in nn:
            for b in nn:
                if a < b and d[a, b] > 0.3:
                    faces.add(tuple(sorted((i, int(a), int(b)))))
    centers = np.array([verts[list(f)].mean(axis=0) for f in sorted(faces)])
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    return np.vstack([verts, centers])[:n_dirs]


def gen_training_views(
    mesh: PrimitiveMesh,
    label: str,
    n_dirs: int = 12,
    distance: float = TRAIN_DISTANCE,
    intrinsics: Intrinsics = INTRINSICS,
    image_size=IMAGE_SIZE,
):
    """Render one partial cloud per icosahedral direction.

    The object floats centered at the origin; each camera looks at it from
    ``distance``.  Viewpoints are the unit camera->object directions in the
    cloud (camera) frame.
    """
    views = []
    for d in icosahedron_directions(n_dirs):
        cam_pos = d * distance
        rot, pos = look_at(cam_pos, np.zeros(3))
        mesh_cam = (mesh.vertices - pos) @ rot
        scene = rasterize([(mesh_cam, mesh.faces)], intrinsics, image_size)
        cloud = backproject(scene, 1)
        centroid = cloud.points.mean(axis=0)
        viewpoint = centroid / np.linalg.norm(centroid)
        views.append(TrainingView(cloud=cloud, label=label, viewpoint=viewpoint))
    return views


# ---------------------------------------------------------------------------
# Scene generators
# ---------------------------------------------------------------------------


def _default_camera(target=np.zeros(3), elevation_deg=38.0, distance=TRAIN_DISTANCE):
    el = np.deg2rad(elevation_deg)
    pos = np.asarray(target) + distance * np.array([0.0, -np.cos(el), np.sin(el)])
    return pos


def _footprint_radius(label: str) -> float:
    mesh = class_mesh(label)
    return float(np.linalg.norm(mesh.vertices[:, :2], axis=1).max())


def gen_cluttered_scene(classes, n_objects: int, seed: int) -> SceneSpec:
    """Objects scattered on the desk near the camera-distance sphere.

    Positions are rejection-sampled so every object center sits within ~4%
    of the training camera distance (scale consistency) and footprints do
    not interpenetrate.
    """
    rng = np.random.default_rng(seed)
    target = np.array([0.0, 0.0, 0.08])
    cam = _default_camera(target)
    chosen = [classes[int(rng.integers(0, len(classes)))] for _ in range(n_objects)]
    placed = []
    for label in chosen:
        mesh = class_mesh(label)
        r = _footprint_radius(label)
        for _ in range(400):
            xy = rng.uniform(-0.30, 0.30, size=2)
            pos = np.array([xy[0], xy[1], mesh.half_height])  # mesh center
            if abs(np.linalg.norm(pos - cam) - TRAIN_DISTANCE) > 0.04 * TRAIN_DISTANCE:
                continue
            ok = True
            for other in placed:
                gap = np.linalg.norm(pos[:2] - other.position[:2])
                if gap < 0.92 * (r + _footprint_radius(other.label)):
                    ok = False
                    break
            if ok:
                placed.append(
                    SceneObject(label=label, yaw=float(rng.uniform(0, 2 * np.pi)), position=pos)
                )
                break
    return SceneSpec(
        objects=tuple(placed), camera_pos=cam, camera_target=target, seed=seed
    )


def gen_occluded_scene(
    target_label: str,
    occluder_label: str,
    occlusion_fraction: float,
    seed: int,
    tolerance: float = 0.05,
) -> tuple:
    """Place an occluder in front of a target until the requested fraction
    of the target's silhouette is hidden (binary search on lateral offset).

    Returns (SceneSpec, achieved_fraction).  Instance 1 is the target,
    instance 2 the occluder.
    """
    if not (0 <= occlusion_fraction < 0.8):
        raise ValueError("occlusion_fraction must be in [0, 0.8)")
    rng = np.random.default_rng(seed)
    t_mesh = class_mesh(target_label)
    o_mesh = class_mesh(occluder_label)
    scene_target = np.array([0.0, 0.0, 0.08])
    # low-ish viewpoint, occluder straight in front of the target: the
    # hidden region is the target's lower band (an end chunk of its tall
    # axis), which is the occlusion geometry the slice descriptors are
    # built to survive
    cam = _default_camera(scene_target, elevation_deg=24.0)
    t_pos = np.array([0.0, 0.0, t_mesh.half_height])
    t_yaw = float(rng.uniform(0, 2 * np.pi))
    if occluder_label == "occluder_board":
        o_yaw = float(rng.uniform(-0.1, 0.1))  # board faces the camera
    else:
        o_yaw = float(rng.uniform(0, 2 * np.pi))
    o_jitter = float(rng.uniform(-0.02, 0.02))
    min_depth = 0.08
    max_depth = 0.50

    def spec_at(lateral: float, depth: float) -> SceneSpec:
        o_pos = np.array([o_jitter + lateral, -depth, o_mesh.half_height])
        objs = (
            SceneObject(label=target_label, yaw=t_yaw, position=t_pos),
            SceneObject(label=occluder_label, yaw=o_yaw, position=o_pos),
        )
        return SceneSpec(objects=objs, camera_pos=cam, camera_target=scene_target, seed=seed)

    def fraction_at(lateral: float, depth: float) -> float:
        return hidden_fractions(spec_at(lateral, depth))[0]

    if occlusion_fraction == 0.0:
        return spec_at(0.8, min_depth), fraction_at(0.8, min_depth)

    def search(param_lo, param_hi, evaluate):
        # evaluate() must be (weakly) increasing from param_lo to param_hi
        lo, hi = param_lo, param_hi
        for _ in range(14):
            mid = (lo + hi) / 2.0
            f = evaluate(mid)
            if abs(f - occlusion_fraction) <= tolerance:
                return mid, f
            if f > occlusion_fraction:
                hi = mid
            else:
                lo = mid
        f = evaluate(lo)
        if abs(f - occlusion_fraction) <= tolerance:
            return lo, f
        return None

    f_near = fraction_at(0.0, min_depth)
    f_far = fraction_at(0.0, max_depth)
    if f_near > occlusion_fraction + tolerance:
        # even the adjacent occluder hides too much (small target): slide
        # it outward laterally instead
        hit = search(0.6, 0.0, lambda lat: fraction_at(lat, min_depth))
        if hit is None:
            raise UnreachableFraction(
                f"cannot reach {occlusion_fraction:.2f} hiding "
                f"{target_label} behind {occluder_label}"
            )
        lateral, achieved = hit
        return spec_at(lateral, min_depth), achieved
    if max(f_near, f_far) + tolerance < occlusion_fraction:
        raise UnreachableFraction(
            f"occluder {occluder_label} can hide at most "
            f"{max(f_near, f_far):.2f} of {target_label}, requested "
            f"{occlusion_fraction:.2f}"
        )
    # moving the occluder toward the camera grows its angular size and
    # hides more of the target's lower band
    hit = search(min_depth, max_depth, lambda depth: fraction_at(0.0, depth))
    if hit is None:
        raise UnreachableFraction(
            f"binary search failed for {occlusion_fraction:.2f} of "
            f"{target_label} behind {occluder_label}"
        )
    depth, achieved = hit
    return spec_at(0.0, depth), achieved


# ---------------------------------------------------------------------------
# Scene spec text format (documented key-value lines)
# ---------------------------------------------------------------------------

_SPEC_MAGIC = "topslice-scenespec 1"


def spec_to_text(spec: SceneSpec) -> str:
    lines = [_SPEC_MAGIC]
    lines.append("seed %d" % spec.seed)
    lines.append("image_size %d %d" % spec.image_size)
    k = spec.intrinsics
    lines.append("intrinsics %.17g %.17g %.17g %.17g" % (k.fx, k.fy, k.cx, k.cy))
    lines.append("camera_pos %.17g %.17g %.17g" % tuple(spec.camera_pos))
    lines.append("camera_target %.17g %.17g %.17g" % tuple(spec.camera_target))
    for o in spec.objects:
        lines.append(
            "object %s %.17g %.17g %.17g %.17g"
            % (o.label, o.yaw, o.position[0], o.position[1], o.position[2])
        )
    return "\n".join(lines) + "\n"


def spec_from_text(text: str) -> SceneSpec:
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or lines[0] != _SPEC_MAGIC:
        raise ParseError("not a topslice scene spec", line=1)
    seed = 0
    image_size = IMAGE_SIZE
    intrinsics = INTRINSICS
    camera_pos = camera_target = None
    objects = []
    for lineno, line in enumerate(lines[1:], start=2):
        key, *vals = line.split()
        try:
            if key == "seed":
                seed = int(vals[0])
            elif key == "image_size":
                image_size = (int(vals[0]), int(vals[1]))
            elif key == "intrinsics":
                intrinsics = Intrinsics(*(float(v) for v in vals))
            elif key == "camera_pos":
                camera_pos = np.array([float(v) for v in vals])
            elif key == "camera_target":
                camera_target = np.array([float(v) for v in vals])
            elif key == "object":
                if vals[0] not in CLASS_CATALOG:
                    raise ParseError(f"unknown class {vals[0]!r}", line=lineno)
                objects.append(
                    SceneObject(
                        label=vals[0],
                        yaw=float(vals[1]),
                        position=np.array([float(v) for v in vals[2:5]]),
                    )
                )
            else:
                raise ParseError(f"unknown key {key!r}", line=lineno)
        except (ValueError, IndexError) as exc:
            raise ParseError(f"bad value: {exc}", line=lineno) from None
    if camera_pos is None or camera_target is None:
        raise ParseError("missing camera", line=len(lines))
    return SceneSpec(
        objects=tuple(objects),
        camera_pos=camera_pos,
        camera_target=camera_target,
        seed=seed,
        intrinsics=intrinsics,
        image_size=image_size,
    )


# ---------------------------------------------------------------------------
# Suite datasets on disk
# ---------------------------------------------------------------------------

SEQUENCE_SIZES = {"seq_2": (2, 6), "seq_5": (5, 5), "seq_8": (8, 4)}
OCCLUSION_TRIALS_PER_CLASS = 3
OCCLUSION_TARGET_FRACTION = 0.3


def generate_suite(out_dir, suite: str, seed: int = 0, n_dirs: int = 20) -> dict:
    """Write a full suite dataset: training views, cluttered sequences and
    dedicated ~30%-occlusion trials, each with ground truth.

    Suite datasets default to 20 view directions (icosahedron vertices plus
    the first 8 face centers) so each view set sees every class from several
    angles; single-object view rendering itself defaults to the plain
    12-vertex set."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    out = Path(out_dir)
    classes = SUITES[suite]
    manifest = {
        "schema_version": 1,
        "suite": suite,
        "seed": seed,
        "classes": classes,
        "train_distance": TRAIN_DISTANCE,
        "sequences": {},
    }

    train_dir = out / "train"
    for label in classes:
        cdir = train_dir / label
        cdir.mkdir(parents=True, exist_ok=True)
        views = gen_training_views(class_mesh(label), label, n_dirs=n_dirs)
        meta = []
        for i, view in enumerate(views):
            fname = f"view_{i:02d}.xyz"
            save_cloud(view.cloud, cdir / fname)
            meta.append({"file": fname, "viewpoint": [float(v) for v in view.viewpoint]})
        (cdir / "views.json").write_text(
            json.dumps({"label": label, "views": meta}, indent=1, sort_keys=True)
        )

    rng = np.random.default_rng(seed)
    scene_root = out / "scenes"
    for seq_name, (n_objects, n_scenes) in SEQUENCE_SIZES.items():
        seq_dir = scene_root / seq_name
        seq_dir.mkdir(parents=True, exist_ok=True)
        entries = []
        for s in range(n_scenes):
            scene_seed = int(rng.integers(0, 2**31))
            spec = gen_cluttered_scene(classes, n_objects, scene_seed)
            scene = render_scene(spec)
            hidden = hidden_fractions(spec)
            base = f"scene_{s:02d}"
            save_scene(scene, seq_dir / f"{base}.scene")
            (seq_dir / f"{base}.spec").write_text(spec_to_text(spec))
            gt = {
                "schema_version": 1,
                "instances": [
                    {
                        "instance_id": i + 1,
                        "label": obj.label,
                        "hidden_fraction": round(hidden[i], 6),
                    }
                    for i, obj in enumerate(spec.objects)
                ],
            }
            (seq_dir / f"{base}.gt.json").write_text(
                json.dumps(gt, indent=1, sort_keys=True)
            )
            entries.append(base)
        manifest["sequences"][seq_name] = entries

    # controlled occlusion probes: a wide board in front hides a clean
    # bottom band of the target; the board itself is scaffolding, not a
    # suite class, so ground truth lists only the target
    occl_dir = scene_root / "occl"
    occl_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    idx = 0
    for label in classes:
        for _ in range(OCCLUSION_TRIALS_PER_CLASS):
            trial_seed = int(rng.integers(0, 2**31))
            spec, achieved = gen_occluded_scene(
                label, "occluder_board", OCCLUSION_TARGET_FRACTION, trial_seed
            )
            scene = render_scene(spec)
            base = f"trial_{idx:03d}"
            save_scene(scene, occl_dir / f"{base}.scene")
            (occl_dir / f"{base}.spec").write_text(spec_to_text(spec))
            gt = {
                "schema_version": 1,
                "instances": [
                    {
                        "instance_id": 1,
                        "label": label,
                        "hidden_fraction": round(achieved, 6),
                    }
                ],
            }
            (occl_dir / f"{base}.gt.json").write_text(
                json.dumps(gt, indent=1, sort_keys=True)
            )
            entries.append(base)
            idx += 1
    manifest["sequences"]["occl"] = entries

    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True))
    return manifest
