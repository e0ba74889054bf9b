"""Cross-validated scene evaluation: fold the training views, retrain the
library per fold, recognize every scene instance, report macro accuracy.

Accuracy per sequence is the mean over classes of per-class accuracy; the
report carries mean and standard deviation across folds plus two headline
buckets: unoccluded instances (ground-truth hidden fraction below 5%) and
the dedicated ~30%-occlusion trials.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classify import (
    TrainConfig,
    TrainingView,
    library_from_samples,
    prepare_training_samples,
    train_library,
)
from .cloud import load_cloud, load_scene
from .errors import InsufficientData
from .normalize import compute_obb
from .recognize import RecognizeConfig, recognize
from .slicing import SliceParams

REPORT_SCHEMA_VERSION = 1
UNOCCLUDED_MAX_HIDDEN = 0.05
OCCLUDED30_BAND = (0.2, 0.4)
OCCLUSION_SEQUENCE = "occl"  # controlled occlusion probes


@dataclass
class SceneEntry:
    sequence: str
    name: str
    scene: object
    instances: list  # of dicts: instance_id, label, hidden_fraction


@dataclass
class Dataset:
    views: list  # of TrainingView
    scenes: list  # of SceneEntry
    classes: list
    suite: str


def load_dataset(data_dir) -> Dataset:
    root = Path(data_dir)
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise InsufficientData(f"no manifest.json under {root}")
    manifest = json.loads(manifest_path.read_text())

    views = []
    for label in manifest["classes"]:
        cdir = root / "train" / label
        meta = json.loads((cdir / "views.json").read_text())
        for entry in meta["views"]:
            cloud = load_cloud(cdir / entry["file"])
            views.append(
                TrainingView(
                    cloud=cloud,
                    label=label,
                    viewpoint=np.array(entry["viewpoint"]),
                )
            )
    if not views:
        raise InsufficientData("dataset contains no training views")

    scenes = []
    for seq, names in manifest["sequences"].items():
        for name in names:
            base = root / "scenes" / seq / name
            scene = load_scene(f"{base}.scene")
            gt = json.loads(Path(f"{base}.gt.json").read_text())
            scenes.append(
                SceneEntry(
                    sequence=seq, name=name, scene=scene, instances=gt["instances"]
                )
            )
    return Dataset(
        views=views,
        scenes=scenes,
        classes=list(manifest["classes"]),
        suite=manifest.get("suite", "unknown"),
    )


def _view_folds(views, k_folds: int, seed: int):
    """Stratified-by-class deterministic fold ids for the training views."""
    rng = np.random.default_rng(seed)
    fold = np.empty(len(views), dtype=np.int64)
    labels = [v.label for v in views]
    for c in sorted(set(labels)):
        idx = np.array([i for i, l in enumerate(labels) if l == c])
        if idx.shape[0] < k_folds:
            raise InsufficientData(
                f"class {c!r} has {idx.shape[0]} views, need >= {k_folds}"
            )
        idx = idx[rng.permutation(idx.shape[0])]
        fold[idx] = np.arange(idx.shape[0]) % k_folds
    return fold


def _macro_accuracy(outcomes):
    """Mean over classes of per-class accuracy; outcomes are
    (label, correct) pairs."""
    per_class = {}
    for label, correct in outcomes:
        per_class.setdefault(label, []).append(correct)
    if not per_class:
        return None
    return float(np.mean([np.mean(v) for v in per_class.values()]))


def train_fold_library(
    views,
    *,
    slice_params: SliceParams,
    alpha: float,
    pi_grid=(16, 16),
    pi_bandwidth=None,
    weighting="constant",
    train_config=TrainConfig(),
):
    """Train a library with the training distance measured from the views
    themselves (mean camera distance to the cloud box center)."""
    distances = [float(np.linalg.norm(compute_obb(v.cloud).center)) for v in views]
    return train_library(
        views,
        slice_params=slice_params,
        alpha=alpha,
        train_scale=float(np.mean(distances)),
        pi_grid=pi_grid,
        pi_bandwidth=pi_bandwidth,
        weighting=weighting,
        train_config=train_config,
    )


def evaluate_dataset(
    dataset: Dataset,
    *,
    slice_params: SliceParams,
    alpha: float,
    pi_grid=(16, 16),
    pi_bandwidth=None,
    weighting="constant",
    k_folds: int = 5,
    seed: int = 0,
    recognize_config: RecognizeConfig = RecognizeConfig(),
    train_config: TrainConfig = TrainConfig(),
) -> dict:
    """Full k-fold evaluation; returns the machine-readable report dict."""
    fold = _view_folds(dataset.views, k_folds, seed)
    sequences = sorted({s.sequence for s in dataset.scenes})
    seq_folds = {s: [] for s in sequences}
    unocc_folds = []
    occ30_folds = []
    clutter_folds = []
    per_class_hits = {c: [] for c in dataset.classes}

    # Diagrams are fold-independent; compute them once.  Only PI
    # calibration and the model fits see the fold's training subset.
    all_samples = prepare_training_samples(dataset.views, slice_params, alpha)
    distances = [
        float(np.linalg.norm(compute_obb(v.cloud).center)) for v in dataset.views
    ]

    for f in range(k_folds):
        train_idx = {i for i, ff in enumerate(fold) if ff != f}
        fold_samples = [s for s in all_samples if s.view_index in train_idx]
        lib = library_from_samples(
            fold_samples,
            slice_params=slice_params,
            alpha=alpha,
            train_scale=float(np.mean([distances[i] for i in sorted(train_idx)])),
            pi_grid=pi_grid,
            pi_bandwidth=pi_bandwidth,
            weighting=weighting,
            train_config=train_config,
        )
        outcomes = {s: [] for s in sequences}
        unocc, occ30, clutter = [], [], []
        for entry in dataset.scenes:
            probe = entry.sequence == OCCLUSION_SEQUENCE
            for inst in entry.instances:
                iid = inst["instance_id"]
                if not (entry.scene.labels == iid).any():
                    continue  # fully hidden instance: nothing to recognize
                result = recognize(entry.scene, iid, lib, recognize_config)
                correct = result.label == inst["label"]
                outcomes[entry.sequence].append((inst["label"], correct))
                per_class_hits[inst["label"]].append(correct)
                hidden = inst["hidden_fraction"]
                if not probe:
                    clutter.append((inst["label"], correct))
                    if hidden <= UNOCCLUDED_MAX_HIDDEN:
                        unocc.append((inst["label"], correct))
                if OCCLUDED30_BAND[0] <= hidden <= OCCLUDED30_BAND[1]:
                    occ30.append((inst["label"], correct))
        for s in sequences:
            acc = _macro_accuracy(outcomes[s])
            if acc is not None:
                seq_folds[s].append(acc)
        if unocc:
            unocc_folds.append(_macro_accuracy(unocc))
        if occ30:
            occ30_folds.append(_macro_accuracy(occ30))
        if clutter:
            clutter_folds.append(_macro_accuracy(clutter))

    def stat(values):
        if not values:
            return {"mean": None, "std": None, "per_fold": []}
        return {
            "mean": round(float(np.mean(values)), 6),
            "std": round(float(np.std(values)), 6),
            "per_fold": [round(float(v), 6) for v in values],
        }

    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "suite": dataset.suite,
        "k_folds": k_folds,
        "seed": seed,
        "sequences": {s: stat(seq_folds[s]) for s in sequences},
        "clutter_overall": stat(clutter_folds),
        "unoccluded": stat(unocc_folds),
        "occluded30": stat(occ30_folds),
        "per_class_accuracy": {
            c: round(float(np.mean(v)), 6) if v else None
            for c, v in sorted(per_class_hits.items())
        },
    }


def report_to_text(report: dict) -> str:
    lines = [
        f"suite: {report['suite']}   folds: {report['k_folds']}   seed: {report['seed']}",
        "",
        f"{'sequence':<12} {'mean acc %':>10} {'std %':>8}",
    ]

    def fmt(stat):
        if stat["mean"] is None:
            return f"{'-':>10} {'-':>8}"
        return f"{100 * stat['mean']:>10.2f} {100 * stat['std']:>8.2f}"

    for name in sorted(report["sequences"]):
        lines.append(f"{name:<12} {fmt(report['sequences'][name])}")
    lines.append(f"{'clutter':<12} {fmt(report['clutter_overall'])}")
    lines.append(f"{'unoccluded':<12} {fmt(report['unoccluded'])}")
    lines.append(f"{'occluded30':<12} {fmt(report['occluded30'])}")
    lines.append("")
    lines.append("per-class accuracy (all folds pooled):")
    for c, acc in report["per_class_accuracy"].items():
        shown = "-" if acc is None else f"{100 * acc:.2f}"
        lines.append(f"  {c:<16} {shown}")
    return "\n".join(lines) + "\n"
