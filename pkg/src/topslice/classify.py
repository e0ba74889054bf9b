"""Library of per-view-set, per-slice-count probabilistic classifiers.

Training views are bucketed into front/side/top sets by which box face the
camera looks at; per set one model is trained for every slice count from 1
up to the largest object's count, each on descriptors truncated to that many
leading slices.  The reference classifier is multinomial logistic regression
fit by full-batch gradient descent with a fixed iteration count and a
spectral-bound step size — bit-deterministic and natively probabilistic.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .cloud import PointCloud
from .errors import DimensionMismatch, InsufficientData
from .normalize import ObbFrame, compute_obb, normalize
from .pipeline import diagram_extremes, slice_diagrams
from .slicing import SliceParams
from .vectorize import ObjectDescriptor, PiParams, persistence_image

log = logging.getLogger(__name__)

_AREA_TIE = 1e-9

# fixed augmentation order: all 8 mirror masks
MIRROR_MASKS = tuple(
    (bool(a), bool(b), bool(c)) for a in (0, 1) for b in (0, 1) for c in (0, 1)
)


class ViewSet(enum.Enum):
    FRONT = "front"
    SIDE = "side"
    TOP = "top"


VIEW_SET_PRIORITY = (ViewSet.FRONT, ViewSet.SIDE, ViewSet.TOP)


def assign_view_set(camera_dir: np.ndarray, obb: ObbFrame) -> ViewSet:
    """Bucket a viewpoint by the box face it looks at most directly.

    ``camera_dir`` is the unit viewing direction expressed in the box frame
    (axes = coordinate axes).  The viewed face is the one most anti-parallel
    to it; largest face area -> front, smallest -> top, else side.  Area
    ties resolve by priority front > side > top.
    """
    d = np.asarray(camera_dir, dtype=np.float64)
    k = int(np.argmax(np.abs(d)))
    areas = obb.face_areas()
    a = areas[k]
    others = np.delete(areas, k)
    if np.abs(areas - a).min(initial=np.inf, where=np.arange(3) != k) <= _AREA_TIE:
        log.debug("ambiguous view: face areas %s within tie tolerance", areas)
    if a >= others.max() - _AREA_TIE:
        return ViewSet.FRONT
    if a >= others.min() - _AREA_TIE:
        return ViewSet.SIDE
    return ViewSet.TOP


@dataclass(frozen=True)
class TrainConfig:
    iterations: int = 300
    l2: float = 1e-6
    power_iters: int = 50


@dataclass
class LogisticModel:
    """Multinomial logistic regression over flat descriptors."""

    class_labels: tuple
    weights: np.ndarray  # (input_dim, n_classes)
    bias: np.ndarray  # (n_classes,)

    @property
    def input_dim(self) -> int:
        return self.weights.shape[0]


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def fit_logistic(
    X: np.ndarray, labels, class_labels, config: TrainConfig = TrainConfig()
) -> LogisticModel:
    """Deterministic full-batch gradient descent from zero weights.

    The step size is 1/L with L the spectral bound of the multinomial
    logistic Hessian (lambda_max(X'X)/(4n) + l2), estimated by fixed-count
    power iteration, so training is scale-robust without feature scaling.
    """
    class_labels = tuple(class_labels)
    index = {c: i for i, c in enumerate(class_labels)}
    y = np.array([index[l] for l in labels], dtype=np.int64)
    n, dim = X.shape
    c = len(class_labels)
    Y = np.zeros((n, c))
    Y[np.arange(n), y] = 1.0

    v = np.full(dim, 1.0 / np.sqrt(dim))
    lam = 0.0
    for _ in range(config.power_iters):
        w = X.T @ (X @ v)
        norm = np.linalg.norm(w)
        if norm == 0:
            break
        lam = norm
        v = w / norm
    step = 1.0 / (lam / (4.0 * n) + config.l2 + 1e-12)

    W = np.zeros((dim, c))
    b = np.zeros(c)
    for _ in range(config.iterations):
        P = _softmax(X @ W + b)
        G = X.T @ (P - Y) / n + config.l2 * W
        W -= step * G
        b -= step * (P - Y).mean(axis=0)
    return LogisticModel(class_labels=class_labels, weights=W, bias=b)


def predict(model: LogisticModel, descriptor) -> np.ndarray:
    """Probability vector over the model's classes.

    Shorter descriptors are zero-padded to the model input dimension;
    longer ones are an error.
    """
    x = descriptor.values if isinstance(descriptor, ObjectDescriptor) else np.asarray(descriptor, dtype=np.float64)
    if x.shape[0] > model.input_dim:
        raise DimensionMismatch(
            f"descriptor length {x.shape[0]} exceeds model input {model.input_dim}"
        )
    if x.shape[0] < model.input_dim:
        x = np.concatenate([x, np.zeros(model.input_dim - x.shape[0])])
    return _softmax(x @ model.weights + model.bias)


@dataclass(frozen=True)
class TrainingView:
    """One rendered partial view: cloud in camera frame, class label, and
    the unit camera->object direction in the same frame."""

    cloud: PointCloud
    label: str
    viewpoint: np.ndarray


@dataclass
class ModelLibrary:
    """Classifiers indexed by (view set, slice count) plus the frozen
    descriptor parameters shared between training and test."""

    models: dict  # (ViewSet, n_slices) -> LogisticModel
    pi_params: PiParams
    slice_params: SliceParams
    alpha: float
    n_max: int
    train_scale: float
    class_labels: tuple

    def view_sets(self):
        return sorted({vs for vs, _ in self.models}, key=VIEW_SET_PRIORITY.index)

    def model(self, view_set: ViewSet, n_slices: int) -> LogisticModel:
        return self.models[(view_set, n_slices)]

    def check_complete(self):
        for vs in self.view_sets():
            have = sorted(k for s, k in self.models if s == vs)
            if have != list(range(1, self.n_max + 1)):
                raise AssertionError(
                    f"library incomplete for {vs.value}: slice counts {have}"
                )


@dataclass(frozen=True)
class TrainSample:
    """One augmented training example, reduced to per-slice diagrams."""

    view_index: int
    view_set: ViewSet
    label: str
    diagrams: object  # pipeline.SliceDiagrams


def prepare_training_samples(training_views, slice_params: SliceParams, alpha: float):
    """Expand views by the 8 mirror masks and reduce each to diagrams.

    This is the expensive, fold-independent half of training; the samples
    can be reused across cross-validation folds.
    """
    samples = []
    for vi, view in enumerate(training_views):
        obb = compute_obb(view.cloud)
        d = np.asarray(view.viewpoint, dtype=np.float64)
        d = d / np.linalg.norm(d)
        vs = assign_view_set(obb.rotation.T @ d, obb)
        for mask in MIRROR_MASKS:
            aligned = normalize(view.cloud, alpha, mask)
            sd = slice_diagrams(aligned, slice_params)
            samples.append(
                TrainSample(view_index=vi, view_set=vs, label=view.label, diagrams=sd)
            )
    return samples


def library_from_samples(
    samples,
    *,
    slice_params: SliceParams,
    alpha: float,
    train_scale: float,
    pi_grid=(16, 16),
    pi_bandwidth: float = None,
    weighting: str = "constant",
    train_config: TrainConfig = TrainConfig(),
) -> ModelLibrary:
    """Calibrate PI ranges on the samples and fit every (view set, slice
    count) model; per-slice-count matrices are zero-truncations of one
    descriptor matrix, which keeps the prefix relation byte-exact."""
    samples = list(samples)
    if not samples:
        raise InsufficientData("no training samples")
    class_labels = tuple(sorted({s.label for s in samples}))

    n_max = max(s.diagrams.n_blocks for s in samples)
    max_birth = 0.0
    max_pers = 0.0
    for s in samples:
        b, p = diagram_extremes(s.diagrams)
        max_birth = max(max_birth, b)
        max_pers = max(max_pers, p)
    pi_params = PiParams(
        grid=tuple(pi_grid),
        birth_range=(0.0, max(max_birth, 1e-6)),
        pers_range=(0.0, max(max_pers, 1e-6)),
        bandwidth=pi_bandwidth,
        weighting=weighting,
    )

    size = pi_params.pi_size
    models = {}
    for vs in VIEW_SET_PRIORITY:
        rows = [s for s in samples if s.view_set == vs]
        if not rows:
            continue
        labels = [s.label for s in rows]
        counts = {c: labels.count(c) for c in set(labels)}
        thin = sorted(c for c, n in counts.items() if n < 2)
        if thin:
            raise InsufficientData(
                f"classes {thin} have < 2 samples in the {vs.value} set"
            )
        X = np.zeros((len(rows), n_max * size))
        for r, s in enumerate(rows):
            for i, pd in enumerate(s.diagrams.diagrams):
                X[r, i * size : (i + 1) * size] = persistence_image(
                    pd, pi_params
                ).ravel()
        for k in range(1, n_max + 1):
            Xk = X.copy()
            Xk[:, k * size :] = 0.0
            models[(vs, k)] = fit_logistic(Xk, labels, class_labels, train_config)

    library = ModelLibrary(
        models=models,
        pi_params=pi_params,
        slice_params=slice_params,
        alpha=float(alpha),
        n_max=n_max,
        train_scale=float(train_scale),
        class_labels=class_labels,
    )
    library.check_complete()
    return library


def train_library(
    training_views,
    *,
    slice_params: SliceParams,
    alpha: float,
    train_scale: float,
    pi_grid=(16, 16),
    pi_bandwidth: float = None,
    weighting: str = "constant",
    train_config: TrainConfig = TrainConfig(),
) -> ModelLibrary:
    """Build the full classifier library from per-view training clouds.

    Every view is mirrored across all 8 axis combinations (in place, before
    the final alpha rotation) and assigned to a view set from its own box
    and viewpoint; see :func:`library_from_samples` for the model grid.
    """
    views = list(training_views)
    if not views:
        raise InsufficientData("no training views")
    samples = prepare_training_samples(views, slice_params, alpha)
    return library_from_samples(
        samples,
        slice_params=slice_params,
        alpha=alpha,
        train_scale=train_scale,
        pi_grid=pi_grid,
        pi_bandwidth=pi_bandwidth,
        weighting=weighting,
        train_config=train_config,
    )


@dataclass
class CrossvalReport:
    per_class: dict  # label -> (mean, std) of per-fold accuracy
    mean_accuracy: float
    std_accuracy: float
    fold_accuracies: list = field(default_factory=list)

    def to_dict(self):
        return {
            "per_class": {
                c: {"mean": m, "std": s} for c, (m, s) in sorted(self.per_class.items())
            },
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "fold_accuracies": self.fold_accuracies,
        }


def stratified_folds(labels, k_folds: int, seed: int = 0):
    """Deterministic stratified fold assignment; returns an int array."""
    labels = list(labels)
    rng = np.random.default_rng(seed)
    fold = np.empty(len(labels), dtype=np.int64)
    for c in sorted(set(labels)):
        idx = np.array([i for i, l in enumerate(labels) if l == c])
        if idx.shape[0] < k_folds:
            raise InsufficientData(
                f"class {c!r} has {idx.shape[0]} samples, need >= {k_folds}"
            )
        idx = idx[rng.permutation(idx.shape[0])]
        fold[idx] = np.arange(idx.shape[0]) % k_folds
    return fold


def crossval(
    X: np.ndarray,
    labels,
    k_folds: int = 5,
    seed: int = 0,
    train_config: TrainConfig = TrainConfig(),
) -> CrossvalReport:
    """Stratified k-fold cross validation of the reference classifier.

    Accuracy is macro-averaged over classes per fold; the report carries
    mean and standard deviation across folds.
    """
    labels = list(labels)
    class_labels = tuple(sorted(set(labels)))
    fold = stratified_folds(labels, k_folds, seed)
    per_class = {c: [] for c in class_labels}
    fold_acc = []
    for f in range(k_folds):
        test = fold == f
        train = ~test
        model = fit_logistic(
            X[train], [l for l, t in zip(labels, train) if t], class_labels,
            train_config,
        )
        probs = _softmax(X[test] @ model.weights + model.bias)
        pred = np.argmax(probs, axis=1)
        truth = np.array([class_labels.index(l) for l, t in zip(labels, test) if t])
        accs = []
        for ci, c in enumerate(class_labels):
            sel = truth == ci
            acc = float((pred[sel] == ci).mean()) if sel.any() else 0.0
            per_class[c].append(acc)
            accs.append(acc)
        fold_acc.append(float(np.mean(accs)))
    return CrossvalReport(
        per_class={
            c: (float(np.mean(v)), float(np.std(v))) for c, v in per_class.items()
        },
        mean_accuracy=float(np.mean(fold_acc)),
        std_accuracy=float(np.std(fold_acc)),
        fold_accuracies=fold_acc,
    )
