"""Persistence images and fixed-length stacked object descriptors.

A diagram is rendered on a birth/persistence grid by dropping a normalized
isotropic Gaussian on every (birth, death-birth) point; the per-slice images
are flattened row-major and concatenated in slice order, zero-padded to a
library-wide slice count so every descriptor has the same length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, ParseError, TooManySlices
from .topology.persistence import PersistenceDiagram

WEIGHTINGS = ("linear_persistence", "constant")


@dataclass(frozen=True)
class PiParams:
    """Persistence-image grid, value ranges, kernel width and weighting.

    The ranges are calibrated once (on the training set) and serialized with
    the model library; train and test must share them.
    """

    grid: tuple = (16, 16)  # (rows, cols) = (persistence, birth) cells
    birth_range: tuple = (0.0, 1.0)
    pers_range: tuple = (0.0, 1.0)
    bandwidth: float = None
    weighting: str = "constant"

    def __post_init__(self):
        rows, cols = self.grid
        if rows <= 0 or cols <= 0:
            raise InvalidParams("grid dimensions must be positive")
        if not (self.birth_range[1] > self.birth_range[0]):
            raise InvalidParams("birth_range must have hi > lo")
        if not (self.pers_range[1] > self.pers_range[0]):
            raise InvalidParams("pers_range must have hi > lo")
        if self.bandwidth is None:
            # pers_range/10 keeps single-column peaks separable while
            # tolerating the small birth/persistence shifts partial views
            # introduce (measurably better than /16 on occluded data)
            object.__setattr__(self, "bandwidth", self.pers_range[1] / 10.0)
        if not self.bandwidth > 0:
            raise InvalidParams("bandwidth must be positive")
        if self.weighting not in WEIGHTINGS:
            raise InvalidParams(f"unknown weighting {self.weighting!r}")
        object.__setattr__(self, "grid", (int(rows), int(cols)))
        object.__setattr__(
            self, "birth_range", (float(self.birth_range[0]), float(self.birth_range[1]))
        )
        object.__setattr__(
            self, "pers_range", (float(self.pers_range[0]), float(self.pers_range[1]))
        )

    @property
    def pi_size(self) -> int:
        return self.grid[0] * self.grid[1]

    def cell_centers(self):
        rows, cols = self.grid
        b_lo, b_hi = self.birth_range
        p_lo, p_hi = self.pers_range
        bc = b_lo + (np.arange(cols) + 0.5) * (b_hi - b_lo) / cols
        pc = p_lo + (np.arange(rows) + 0.5) * (p_hi - p_lo) / rows
        return bc, pc

    @property
    def cell_area(self) -> float:
        rows, cols = self.grid
        return (
            (self.birth_range[1] - self.birth_range[0])
            / cols
            * (self.pers_range[1] - self.pers_range[0])
            / rows
        )


def gaussian_lipschitz_bound(params: PiParams, n_points: int, w_max: float = 1.0) -> float:
    """Worst-case PI entry change per unit diagram perturbation: each point
    contributes at most w_max * (2*pi*s^2)^-1 * s^-1 * e^-1/2."""
    s = params.bandwidth
    per_point = w_max / (2.0 * math.pi * s * s) / s * math.exp(-0.5)
    return n_points * per_point


def persistence_image(pd: PersistenceDiagram, params: PiParams) -> np.ndarray:
    """Gaussian-convolved birth/persistence image of a filtered diagram.

    Out-of-range points are clamped to the range boundary; accumulation runs
    in sorted point order so the result is bit-deterministic.  Returns a
    (rows, cols) array, rows indexing persistence, cols indexing birth.
    """
    rows, cols = params.grid
    img = np.zeros((rows, cols))
    if len(pd) == 0:
        return img
    birth = pd.points[:, 0]
    pers = pd.points[:, 1] - pd.points[:, 0]
    birth = np.clip(birth, params.birth_range[0], params.birth_range[1])
    pers = np.clip(pers, params.pers_range[0], params.pers_range[1])
    order = np.lexsort((pers, birth))

    bc, pc = params.cell_centers()
    s2 = params.bandwidth * params.bandwidth
    norm = 1.0 / (2.0 * math.pi * s2)
    for i in order:
        gb = np.exp(-((bc - birth[i]) ** 2) / (2.0 * s2))
        gp = np.exp(-((pc - pers[i]) ** 2) / (2.0 * s2))
        if params.weighting == "linear_persistence":
            w = pers[i] / params.pers_range[1]
        else:
            w = 1.0
        img += (w * norm) * np.outer(gp, gb)
    return img


@dataclass(frozen=True)
class ObjectDescriptor:
    """Flat stack of per-slice persistence images, zero-padded.

    ``values`` has length n_padded * pi_size; the first ``n_slices`` blocks
    are the slice images in slice-index order, the rest exact zeros.
    """

    values: np.ndarray
    n_slices: int
    pi_size: int

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64)).ravel()
        object.__setattr__(self, "values", vals)

    @property
    def n_padded(self) -> int:
        return self.values.shape[0] // self.pi_size

    def block(self, i: int) -> np.ndarray:
        return self.values[i * self.pi_size : (i + 1) * self.pi_size]

    def blocks(self) -> np.ndarray:
        return self.values.reshape(-1, self.pi_size)


def build_descriptor(
    diagrams, n_slices_padded: int, params: PiParams
) -> ObjectDescriptor:
    """Stack per-slice PIs (row-major) and zero-pad to the library width."""
    if len(diagrams) > n_slices_padded:
        raise TooManySlices(
            f"{len(diagrams)} slice diagrams exceed padding {n_slices_padded}"
        )
    size = params.pi_size
    values = np.zeros(n_slices_padded * size)
    for i, pd in enumerate(diagrams):
        values[i * size : (i + 1) * size] = persistence_image(pd, params).ravel()
    return ObjectDescriptor(values=values, n_slices=len(diagrams), pi_size=size)


def dump_descriptor(desc: ObjectDescriptor, path) -> None:
    """Text dump: one value per line, 17 significant digits; a header
    comment records the block structure."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# topslice descriptor n_slices={desc.n_slices} pi_size={desc.pi_size}\n")
        for v in desc.values:
            fh.write(f"{v:.17g}\n")


def load_descriptor(path) -> ObjectDescriptor:
    n_slices = None
    pi_size = None
    vals = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line.startswith("#"):
                for tok in line.split():
                    if tok.startswith("n_slices="):
                        n_slices = int(tok.partition("=")[2])
                    elif tok.startswith("pi_size="):
                        pi_size = int(tok.partition("=")[2])
                continue
            if not line:
                continue
            try:
                vals.append(float(line))
            except ValueError:
                raise ParseError("expected one real per line", line=lineno) from None
    if n_slices is None or pi_size is None:
        raise ParseError("missing descriptor header", line=1)
    return ObjectDescriptor(np.array(vals), n_slices=n_slices, pi_size=pi_size)
