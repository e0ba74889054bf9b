"""Single-file binary container for a trained model library.

Layout (all little-endian):

    magic   4s   b"TSLB"
    version u32  (currently 1)
    alpha, train_scale               f64 x2
    sigma1, sigma2, eps1, eps2       f64 x4
    pi rows, cols                    u32 x2
    birth lo/hi, pers lo/hi, bandwidth  f64 x5
    weighting                        u8 (0 constant, 1 linear_persistence)
    n_max, n_classes, n_models       u32 x3
    per class:  u32 byte length + utf-8 label
    per model:  view_set u8, n_slices u32, input_dim u32,
                weights f64[input_dim * n_classes] (row-major), bias f64[n_classes]

Round-trips are bit-exact: float payloads are written as raw IEEE-754 bytes.
"""

from __future__ import annotations

import struct

import numpy as np

from .classify import LogisticModel, ModelLibrary, ViewSet
from .errors import ParseError
from .slicing import SliceParams
from .vectorize import PiParams

_MAGIC = b"TSLB"
_VERSION = 1
_WEIGHTING_CODE = {"constant": 0, "linear_persistence": 1}
_WEIGHTING_NAME = {v: k for k, v in _WEIGHTING_CODE.items()}
_VIEW_CODE = {ViewSet.FRONT: 0, ViewSet.SIDE: 1, ViewSet.TOP: 2}
_VIEW_NAME = {v: k for k, v in _VIEW_CODE.items()}


def save_library(lib: ModelLibrary, path) -> None:
    keys = sorted(lib.models, key=lambda kv: (_VIEW_CODE[kv[0]], kv[1]))
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", _VERSION))
        fh.write(struct.pack("<2d", lib.alpha, lib.train_scale))
        sp = lib.slice_params
        fh.write(struct.pack("<4d", sp.sigma1, sp.sigma2, sp.eps1, sp.eps2))
        pi = lib.pi_params
        fh.write(struct.pack("<2I", pi.grid[0], pi.grid[1]))
        fh.write(
            struct.pack(
                "<5d",
                pi.birth_range[0],
                pi.birth_range[1],
                pi.pers_range[0],
                pi.pers_range[1],
                pi.bandwidth,
            )
        )
        fh.write(struct.pack("<B", _WEIGHTING_CODE[pi.weighting]))
        fh.write(struct.pack("<3I", lib.n_max, len(lib.class_labels), len(keys)))
        for label in lib.class_labels:
            raw = label.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
        for key in keys:
            model = lib.models[key]
            fh.write(struct.pack("<BII", _VIEW_CODE[key[0]], key[1], model.input_dim))
            fh.write(np.ascontiguousarray(model.weights, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(model.bias, dtype="<f8").tobytes())


def _take(buf: memoryview, offset: int, fmt: str):
    size = struct.calcsize(fmt)
    if offset + size > len(buf):
        raise ParseError("truncated library file")
    return struct.unpack_from(fmt, buf, offset), offset + size


def load_library(path) -> ModelLibrary:
    with open(path, "rb") as fh:
        buf = memoryview(fh.read())
    if bytes(buf[:4]) != _MAGIC:
        raise ParseError("not a topslice model library (bad magic)")
    (version,), off = _take(buf, 4, "<I")
    if version != _VERSION:
        raise ParseError(f"unsupported library version {version} (expected {_VERSION})")
    (alpha, train_scale), off = _take(buf, off, "<2d")
    (s1, s2, e1, e2), off = _take(buf, off, "<4d")
    (rows, cols), off = _take(buf, off, "<2I")
    (b_lo, b_hi, p_lo, p_hi, bw), off = _take(buf, off, "<5d")
    (wcode,), off = _take(buf, off, "<B")
    if wcode not in _WEIGHTING_NAME:
        raise ParseError(f"unknown weighting code {wcode}")
    (n_max, n_classes, n_models), off = _take(buf, off, "<3I")

    labels = []
    for _ in range(n_classes):
        (ln,), off = _take(buf, off, "<I")
        if off + ln > len(buf):
            raise ParseError("truncated library file")
        labels.append(bytes(buf[off : off + ln]).decode("utf-8"))
        off += ln

    models = {}
    for _ in range(n_models):
        (vcode, k, input_dim), off = _take(buf, off, "<BII")
        if vcode not in _VIEW_NAME:
            raise ParseError(f"unknown view set code {vcode}")
        w_bytes = input_dim * n_classes * 8
        if off + w_bytes + n_classes * 8 > len(buf):
            raise ParseError("truncated library file")
        weights = np.frombuffer(buf, dtype="<f8", count=input_dim * n_classes, offset=off)
        weights = weights.reshape(input_dim, n_classes).copy()
        off += w_bytes
        bias = np.frombuffer(buf, dtype="<f8", count=n_classes, offset=off).copy()
        off += n_classes * 8
        models[(_VIEW_NAME[vcode], k)] = LogisticModel(
            class_labels=tuple(labels), weights=weights, bias=bias
        )

    lib = ModelLibrary(
        models=models,
        pi_params=PiParams(
            grid=(rows, cols),
            birth_range=(b_lo, b_hi),
            pers_range=(p_lo, p_hi),
            bandwidth=bw,
            weighting=_WEIGHTING_NAME[wcode],
        ),
        slice_params=SliceParams(sigma1=s1, sigma2=s2, eps1=e1, eps2=e2),
        alpha=alpha,
        n_max=n_max,
        train_scale=train_scale,
        class_labels=tuple(labels),
    )
    lib.check_complete()
    return lib
