"""Command-line interface.

Subcommands: gen-data, train, recognize, evaluate, oracle, plot.  Exit
codes: 0 success, 2 usage error, 3 data error, 4 verification failure.
Every command is deterministic under a fixed seed and logs its resolved
configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classify import TrainConfig
from .errors import TopsliceError
from .evaluate import evaluate_dataset, load_dataset, report_to_text, train_fold_library
from .library_io import load_library, save_library
from .recognize import RecognizeConfig, recognize_scene
from .slicing import SliceParams

log = logging.getLogger("topslice")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_VERIFY = 4

DEFAULT_ALPHA_DEG = 45.0
DEFAULT_SIGMA1 = 0.1
DEFAULT_SIGMA2 = 0.025


def _read_config_file(path):
    """key value lines; '#' comments."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition(" ")
        if not value:
            raise TopsliceError(f"{path}:{lineno}: expected 'key value'")
        out[key.replace("-", "_")] = value
    return out


def _apply_config_overrides(args, parser):
    if getattr(args, "config", None):
        overrides = _read_config_file(args.config)
        for key, value in overrides.items():
            if not hasattr(args, key):
                parser.error(f"unknown config key {key!r}")
            current = getattr(args, key)
            caster = type(current) if current is not None else float
            setattr(args, key, caster(value))
    return args


def _descriptor_kwargs(args):
    return {
        "slice_params": SliceParams(sigma1=args.sigma1, sigma2=args.sigma2),
        "alpha": np.deg2rad(args.alpha),
        "pi_grid": (args.pi_grid, args.pi_grid),
        "pi_bandwidth": args.pi_bandwidth,
        "weighting": args.weighting,
    }


def _add_descriptor_flags(p):
    p.add_argument("--sigma1", type=float, default=DEFAULT_SIGMA1,
                   help="slice thickness along z, meters")
    p.add_argument("--sigma2", type=float, default=DEFAULT_SIGMA2,
                   help="column width along x, meters")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA_DEG,
                   help="final rotation about y, degrees")
    p.add_argument("--pi-grid", type=int, default=16,
                   help="persistence image resolution (NxN)")
    p.add_argument("--pi-bandwidth", type=float, default=None,
                   help="Gaussian bandwidth (default: pers range / 16)")
    p.add_argument("--weighting", choices=["linear_persistence", "constant"],
                   default="constant")
    p.add_argument("--config", type=str, default=None,
                   help="key-value config file overriding flags")


def cmd_gen_data(args):
    from .datagen.scenes import generate_suite

    manifest = generate_suite(args.out, args.suite, seed=args.seed)
    n_scenes = sum(len(v) for v in manifest["sequences"].values())
    log.info(
        "suite=%s classes=%d scenes=%d -> %s",
        args.suite, len(manifest["classes"]), n_scenes, args.out,
    )
    return EXIT_OK


def cmd_train(args):
    dataset = load_dataset(args.data)
    lib = train_fold_library(
        dataset.views,
        train_config=TrainConfig(iterations=args.iterations),
        **_descriptor_kwargs(args),
    )
    save_library(lib, args.out)
    counts = {}
    for vs, _ in lib.models:
        counts[vs.value] = counts.get(vs.value, 0) + 1
    log.info(
        "trained library: n_max=%d classes=%d view-set models=%s -> %s",
        lib.n_max, len(lib.class_labels), counts, args.out,
    )
    print(f"n_max {lib.n_max}")
    for vs in lib.view_sets():
        print(f"models {vs.value} {sum(1 for s, _ in lib.models if s == vs)}")
    return EXIT_OK


def cmd_recognize(args):
    from .cloud import load_scene

    lib = load_library(args.lib)
    scene = load_scene(args.scene)
    config = RecognizeConfig(tau_ratio=args.tau_ratio, tau_d=args.tau_d)
    results = recognize_scene(scene, lib, config)
    payload = {
        "schema_version": 1,
        "results": [r.to_record() for r in results],
    }
    text = json.dumps(payload, indent=1, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    return EXIT_OK


def cmd_evaluate(args):
    dataset = load_dataset(args.data)
    kwargs = _descriptor_kwargs(args)
    if args.lib:
        lib = load_library(args.lib)
        kwargs = {
            "slice_params": lib.slice_params,
            "alpha": lib.alpha,
            "pi_grid": lib.pi_params.grid,
            "pi_bandwidth": lib.pi_params.bandwidth,
            "weighting": lib.pi_params.weighting,
        }
    report = evaluate_dataset(
        dataset,
        k_folds=args.folds,
        seed=args.seed,
        train_config=TrainConfig(iterations=args.iterations),
        **kwargs,
    )
    text = report_to_text(report)
    print(text, end="")
    if args.report:
        Path(args.report).write_text(text)
        Path(args.report).with_suffix(".json").write_text(
            json.dumps(report, indent=1, sort_keys=True)
        )
    return EXIT_OK


def cmd_oracle(args):
    from .topology.oracle import run_oracle_trials

    mismatches, first_fail = run_oracle_trials(
        args.n_trials, max_points=args.max_points, seed=args.seed
    )
    if mismatches:
        print(
            f"FAIL: {mismatches}/{args.n_trials} mismatches; "
            f"first failing seed {first_fail}"
        )
        return EXIT_VERIFY
    print(f"OK: {args.n_trials} trials, kernel matches brute-force oracle")
    return EXIT_OK


def cmd_plot(args):
    if (args.descriptor is None) == (args.diagram is None):
        raise TopsliceError("pass exactly one of --descriptor / --diagram")
    if args.diagram:
        from .plotting import plot_diagram
        from .topology.persistence import load_diagram

        plot_diagram(load_diagram(args.diagram), args.out)
    else:
        from .plotting import plot_descriptor
        from .vectorize import load_descriptor

        desc = load_descriptor(args.descriptor)
        rows = int(round(np.sqrt(desc.pi_size)))
        plot_descriptor(desc, (rows, desc.pi_size // rows), args.out)
    log.info("wrote %s", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topslice",
        description="Slicing-based topological descriptors and occlusion-"
        "robust object recognition.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic suite dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--suite", choices=["cuboidal", "curved", "mixed"], required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a model library from a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--iterations", type=int, default=300)
    _add_descriptor_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("recognize", help="recognize all instances in a scene")
    p.add_argument("--lib", required=True)
    p.add_argument("--scene", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--tau-ratio", type=float, default=1.15)
    p.add_argument("--tau-d", type=float, default=0.01)
    p.set_defaults(func=cmd_recognize)

    p = sub.add_parser("evaluate", help="k-fold evaluation over a dataset")
    p.add_argument("--lib", default=None,
                   help="take descriptor parameters from this library")
    p.add_argument("--data", required=True)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default=None)
    p.add_argument("--iterations", type=int, default=300)
    _add_descriptor_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("oracle", help="verify the persistence kernel")
    p.add_argument("--n-trials", type=int, default=1000)
    p.add_argument("--max-points", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("plot", help="plot a diagram or descriptor dump")
    p.add_argument("--descriptor", default=None)
    p.add_argument("--diagram", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = _apply_config_overrides(args, parser)
    if hasattr(args, "sigma1"):
        log.info(
            "config: %s",
            {k: v for k, v in vars(args).items() if k not in ("func", "verbose")},
        )
    try:
        return args.func(args)
    except TopsliceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
