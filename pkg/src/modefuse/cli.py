"""Command-line front end: run, fuse, metrics and split subcommands.

Exit codes: 0 success, 2 usage, 3 validation (config/manifest/format),
4 data (coverage/stratification/degenerate evaluation), 5 runtime.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import harness, metrics as met
from .errors import (
    CoverageError,
    DegenerateRocError,
    DegenerateTrainingError,
    DimensionError,
    DomainError,
    EmptyEvaluationError,
    FormatError,
    ManifestError,
    ModeFuseError,
    PairingError,
    StratificationError,
)
from .image import AugmentationConfig

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_DATA = 4
EXIT_RUNTIME = 5

_VALIDATION_ERRORS = (ManifestError, DomainError, FormatError, DimensionError, PairingError)
_DATA_ERRORS = (CoverageError, StratificationError, DegenerateRocError, EmptyEvaluationError)

OUT_ENV_VAR = "MODEFUSE_OUT"


def _out_dir(args) -> str:
    # env var overrides the output directory only
    return os.environ.get(OUT_ENV_VAR) or args.out


def _say(args, message) -> None:
    if not args.quiet:
        print(message)


def _committee_names(spec: str, augment: bool):
    if spec is None:
        spec = "augmented" if augment else "plain"
    if spec in harness.COMMITTEE_PRESETS:
        return harness.COMMITTEE_PRESETS[spec]
    return tuple(name.strip() for name in spec.split(",") if name.strip())


def _add_protocol_flags(sub):
    sub.add_argument("--manifest", required=True, help="dataset manifest (image_id,path,label)")
    sub.add_argument("--iterations", type=int, default=5)
    sub.add_argument("--train-fraction", type=float, default=0.8)


def _add_common_flags(sub):
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", default="out", help=f"output directory (env {OUT_ENV_VAR} overrides)")
    sub.add_argument("--quiet", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modefuse", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="train the built-in committee and evaluate the fused ensemble")
    _add_protocol_flags(p_run)
    p_run.add_argument("--augment", action="store_true", help="apply train-time augmentation")
    p_run.add_argument("--committee", default=None,
                       help="preset name (augmented|plain) or comma list of members")
    p_run.add_argument("--export-predictions", action="store_true",
                       help="write per-iteration prediction files in the exchange format")
    p_run.add_argument("--no-figures", action="store_true")
    _add_common_flags(p_run)

    p_fuse = sub.add_parser("fuse", help="fuse externally supplied prediction files and evaluate")
    _add_protocol_flags(p_fuse)
    group = p_fuse.add_mutually_exclusive_group(required=True)
    group.add_argument("--predictions", nargs="+",
                       help="prediction files reused for every iteration")
    group.add_argument("--predictions-dir",
                       help="directory of predictions_iter<N>.csv files, one per iteration")
    p_fuse.add_argument("--no-figures", action="store_true")
    _add_common_flags(p_fuse)

    p_metrics = sub.add_parser("metrics", help="recompute the metric suite for ad-hoc auditing")
    p_metrics.add_argument("--truth", required=True, help="delimited file with image_id,label columns")
    p_metrics.add_argument("--predictions", required=True, help="prediction exchange file")
    p_metrics.add_argument("--positive", type=int, default=met.DEFAULT_POSITIVE)
    _add_common_flags(p_metrics)

    p_split = sub.add_parser("split", help="emit a split plan for external trainers")
    _add_protocol_flags(p_split)
    _add_common_flags(p_split)
    return parser


def _load_truth(path):
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline()
        delim = "\t" if "\t" in first else ","
        header = [c.strip() for c in first.strip().split(delim)]
        if "image_id" not in header or "label" not in header:
            raise ManifestError(f"{path}: header must contain image_id and label columns")
        id_i, lab_i = header.index("image_id"), header.index("label")
        truth = {}
        for lineno, row in enumerate(csv.reader(fh, delimiter=delim), start=2):
            if not row or not "".join(row).strip():
                continue
            image_id = row[id_i].strip()
            if image_id in truth:
                raise ManifestError(f"{path}:{lineno}: duplicate image_id {image_id!r}")
            try:
                truth[image_id] = int(row[lab_i].strip())
            except ValueError:
                raise ManifestError(f"{path}:{lineno}: label is not an integer") from None
    if not truth:
        raise ManifestError(f"{path}: no truth rows")
    return truth


def cmd_run(args) -> int:
    manifest = harness.load_manifest(args.manifest)
    plan = harness.make_splits(manifest, args.iterations, args.train_fraction, args.seed)
    committee = harness.build_committee(_committee_names(args.committee, args.augment), seed=args.seed)
    aug = AugmentationConfig(seed=args.seed) if args.augment else None
    out_dir = _out_dir(args)
    export = os.path.join(out_dir, "predictions") if args.export_predictions else None
    report = harness.run_internal(manifest, plan, committee, augmentation=aug, export_dir=export)
    paths = harness.emit_report(report, out_dir, figures=not args.no_figures)
    for p in paths:
        _say(args, f"wrote {p}")
    return EXIT_OK


def cmd_fuse(args) -> int:
    manifest = harness.load_manifest(args.manifest)
    plan = harness.make_splits(manifest, args.iterations, args.train_fraction, args.seed)
    if args.predictions_dir:
        tables = []
        for i in range(plan.count):
            path = os.path.join(args.predictions_dir, f"predictions_iter{i + 1}.csv")
            if not os.path.exists(path):
                raise ManifestError(f"missing per-iteration prediction file {path}")
            tables.append(harness.load_predictions(path, manifest.labels))
    else:
        merged: dict = {}
        for path in args.predictions:
            for model_id, rows in harness.load_predictions(path, manifest.labels).items():
                if model_id in merged:
                    raise ManifestError(f"model {model_id!r} appears in more than one prediction file")
                merged[model_id] = rows
        tables = [merged]
    report = harness.run_external(manifest, plan, tables)
    out_dir = _out_dir(args)
    paths = harness.emit_report(report, out_dir, figures=not args.no_figures)
    for p in paths:
        _say(args, f"wrote {p}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    truth_map = _load_truth(args.truth)
    table = harness.load_predictions(args.predictions)
    for model_id in sorted(table):
        rows = table[model_id]
        missing = sorted(set(truth_map) - set(rows))
        if missing:
            raise CoverageError(f"model {model_id!r} missing predictions for {missing[:10]}")
        ids = sorted(truth_map)
        truth = np.array([truth_map[i] for i in ids])
        decisions = np.array([rows[i][0] for i in ids])
        scores = np.array(
            [met.positive_score(rows[i][0], rows[i][1], args.positive) for i in ids]
        )
        ms = met.metric_set(met.confusion(truth, decisions, args.positive))
        try:
            _, auc = met.roc_and_auc(truth, scores, args.positive)
        except DegenerateRocError:
            auc = None
        def show(v):
            return "n/a" if v is None else f"{v:.4f}"
        print(
            f"{model_id}: accuracy={show(ms.accuracy)} sensitivity={show(ms.sensitivity)} "
            f"specificity={show(ms.specificity)} f1={show(ms.f1)} auc={show(auc)}"
        )
    return EXIT_OK


def cmd_split(args) -> int:
    manifest = harness.load_manifest(args.manifest)
    plan = harness.make_splits(manifest, args.iterations, args.train_fraction, args.seed)
    out_dir = _out_dir(args)
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "split_plan.json")
    payload = {
        "schema_version": 1,
        "seed": plan.seed,
        "train_fraction": plan.train_fraction,
        "iterations": [
            {"train": list(train), "test": list(test)} for train, test in plan.iterations
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _say(args, f"wrote {path}")
    return EXIT_OK


_COMMANDS = {"run": cmd_run, "fuse": cmd_fuse, "metrics": cmd_metrics, "split": cmd_split}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _VALIDATION_ERRORS as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except _DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DegenerateTrainingError, ModeFuseError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
