"""Evaluation harness: manifest loading, repeated stratified holdout
splits, internal committee runs, external prediction ingestion, and
report emission (JSON + rendered table, optional figures).
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import image as img_mod
from . import models as mdl
from .errors import (
    CoverageError,
    DomainError,
    ManifestError,
    StratificationError,
)
from .fusion import BINARY_LABELS, DecisionMatrix, ScoreMatrix, fuse
from .errors import DegenerateRocError
from .metrics import (
    DEFAULT_POSITIVE,
    MetricSet,
    confusion,
    metric_set,
    positive_score,
    roc_and_auc,
)

METRIC_NAMES = ("accuracy", "sensitivity", "specificity", "f1", "auc")
REPORT_SCHEMA_VERSION = 1
ENSEMBLE_KEY = "ensemble"


# ---------------------------------------------------------------------------
# dataset manifest


@dataclass(frozen=True)
class ManifestEntry:
    image_id: str
    path: str
    label: int


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    labels: tuple[int, ...] = BINARY_LABELS

    @property
    def k(self) -> int:
        return len(self.entries)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(e.image_id for e in self.entries)

    def label_of(self, image_id: str) -> int:
        return self._by_id[image_id].label

    def path_of(self, image_id: str) -> str:
        return self._by_id[image_id].path

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {e.image_id: e for e in self.entries})


def _sniff_delimiter(header_line: str) -> str:
    return "\t" if "\t" in header_line else ","


def load_manifest(path, labels: tuple[int, ...] = BINARY_LABELS) -> DatasetManifest:
    """Parse a delimited manifest with header columns image_id, path, label."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            first = fh.readline()
            if not first.strip():
                raise ManifestError(f"{path}: empty manifest")
            delim = _sniff_delimiter(first)
            header = [c.strip() for c in first.strip().split(delim)]
            required = ("image_id", "path", "label")
            if not set(required) <= set(header):
                raise ManifestError(f"{path}: header must contain columns {required}, got {header}")
            idx = {name: header.index(name) for name in required}
            entries = []
            seen = set()
            legal = set(labels)
            for lineno, row in enumerate(csv.reader(fh, delimiter=delim), start=2):
                if not row or not "".join(row).strip():
                    continue
                if len(row) < len(header):
                    raise ManifestError(f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}")
                image_id = row[idx["image_id"]].strip()
                try:
                    label = int(row[idx["label"]].strip())
                except ValueError:
                    raise ManifestError(f"{path}:{lineno}: label {row[idx['label']]!r} is not an integer") from None
                if label not in legal:
                    raise ManifestError(f"{path}:{lineno}: unknown label code {label}; codebook is {sorted(legal)}")
                if image_id in seen:
                    raise ManifestError(f"{path}:{lineno}: duplicate image_id {image_id!r}")
                seen.add(image_id)
                entries.append(ManifestEntry(image_id, row[idx["path"]].strip(), label))
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    if not entries:
        raise ManifestError(f"{path}: manifest has no entries")
    return DatasetManifest(entries=tuple(entries), labels=labels)


# ---------------------------------------------------------------------------
# split planning


@dataclass(frozen=True)
class SplitPlan:
    iterations: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]  # (train_ids, test_ids) per iteration
    train_fraction: float
    seed: int

    @property
    def count(self) -> int:
        return len(self.iterations)


def _train_counts(class_sizes: dict[int, int], train_fraction: float) -> dict[int, int]:
    """Largest-remainder allocation of round(train_fraction * k) across classes."""
    k = sum(class_sizes.values())
    total_train = int(math.floor(train_fraction * k + 0.5))
    floors = {c: int(math.floor(train_fraction * n)) for c, n in class_sizes.items()}
    remainders = sorted(
        class_sizes,
        key=lambda c: (-(train_fraction * class_sizes[c] - floors[c]), c),
    )
    extra = total_train - sum(floors.values())
    counts = dict(floors)
    for c in remainders[:extra]:
        counts[c] += 1
    for c, n in class_sizes.items():
        counts[c] = min(max(counts[c], 1), n - 1)
    return counts


def make_splits(
    manifest: DatasetManifest,
    iterations: int = 5,
    train_fraction: float = 0.8,
    seed: int = 0,
) -> SplitPlan:
    """R independent stratified random splits, deterministic given the seed."""
    if manifest.k < 2:
        raise StratificationError("need at least 2 images to split")
    if not 0.0 < train_fraction < 1.0:
        raise DomainError("train_fraction must lie strictly between 0 and 1")
    by_class: dict[int, list[str]] = {}
    for e in manifest.entries:
        by_class.setdefault(e.label, []).append(e.image_id)
    for label in manifest.labels:
        if label not in by_class:
            raise StratificationError(f"class {label} absent from manifest")
        if len(by_class[label]) < 2:
            raise StratificationError(f"class {label} needs >= 2 samples to appear in both partitions")
    counts = _train_counts({c: len(ids) for c, ids in by_class.items()}, train_fraction)

    plans = []
    for i in range(iterations):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(i,)))
        train, test = [], []
        for label in sorted(by_class):
            ids = by_class[label]
            order = rng.permutation(len(ids))
            cut = counts[label]
            train.extend(ids[j] for j in order[:cut])
            test.extend(ids[j] for j in order[cut:])
        plans.append((tuple(sorted(train)), tuple(sorted(test))))
    return SplitPlan(iterations=tuple(plans), train_fraction=train_fraction, seed=seed)


# ---------------------------------------------------------------------------
# committee definition


@dataclass(frozen=True)
class CommitteeMember:
    model_id: str
    kind: str  # "logistic" or "centroid"
    feature_side: int
    train_config: mdl.TrainConfig = mdl.TrainConfig()


MEMBER_REGISTRY = {
    "centroid32": ("centroid", 32),
    "logreg32": ("logistic", 32),
    "logreg16": ("logistic", 16),
    "centroid16": ("centroid", 16),
}

# default committees for the augmented and plain configurations; the two
# share their logistic members
COMMITTEE_PRESETS = {
    "augmented": ("centroid32", "logreg32", "logreg16"),
    "plain": ("centroid16", "logreg32", "logreg16"),
}


def build_committee(names, seed: int = 0) -> tuple[CommitteeMember, ...]:
    members = []
    for i, name in enumerate(names):
        if name not in MEMBER_REGISTRY:
            raise DomainError(f"unknown committee member {name!r}; known: {sorted(MEMBER_REGISTRY)}")
        kind, side = MEMBER_REGISTRY[name]
        members.append(
            CommitteeMember(
                model_id=name,
                kind=kind,
                feature_side=side,
                train_config=mdl.TrainConfig(seed=seed * 1000 + i),
            )
        )
    return tuple(members)


# ---------------------------------------------------------------------------
# prediction exchange


@dataclass(frozen=True)
class PredictionRecord:
    model_id: str
    image_id: str
    decision: int
    score: float


def load_predictions(path, labels: tuple[int, ...] = BINARY_LABELS):
    """Read a delimited prediction file into {model_id: {image_id: (decision, score)}}.

    Columns model_id, image_id, decision, score with a header row; a file
    may carry one model or several.
    """
    table: dict[str, dict[str, tuple[int, float]]] = {}
    legal = set(labels)
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline()
        delim = _sniff_delimiter(first)
        header = [c.strip() for c in first.strip().split(delim)]
        required = ("model_id", "image_id", "decision", "score")
        if not set(required) <= set(header):
            raise ManifestError(f"{path}: header must contain columns {required}, got {header}")
        idx = {name: header.index(name) for name in required}
        for lineno, row in enumerate(csv.reader(fh, delimiter=delim), start=2):
            if not row or not "".join(row).strip():
                continue
            model_id = row[idx["model_id"]].strip()
            image_id = row[idx["image_id"]].strip()
            try:
                decision = int(row[idx["decision"]].strip())
                score = float(row[idx["score"]].strip())
            except ValueError:
                raise ManifestError(f"{path}:{lineno}: malformed decision/score") from None
            if decision not in legal:
                raise DomainError(f"{path}:{lineno}: illegal decision {decision} for model {model_id!r} image {image_id!r}")
            if not 0.0 <= score <= 1.0:
                raise DomainError(f"{path}:{lineno}: score {score} out of [0,1] for model {model_id!r} image {image_id!r}")
            per_model = table.setdefault(model_id, {})
            if image_id in per_model:
                raise ManifestError(f"{path}:{lineno}: duplicate record for ({model_id}, {image_id})")
            per_model[image_id] = (decision, score)
    if not table:
        raise ManifestError(f"{path}: no prediction records")
    return table


def write_predictions(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model_id", "image_id", "decision", "score"])
        for r in records:
            writer.writerow([r.model_id, r.image_id, r.decision, repr(r.score)])


# ---------------------------------------------------------------------------
# evaluation report


@dataclass
class EvalReport:
    iterations: int
    model_ids: list[str]  # committee members; the ensemble row is implicit
    per_iteration: dict[str, dict[str, list[float | None]]]
    config: dict
    roc_curves: dict = field(default_factory=dict, repr=False)  # last iteration, per row

    def summary(self) -> dict:
        out = {}
        for key in self.model_ids + [ENSEMBLE_KEY]:
            row = {}
            for name in METRIC_NAMES:
                values = self.per_iteration[key][name]
                defined = [v for v in values if v is not None]
                row[name] = {
                    "mean": float(np.mean(defined)) if defined else None,
                    "std": float(np.std(defined)) if defined else None,
                    "undefined": len(values) - len(defined),
                }
            out[key] = row
        return out


def _evaluate_rows(truth, rows, positive):
    """MetricSet + ROC per labelled (decisions, positive_scores) row."""
    out = {}
    curves = {}
    for key, (decisions, pos_scores) in rows.items():
        counts = confusion(truth, decisions, positive)
        base = metric_set(counts)
        try:
            curve, auc = roc_and_auc(truth, pos_scores, positive)
            curves[key] = curve
        except DegenerateRocError:
            auc = None  # single-class test set: auc undefined, excluded from aggregation
        out[key] = MetricSet(
            accuracy=base.accuracy,
            sensitivity=base.sensitivity,
            specificity=base.specificity,
            f1=base.f1,
            auc=auc,
        )
    return out, curves


def _evaluate_matrices(truth, d: DecisionMatrix, s: ScoreMatrix, positive):
    """Per-model and ensemble metrics for one iteration's test matrices."""
    fused = fuse(d, s)
    rows = {}
    for r, model_id in enumerate(d.row_ids):
        pos_scores = np.array(
            [positive_score(int(dec), float(sc), positive) for dec, sc in zip(d.data[r], s.data[r])]
        )
        rows[model_id] = (d.data[r], pos_scores)
    ens_scores = np.array(
        [positive_score(int(dec), float(sc), positive) for dec, sc in zip(fused.dm, fused.ds)]
    )
    rows[ENSEMBLE_KEY] = (fused.dm, ens_scores)
    return _evaluate_rows(truth, rows, positive)


def _append_iteration(per_iteration, metric_sets):
    for key, ms in metric_sets.items():
        slot = per_iteration.setdefault(key, {name: [] for name in METRIC_NAMES})
        for name in METRIC_NAMES:
            slot[name].append(getattr(ms, name))


def run_internal(
    manifest: DatasetManifest,
    plan: SplitPlan,
    committee,
    augmentation: img_mod.AugmentationConfig | None = None,
    positive: int = DEFAULT_POSITIVE,
    export_dir=None,
) -> EvalReport:
    """Train the committee per iteration, fuse its test predictions, and
    aggregate metrics over iterations.

    Augmentation, when given, is applied to training images only; each
    (iteration, image) pair owns an RNG stream so results are independent
    of scheduling.  ``export_dir`` additionally writes one prediction file
    per iteration in the exchange format.
    """
    images = {e.image_id: img_mod.load_image(e.path) for e in manifest.entries}
    index_of = {iid: i for i, iid in enumerate(manifest.ids)}
    model_ids = [m.model_id for m in committee]
    if len(set(model_ids)) != len(model_ids):
        raise DomainError("duplicate model_id in committee")

    per_iteration: dict[str, dict[str, list[float | None]]] = {}
    roc_curves = {}
    if export_dir is not None:
        os.makedirs(export_dir, exist_ok=True)

    for it, (train_ids, test_ids) in enumerate(plan.iterations):
        train_images = {}
        for iid in train_ids:
            img = images[iid]
            if augmentation is not None:
                stream = img_mod.rng_stream(
                    augmentation.seed, it * manifest.k + index_of[iid]
                )
                img = img_mod.augment(img, augmentation, stream)
            train_images[iid] = img

        train_labels = np.array([manifest.label_of(i) for i in train_ids])
        sides = sorted({m.feature_side for m in committee})
        train_feats = {
            side: np.array([mdl.extract_features(train_images[i], side) for i in train_ids])
            for side in sides
        }
        test_feats = {
            side: np.array([mdl.extract_features(images[i], side) for i in test_ids])
            for side in sides
        }

        d_rows, s_rows = [], []
        for member in committee:
            X = train_feats[member.feature_side]
            if member.kind == "logistic":
                cfg = replace(member.train_config, seed=member.train_config.seed + it)
                try:
                    model = mdl.sgdm_train(X, train_labels, cfg)
                except Exception as exc:
                    raise type(exc)(f"iteration {it + 1}, model {member.model_id}: {exc}") from exc
                preds = [mdl.predict(model, x) for x in test_feats[member.feature_side]]
            elif member.kind == "centroid":
                try:
                    model = mdl.nearest_centroid_train(X, train_labels)
                except Exception as exc:
                    raise type(exc)(f"iteration {it + 1}, model {member.model_id}: {exc}") from exc
                preds = [mdl.nearest_centroid_predict(model, x) for x in test_feats[member.feature_side]]
            else:
                raise DomainError(f"unknown member kind {member.kind!r}")
            d_rows.append([p[0] for p in preds])
            s_rows.append([p[1] for p in preds])

        d = DecisionMatrix(np.array(d_rows), tuple(model_ids), tuple(test_ids), labels=manifest.labels)
        s = ScoreMatrix(np.array(s_rows), tuple(model_ids), tuple(test_ids))

        if export_dir is not None:
            records = [
                PredictionRecord(mid, iid, int(d.data[r, j]), float(s.data[r, j]))
                for r, mid in enumerate(model_ids)
                for j, iid in enumerate(test_ids)
            ]
            write_predictions(records, os.path.join(export_dir, f"predictions_iter{it + 1}.csv"))

        truth = np.array([manifest.label_of(i) for i in test_ids])
        metric_sets, curves = _evaluate_matrices(truth, d, s, positive)
        _append_iteration(per_iteration, metric_sets)
        roc_curves = curves

    config = {
        "mode": "internal",
        "seed": plan.seed,
        "iterations": plan.count,
        "train_fraction": plan.train_fraction,
        "positive_label": positive,
        "committee": model_ids,
        "augmentation": None
        if augmentation is None
        else {
            "reflect_probability": augmentation.reflect_probability,
            "translate_range": list(augmentation.translate_range),
            "scale_range": list(augmentation.scale_range),
            "seed": augmentation.seed,
        },
    }
    return EvalReport(
        iterations=plan.count,
        model_ids=model_ids,
        per_iteration=per_iteration,
        config=config,
        roc_curves=roc_curves,
    )


def run_external(
    manifest: DatasetManifest,
    plan: SplitPlan,
    predictions_per_iteration,
    positive: int = DEFAULT_POSITIVE,
) -> EvalReport:
    """Evaluate externally supplied predictions under the same protocol.

    ``predictions_per_iteration`` is a list of {model_id: {image_id:
    (decision, score)}} tables, either one per iteration or a single table
    reused for every iteration (fixed external models).
    """
    tables = list(predictions_per_iteration)
    if len(tables) == 1:
        tables = tables * plan.count
    if len(tables) != plan.count:
        raise DomainError(f"need 1 or {plan.count} prediction tables, got {len(tables)}")

    model_ids = sorted(tables[0])
    per_iteration: dict[str, dict[str, list[float | None]]] = {}
    roc_curves = {}
    for it, (_, test_ids) in enumerate(plan.iterations):
        table = tables[it]
        if sorted(table) != model_ids:
            raise CoverageError(f"iteration {it + 1}: model set differs from iteration 1")
        missing = [
            (mid, iid) for mid in model_ids for iid in test_ids if iid not in table[mid]
        ]
        if missing:
            shown = ", ".join(f"({m}, {i})" for m, i in missing[:10])
            raise CoverageError(
                f"iteration {it + 1}: {len(missing)} uncovered (model, image) pairs: {shown}"
            )
        d = DecisionMatrix(
            np.array([[table[mid][iid][0] for iid in test_ids] for mid in model_ids]),
            tuple(model_ids),
            tuple(test_ids),
            labels=manifest.labels,
        )
        s = ScoreMatrix(
            np.array([[table[mid][iid][1] for iid in test_ids] for mid in model_ids]),
            tuple(model_ids),
            tuple(test_ids),
        )
        truth = np.array([manifest.label_of(i) for i in test_ids])
        metric_sets, curves = _evaluate_matrices(truth, d, s, positive)
        _append_iteration(per_iteration, metric_sets)
        roc_curves = curves

    config = {
        "mode": "external",
        "seed": plan.seed,
        "iterations": plan.count,
        "train_fraction": plan.train_fraction,
        "positive_label": positive,
        "committee": model_ids,
        "augmentation": None,
    }
    return EvalReport(
        iterations=plan.count,
        model_ids=model_ids,
        per_iteration=per_iteration,
        config=config,
        roc_curves=roc_curves,
    )


# ---------------------------------------------------------------------------
# report emission


def _fmt_cell(name, stats):
    if stats["mean"] is None:
        return "n/a"
    scale = 100.0 if name in ("accuracy", "sensitivity", "specificity") else 1.0
    return f"{stats['mean'] * scale:.2f} ± {stats['std'] * scale:.2f}"


def render_table(report: EvalReport) -> str:
    """Human-readable table: mean +/- std per metric per model, ensemble last.

    Accuracy/sensitivity/specificity print as two-decimal percentages,
    F1 and AUC as two-decimal fractions.
    """
    summary = report.summary()
    headers = ["Model", "Accuracy", "Sensitivity", "Specificity", "F1 score", "AUC"]
    rows = []
    for key in report.model_ids + [ENSEMBLE_KEY]:
        label = "Ensemble" if key == ENSEMBLE_KEY else key
        rows.append([label] + [_fmt_cell(n, summary[key][n]) for n in METRIC_NAMES])
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
    excluded = [
        (key, name, summary[key][name]["undefined"])
        for key in report.model_ids + [ENSEMBLE_KEY]
        for name in METRIC_NAMES
        if summary[key][name]["undefined"] > 0
    ]
    if excluded:
        lines.append("")
        for key, name, count in excluded:
            lines.append(
                f"note: {key}/{name} undefined in {count} of {report.iterations} iterations; "
                "mean/std cover the defined values only"
            )
    return "\n".join(lines) + "\n"


def emit_report(report: EvalReport, out_dir, basename: str = "report", figures: bool = True):
    """Write report.json, report.txt and (optionally) figures; return paths."""
    os.makedirs(out_dir, exist_ok=True)
    payload = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config": report.config,
        "iterations": report.iterations,
        "summary": report.summary(),
        "per_iteration": report.per_iteration,
    }
    json_path = os.path.join(out_dir, f"{basename}.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    table_path = os.path.join(out_dir, f"{basename}.txt")
    with open(table_path, "w", encoding="utf-8") as fh:
        fh.write(render_table(report))
    paths = [json_path, table_path]
    if figures:
        from .figures import render_figures

        paths.extend(render_figures(report, out_dir, basename))
    return paths
