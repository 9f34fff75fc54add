"""Binary evaluation metrics: confusion tallies, accuracy/sensitivity/
specificity/F1, and ROC/AUC by trapezoidal integration.

Metrics with a zero denominator return ``None`` (an explicit undefined
marker) rather than NaN so aggregation can exclude them cleanly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRocError, DimensionError, EmptyEvaluationError

DEFAULT_POSITIVE = -1  # disease class in the canonical binary mapping


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricSet:
    accuracy: float | None
    sensitivity: float | None
    specificity: float | None
    f1: float | None
    auc: float | None = None


@dataclass(frozen=True)
class RocCurve:
    """ROC vertices from (0,0) to (1,1); thresholds strictly decreasing."""

    points: np.ndarray  # (m, 2) of (fpr, tpr)
    thresholds: np.ndarray  # (m,), starts at +inf


def confusion(truth, predicted, positive: int = DEFAULT_POSITIVE) -> ConfusionCounts:
    """Tally TP/FP/TN/FN relative to the declared positive class."""
    t = np.asarray(truth, dtype=np.int64)
    p = np.asarray(predicted, dtype=np.int64)
    if t.size == 0:
        raise DimensionError("confusion on empty vectors")
    if t.shape != p.shape:
        raise DimensionError("truth and prediction lengths differ")
    t_pos = t == positive
    p_pos = p == positive
    return ConfusionCounts(
        tp=int(np.sum(t_pos & p_pos)),
        fp=int(np.sum(~t_pos & p_pos)),
        tn=int(np.sum(~t_pos & ~p_pos)),
        fn=int(np.sum(t_pos & ~p_pos)),
    )


def _ratio(num, den):
    return num / den if den > 0 else None


def metric_set(c: ConfusionCounts) -> MetricSet:
    """Accuracy, sensitivity, specificity and F1 from confusion counts."""
    if c.total == 0:
        raise EmptyEvaluationError("no samples evaluated")
    return MetricSet(
        accuracy=(c.tp + c.tn) / c.total,
        sensitivity=_ratio(c.tp, c.tp + c.fn),
        specificity=_ratio(c.tn, c.tn + c.fp),
        f1=_ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn),
    )


def positive_score(decision: int, score: float, positive: int = DEFAULT_POSITIVE) -> float:
    """Probability of the positive class given the decided class's probability."""
    return score if decision == positive else 1.0 - score


def roc_and_auc(truth, scores, positive: int = DEFAULT_POSITIVE):
    """ROC curve over descending score thresholds and its trapezoidal AUC.

    Scores must be oriented so that larger means more positive.  Samples
    sharing a score move together (one curve vertex), which makes the
    trapezoidal area equal the pairwise-ranking statistic with half credit
    for ties.
    """
    t = np.asarray(truth, dtype=np.int64)
    s = np.asarray(scores, dtype=np.float64)
    if t.size == 0:
        raise DimensionError("roc on empty vectors")
    if t.shape != s.shape:
        raise DimensionError("truth and score lengths differ")
    is_pos = t == positive
    n_pos = int(is_pos.sum())
    n_neg = t.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateRocError("roc requires at least one positive and one negative sample")

    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    pos_sorted = is_pos[order]

    # group equal scores so tied samples share one vertex
    boundary = np.flatnonzero(np.diff(s_sorted) != 0.0)
    ends = np.append(boundary, t.size - 1)

    tp_cum = np.cumsum(pos_sorted)[ends]
    fp_cum = (ends + 1) - tp_cum
    tpr = np.concatenate(([0.0], tp_cum / n_pos))
    fpr = np.concatenate(([0.0], fp_cum / n_neg))
    thresholds = np.concatenate(([np.inf], s_sorted[ends]))

    trapz = getattr(np, "trapezoid", None) or np.trapz
    auc = float(trapz(tpr, fpr))
    curve = RocCurve(points=np.column_stack([fpr, tpr]), thresholds=thresholds)
    return curve, auc


def auc_pairwise(truth, scores, positive: int = DEFAULT_POSITIVE) -> float:
    """O(P*N) pairwise-ranking AUC oracle: P(random positive outscores a
    random negative), ties counted half."""
    t = np.asarray(truth, dtype=np.int64)
    s = np.asarray(scores, dtype=np.float64)
    pos = s[t == positive]
    neg = s[t != positive]
    if pos.size == 0 or neg.size == 0:
        raise DegenerateRocError("pairwise auc requires both classes")
    wins = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return float((wins + 0.5 * ties) / (pos.size * neg.size))
