"""Mode-based fusion of committee decisions and posterior scores.

A committee of n classifiers votes on k images through a decision matrix
(class codes) and a positionally aligned score matrix (posterior
probabilities).  Fusion takes, per image, the modal class vote and the mean
score over the models that cast it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError, PairingError, SingularModeError

BINARY_LABELS = (-1, 1)


def _check_ids(ids, what):
    if len(set(ids)) != len(ids):
        raise DomainError(f"duplicate {what} identifiers")


@dataclass(frozen=True)
class DecisionMatrix:
    """n models x k images matrix of class votes.

    Binary problems use codes -1 and +1; multiclass problems declare a
    contiguous code set 0..x-1 via ``labels``.  Mixing the two conventions
    in one matrix is rejected.
    """

    data: np.ndarray
    row_ids: tuple[str, ...]
    col_ids: tuple[str, ...]
    labels: tuple[int, ...] = BINARY_LABELS

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.int64)
        object.__setattr__(self, "data", arr)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError(f"decision matrix must be 2-D and nonempty, got shape {arr.shape}")
        if arr.shape != (len(self.row_ids), len(self.col_ids)):
            raise DimensionError("row_ids/col_ids do not match matrix shape")
        _check_ids(self.row_ids, "model")
        _check_ids(self.col_ids, "image")
        legal = set(self.labels)
        present = set(np.unique(arr).tolist())
        if not present <= legal:
            raise DomainError(f"illegal class codes {sorted(present - legal)}; legal set is {sorted(legal)}")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def k(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class ScoreMatrix:
    """Posterior probabilities aligned entry-for-entry with a DecisionMatrix."""

    data: np.ndarray
    row_ids: tuple[str, ...]
    col_ids: tuple[str, ...]

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        object.__setattr__(self, "data", arr)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError(f"score matrix must be 2-D and nonempty, got shape {arr.shape}")
        if arr.shape != (len(self.row_ids), len(self.col_ids)):
            raise DimensionError("row_ids/col_ids do not match matrix shape")
        _check_ids(self.row_ids, "model")
        _check_ids(self.col_ids, "image")
        if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
            raise DomainError("scores must lie in [0, 1]")


@dataclass(frozen=True)
class FusionResult:
    """Per-image fused class (dm), fused confidence (ds) and voter count."""

    col_ids: tuple[str, ...]
    dm: np.ndarray = field(repr=False)
    ds: np.ndarray = field(repr=False)
    support: np.ndarray = field(repr=False)


def _stable_mean(values: np.ndarray) -> float:
    # summing in sorted order makes the mean invariant under row permutation
    return float(np.sort(values).sum() / values.size)


def column_mode(decisions, scores):
    """Modal class of one committee column plus the indices that voted for it.

    Frequency ties are broken by the higher mean score among each tied
    label's voters, then by the lower label code, so the result is
    deterministic.
    """
    dec = np.asarray(decisions, dtype=np.int64)
    sc = np.asarray(scores, dtype=np.float64)
    if dec.size == 0:
        raise DimensionError("column_mode on empty column")
    if dec.shape != sc.shape:
        raise DimensionError("decision and score vectors differ in length")
    if np.any(sc < 0.0) or np.any(sc > 1.0):
        raise DomainError("scores must lie in [0, 1]")

    values, counts = np.unique(dec, return_counts=True)
    top = counts.max()
    best_label = None
    best_mean = -1.0
    for value, count in zip(values, counts):
        if count != top:
            continue
        mean = _stable_mean(sc[dec == value])
        # strict > keeps the lower code on mean ties (values iterate ascending)
        if mean > best_mean:
            best_mean = mean
            best_label = int(value)
    voters = np.flatnonzero(dec == best_label)
    return best_label, voters


def fuse(d: DecisionMatrix, s: ScoreMatrix) -> FusionResult:
    """Fuse paired decision/score matrices column by column."""
    if d.data.shape != s.data.shape or d.row_ids != s.row_ids or d.col_ids != s.col_ids:
        raise PairingError("decision and score matrices are not paired (shape or ids differ)")
    k = d.k
    dm = np.empty(k, dtype=np.int64)
    ds = np.empty(k, dtype=np.float64)
    support = np.empty(k, dtype=np.int64)
    for j in range(k):
        label, voters = column_mode(d.data[:, j], s.data[:, j])
        dm[j] = label
        ds[j] = _stable_mean(s.data[voters, j])
        support[j] = voters.size
    return FusionResult(col_ids=d.col_ids, dm=dm, ds=ds, support=support)


def grouped_mode(l, h, f1, f0, f2):
    """Mode estimate for interval-binned frequencies: l + (f1-f0)/(2*f1-f0-f2) * h."""
    if h <= 0:
        raise DomainError(f"class-interval width must be positive, got {h}")
    if min(f0, f1, f2) < 0:
        raise DomainError("frequencies must be nonnegative")
    denom = 2.0 * f1 - f0 - f2
    if denom == 0.0:
        raise SingularModeError("grouped-mode denominator 2*f1 - f0 - f2 is zero")
    return l + ((f1 - f0) / denom) * h
