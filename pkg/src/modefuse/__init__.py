"""modefuse: mode-based classifier fusion with an evaluation harness."""

from .fusion import DecisionMatrix, FusionResult, ScoreMatrix, column_mode, fuse, grouped_mode
from .metrics import ConfusionCounts, MetricSet, RocCurve, confusion, metric_set, roc_and_auc

__version__ = "0.1.0"

__all__ = [
    "DecisionMatrix",
    "ScoreMatrix",
    "FusionResult",
    "column_mode",
    "fuse",
    "grouped_mode",
    "ConfusionCounts",
    "MetricSet",
    "RocCurve",
    "confusion",
    "metric_set",
    "roc_and_auc",
    "__version__",
]
