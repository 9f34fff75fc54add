"""Exception hierarchy shared by all modefuse modules."""


class ModeFuseError(Exception):
    """Base class for all modefuse errors."""


class DimensionError(ModeFuseError):
    """Empty input or mismatched vector/matrix lengths."""


class PairingError(ModeFuseError):
    """Decision and score matrices disagree in shape or identifiers."""


class DomainError(ModeFuseError):
    """A value lies outside its legal domain (scores, labels, config)."""


class SingularModeError(ModeFuseError):
    """Grouped-mode denominator is zero."""


class FormatError(ModeFuseError):
    """Unsupported image format or channel layout."""


class ManifestError(ModeFuseError):
    """Dataset manifest failed to parse or validate."""


class StratificationError(ModeFuseError):
    """A class is absent or too small to appear in both split partitions."""


class CoverageError(ModeFuseError):
    """Prediction records do not cover every required (model, image) pair."""


class EmptyEvaluationError(ModeFuseError):
    """Metric computation requested on zero samples."""


class DegenerateRocError(ModeFuseError):
    """ROC requested on single-class ground truth."""


class DegenerateTrainingError(ModeFuseError):
    """Training data does not contain at least one sample per class."""
