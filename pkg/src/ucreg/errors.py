"""Exception and warning types shared across the workbench."""

from __future__ import annotations


class UcregError(Exception):
    """Base class for all workbench errors."""


class ParseError(UcregError):
    """Delimited input could not be parsed as a rectangular table."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyDatasetError(UcregError):
    """Input contains no data rows."""


class NamingError(UcregError):
    """Column names are duplicated or empty."""


class UnknownAttributeError(UcregError):
    """A referenced attribute/column does not exist."""

    def __init__(self, names):
        if isinstance(names, str):
            names = [names]
        self.names = list(names)
        super().__init__("unknown attribute(s): " + ", ".join(self.names))


class DegenerateTargetError(UcregError):
    """Target attribute has fewer than two distinct labels."""


class StatsUnavailableError(UcregError):
    """Column statistics requested for an all-missing column."""


class InsufficientDataError(UcregError):
    """Too few usable observations for the requested computation."""


class EmptyPanoramaError(UcregError):
    """No eligible attributes remain for the correlation panorama."""


class EmptyRingError(UcregError):
    """All anchors hidden; the radial layout has no attractors."""


class InvalidWeightError(UcregError):
    """Radial mapping received a negative or non-finite weight."""


class LabelMismatchError(UcregError):
    """Anchor ring labels do not match the data being laid out."""


class NormalizationError(UcregError):
    """A probability row does not sum to 1 within tolerance."""


class DegenerateLabelsError(UcregError):
    """Binary fit received a single-class outcome vector."""


class ZeroVarianceError(UcregError):
    """An explanatory column is constant and cannot be standardized."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"attribute {name!r} has zero variance")


class IncompleteProfileError(UcregError):
    """A query profile is missing one or more model attributes."""

    def __init__(self, missing):
        self.missing = sorted(missing)
        super().__init__("profile missing attribute(s): " + ", ".join(self.missing))


class UndefinedRocError(UcregError):
    """ROC requested with a single-class truth vector."""


class DatasetNotAttachedError(UcregError):
    """Similar-cases lookup requires the original dataset to be attached."""


class ChartBuildError(UcregError):
    """A panorama chart failed to build; names the offending chart."""

    def __init__(self, title: str, cause: Exception):
        self.title = title
        self.cause = cause
        super().__init__(f"chart {title!r}: {cause}")


class SchemaError(UcregError):
    """A serialized panorama file violates the expected schema."""


class UnsupportedVersionError(UcregError):
    """A serialized panorama file comes from an unrecognized format version."""


class ConvergenceWarning(UserWarning):
    """Fit stopped at the iteration cap before meeting the tolerance."""


class DroppedRowsWarning(UserWarning):
    """Rows were silently excluded (missing target or attribute values)."""
