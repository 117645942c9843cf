"""Exception types shared across the package."""


class PatchTrackError(Exception):
    """Base class for all package errors."""


class DecodeError(PatchTrackError):
    """Image payload is malformed or in an unsupported format."""


class EmptyRegion(PatchTrackError):
    """A requested region does not intersect the image."""


class RegionTooSmall(PatchTrackError):
    """Region is below the minimum size required by an operation."""


class KindMismatch(PatchTrackError):
    """Histograms of different feature kinds were compared."""


class LengthMismatch(PatchTrackError):
    """Sequences that must have equal length do not."""


class MissingKind(PatchTrackError):
    """A rival feature map lacks a kind present in the query."""


class MissingPosition(PatchTrackError):
    """A position map does not cover every graph node."""


class MissingPatch(PatchTrackError):
    """A per-patch map does not cover every patch of the model."""


class MissingGroundTruth(PatchTrackError):
    """Sequence folder has no groundtruth_rect.txt."""


class FrameCountMismatch(PatchTrackError):
    """Frame count and ground-truth line count differ."""


class ParseError(PatchTrackError):
    """A ground-truth line could not be parsed."""

    def __init__(self, line_number: int, message: str = ""):
        self.line_number = line_number
        super().__init__(message or f"cannot parse ground-truth line {line_number}")


class EmptyInput(PatchTrackError):
    """An operation received an empty sequence."""


class ConfigError(PatchTrackError):
    """A run-configuration file contains unknown keys or bad values."""


class IoError(PatchTrackError):
    """Filesystem failure while writing a generated sequence."""
