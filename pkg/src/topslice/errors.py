"""Exception types shared across the package."""


class TopsliceError(Exception):
    """Base class for all topslice errors."""


class ParseError(TopsliceError):
    """Malformed text input; carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnknownInstance(TopsliceError):
    """Requested instance id does not occur in the label image."""


class EmptyCloud(TopsliceError):
    """Operation requires at least one point."""


class DegenerateCloud(TopsliceError):
    """Point cloud covariance has rank < 2 (no usable bounding box)."""


class EmptySlice(TopsliceError):
    """Operation requires a non-empty slice."""


class InvalidParams(TopsliceError):
    """Parameter object violates its invariants."""


class TooManySlices(TopsliceError):
    """More slice diagrams supplied than the padded descriptor can hold."""


class InsufficientData(TopsliceError):
    """Not enough samples to train or cross-validate."""


class DimensionMismatch(TopsliceError):
    """Descriptor longer than the classifier input dimension."""


class UnreachableFraction(TopsliceError):
    """Requested occlusion fraction cannot be realised with this occluder."""
