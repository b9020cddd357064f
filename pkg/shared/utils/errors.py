"""
Exception hierarchy shared by the library and the command-line tool.

Every error raised on purpose derives from TFNError, so callers can catch
the whole family; the mixed-in builtin keeps ``except ValueError`` working.
"""


class TFNError(Exception):
    """Base class for all library errors."""


class ConfigError(TFNError, ValueError):
    """A run configuration or record failed validation."""


class ShapeMismatchError(TFNError, ValueError):
    """Array shapes are incompatible for the requested operation."""

    def __init__(self, message: str, *shapes: tuple):
        if shapes:
            message = f"{message}: " + " vs ".join(str(tuple(s)) for s in shapes)
        super().__init__(message)
        self.shapes = shapes


class IncompatibleCheckpointError(ShapeMismatchError):
    """A checkpoint does not fit the model it is loaded into."""


class DegenerateDirectionError(TFNError, ValueError):
    """A direction of zero length was passed where a unit vector is required."""


class InvalidRotationError(TFNError, ValueError):
    """A rotation could not be constructed from the given parameters."""


class NonScalarLossError(TFNError, ValueError):
    """backward() was called on a node holding more than one value."""


class OrderMismatchError(TFNError, ValueError):
    """A feature map is missing an order, or carries the wrong channel count."""


class TrainingDivergedError(TFNError, RuntimeError):
    """The training loss became NaN or infinite."""
