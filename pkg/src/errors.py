"""Exception types raised across the engine."""

from typing import Optional


class ShapeError(ValueError):
    """Input dims do not match what a layer expects."""

    def __init__(self, layer_index: int, expected, actual):
        self.layer_index = layer_index
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"Shape mismatch at layer {layer_index}: expected {expected}, got {actual}"
        )


class GraphError(RuntimeError):
    """Gradient machinery used out of order (backward before forward, missing grads)."""


class IdxFormatError(ValueError):
    """Malformed IDX file."""


class BadMagicError(IdxFormatError):
    pass


class TruncatedFileError(IdxFormatError):
    pass


class CountMismatchError(IdxFormatError):
    pass


class ConfigError(ValueError):
    """Experiment configuration problem, optionally tied to a source line."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownKeyError(ConfigError):
    pass


class TypeMismatchError(ConfigError):
    pass


class InvalidCombinationError(ConfigError):
    pass


class BufferUnderflowError(RuntimeError):
    """Not enough stored items to draw a batch."""


class EpisodeFinishedError(RuntimeError):
    """Environment stepped after termination."""


class IncompatibleRunsError(ValueError):
    """Runs passed to compare cannot be aligned."""
