"""Exception hierarchy; the CLI maps each class to a fixed process exit code."""


class MarginAuditorError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class InputOutputError(MarginAuditorError):
    """Missing or unreadable input file."""

    exit_code = 2


class ParseError(InputOutputError):
    """Malformed binary or JSON input; carries the byte offset where parsing failed."""

    def __init__(self, message, path=None, offset=None):
        if path is not None:
            message = f"{path}: {message}"
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.path = path
        self.offset = offset


class ParameterError(MarginAuditorError):
    """Argument outside its documented domain."""

    exit_code = 3


class DimensionError(ParameterError):
    """Shape mismatch or empty operand."""


class NumericDegeneracyError(MarginAuditorError):
    """Well-formed input on which the requested quantity is undefined or unreachable."""

    exit_code = 4


class DegenerateNetworkError(NumericDegeneracyError):
    """Network norms make the capacity formula undefined (some spectral norm is zero)."""


class TrainingDivergedError(MarginAuditorError):
    """Loss became non-finite during SGD; carries the epoch index."""

    exit_code = 5

    def __init__(self, message, epoch):
        super().__init__(f"{message} (epoch {epoch})")
        self.epoch = epoch
