"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: configuration problems exit 2,
data/parse problems exit 3, evaluator/model problems exit 4.
"""


class PixelplateError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(PixelplateError, ValueError):
    """Invalid configuration or argument values (exit code 2)."""


class EncodingError(PixelplateError, ValueError):
    """Broken genome encodings: wrong bit count, bad hex, nonzero padding (exit code 3)."""


class TouchstoneError(PixelplateError, ValueError):
    """Unparseable Touchstone input. Carries the offending 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DatasetError(PixelplateError):
    """Dataset files that cannot be read, written, or validated (exit code 3)."""


class ModelError(PixelplateError):
    """Surrogate model problems: shape mismatches, bad weight files (exit code 4)."""


class EvaluatorError(PixelplateError):
    """Evaluator failures: unknown registry names, lookup misses, wrapped backend errors (exit code 4)."""
