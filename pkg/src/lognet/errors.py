"""Exception types shared across the toolkit."""


class LogNetError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(LogNetError, ValueError):
    """A configuration value is out of range or inconsistent."""


class ValidationError(LogNetError, ValueError):
    """Input data violates a documented precondition or invariant."""


class ShapeError(LogNetError, ValueError):
    """Array or vector dimensions do not line up."""


class SplitError(LogNetError, ValueError):
    """A train/test split cannot be realized with the requested holdout."""


class CapacityError(LogNetError, ValueError):
    """A synthetic dataset request exceeds what the pattern space can hold."""


class BoundsError(LogNetError, IndexError):
    """An index is outside its valid range."""


class UnknownRpError(LogNetError, KeyError):
    """A reference-point id has no entry in the coordinate map."""


class TrainingError(LogNetError, RuntimeError):
    """Training cannot proceed (for example, an empty training set)."""


class ParseError(LogNetError, ValueError):
    """A file does not conform to its documented schema."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:"
            if line is not None:
                prefix += f"{line}:"
            prefix += " "
        elif line is not None:
            prefix = f"line {line}: "
        super().__init__(prefix + message)


class StageError(LogNetError, RuntimeError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        super().__init__(f"stage '{stage}' failed: {cause}")
