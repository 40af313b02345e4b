"""Exception hierarchy shared across the package."""


class LumpkitError(Exception):
    """Base class for all package errors."""


class ManifestError(LumpkitError):
    """Malformed manifest document; carries the 1-based offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(LumpkitError):
    """Input violates a documented precondition or invariant."""


class ImageLoadError(LumpkitError):
    """Unreadable or undecodable image file; carries the path."""

    def __init__(self, path, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path


class DegenerateHistogramError(LumpkitError):
    """Zero-variance histogram; Pearson correlation is undefined."""


class EmptyCategoryError(LumpkitError):
    """No qualifying frames/instances for the requested category."""


class EmptySampleError(LumpkitError):
    """A sampling rule left nothing to sample."""


class DegenerateStatisticError(LumpkitError):
    """A test statistic is undefined on the given data (zero variance/denominator)."""


class DivergenceError(LumpkitError):
    """Training produced a non-finite loss; carries the epoch index."""

    def __init__(self, epoch: int):
        super().__init__(f"non-finite loss at epoch {epoch}")
        self.epoch = epoch
