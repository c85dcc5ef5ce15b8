"""Exception and warning types shared across the package."""


class MagnomechError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(MagnomechError, ValueError):
    """A physical parameter violates its declared constraints."""


class ConvergenceError(MagnomechError, RuntimeError):
    """The steady-state iteration failed to converge."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class NearSingularError(MagnomechError, RuntimeError):
    """A linear solve or closed-form denominator is numerically singular."""


class PhaseIllConditionedError(MagnomechError, RuntimeError):
    """|T| is too small for the transmission phase to be meaningful."""


class GridError(MagnomechError, ValueError):
    """A detuning grid specification is degenerate or malformed."""


class UnknownPathError(MagnomechError, ValueError):
    """A dotted config path does not address a numeric field."""

    def __init__(self, path, valid_paths):
        super().__init__(
            f"unknown config path {path!r}; valid paths: {', '.join(valid_paths)}"
        )
        self.path = path
        self.valid_paths = list(valid_paths)


class FeatureExtractionWarning(UserWarning):
    """Extrema touch the grid boundary or the grid is too coarse."""
