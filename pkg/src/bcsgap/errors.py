"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or parameters (CLI exit code 2)."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its target (CLI exit code 3).

    Carries the best available estimate so callers can inspect how far the
    computation got.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual
