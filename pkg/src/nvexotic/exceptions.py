"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class PreconditionError(ValueError):
    """The inputs are valid but the requested evaluator does not apply to them."""


class ConvergenceError(RuntimeError):
    """A numerical procedure failed to reach its tolerance.

    The best available estimate and its error bound are kept on the exception
    so callers can decide whether the partial result is usable.
    """

    def __init__(self, message, estimate=None, error=None, diagnostics=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
        self.diagnostics = diagnostics or {}


class UnidentifiableError(ValueError):
    """The data carry no information about the fitted parameter."""


class DegenerateConfigurationError(ValueError):
    """The configuration produces a vanishing response, so no bound exists."""


class ConfigError(ValueError):
    """Invalid experiment configuration; ``key_path`` names the offending entry."""

    def __init__(self, key_path, message):
        super().__init__(f"{key_path}: {message}")
        self.key_path = key_path
