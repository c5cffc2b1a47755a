"""Exception types shared across the package."""


class WhithamLabError(Exception):
    pass


class InvalidInputError(WhithamLabError, ValueError):
    pass


class GeometryError(WhithamLabError):
    """A contour or sample point sits on (or too close to) a singular point."""


class ConvergenceError(WhithamLabError):
    """Quadrature did not reach its tolerance within the node budget.

    The best available estimate is kept on the exception so callers can
    decide whether it is usable.
    """

    def __init__(self, message, estimate=None, err_estimate=None):
        super().__init__(message)
        self.estimate = estimate
        self.err_estimate = err_estimate


class DegenerateConfigurationError(WhithamLabError):
    pass


class ExtractionError(WhithamLabError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(WhithamLabError):
    pass
