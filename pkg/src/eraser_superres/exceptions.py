class ConfigError(ValueError):
    """Invalid bench configuration (bad port count, duplicate labels, ...)."""


class RequestError(ValueError):
    """Invalid correlation request."""


class AnalysisError(ValueError):
    """A trace does not support the requested fringe metric."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""
