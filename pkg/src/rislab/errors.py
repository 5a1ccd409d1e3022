"""Exception types shared across the package."""


class RislabError(Exception):
    """Base class for all package-specific errors."""


class DomainError(RislabError, ValueError):
    """An evaluation or integration interval leaves the domain of a path."""


class PreconditionError(RislabError, ValueError):
    """An operation was called with data violating its stated preconditions."""


class SolverError(RislabError, RuntimeError):
    """An iterative solver failed to reach its target residual."""


class ConstructionError(RislabError, RuntimeError):
    """The local-to-relaxed construction produced a tuple failing its own check."""


class ConfigError(RislabError, ValueError):
    """A run configuration file is malformed or inconsistent."""
