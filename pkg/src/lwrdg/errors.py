"""Exception types raised by the solver."""


class DomainError(ValueError):
    """An argument lies outside the admissible range of the operation."""


class ConfigError(ValueError):
    """A network or solver configuration is malformed or inconsistent."""


class IntegrityError(RuntimeError):
    """The discrete state violated an invariant during a run (NaN, bounds)."""
