"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class ConvergenceError(RuntimeError):
    """An iteration exhausted its budget without meeting its tolerance."""


class UnsupportedRegimeError(ValueError):
    """The requested closed form only exists in a different Orlicz regime."""


class UnknownKernelError(ValueError):
    """The kernel name is not in the registry."""


class ConfigError(ValueError):
    """A run configuration is malformed; the message names the offending key."""
