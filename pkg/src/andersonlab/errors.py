"""Exception hierarchy shared by all modules and mapped to CLI exit codes."""


class AndersonLabError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 1


class ConfigError(AndersonLabError, ValueError):
    """A parameter lies outside its admissible domain."""

    exit_code = 2


class InfeasibleError(AndersonLabError):
    """Geometry or sector cannot host the requested system (empty basis, n > |Λ|, ...)."""

    exit_code = 3


class SolverError(AndersonLabError, RuntimeError):
    """The eigensolver did not meet its residual tolerance."""

    exit_code = 4
