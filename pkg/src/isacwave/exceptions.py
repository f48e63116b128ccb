"""Exceptions shared across the solver and the CLI."""


class ConfigError(ValueError):
    """An experiment spec file or CLI argument set is invalid."""


class SolverAbort(RuntimeError):
    """A subsolver produced non-finite values and cannot continue.

    Carries a short diagnostic message describing where the blow-up happened.
    """
