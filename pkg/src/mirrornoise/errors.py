"""Exception types shared across the package."""


class MirrorNoiseError(Exception):
    """Base class for all package errors."""


class ValidationError(MirrorNoiseError):
    """Invalid physical parameters or inputs.

    Carries the list of individual violations in ``violations``.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class AmbiguityError(ValidationError):
    """Both or neither of a pair of alternative inputs was supplied."""


class ConfigError(MirrorNoiseError):
    """Invalid simulation or CLI configuration."""


class RuntimeCapError(ConfigError):
    """A requested simulation exceeds the configured runtime cap."""


class SimulationError(MirrorNoiseError):
    """Numerical failure inside a time-domain simulation."""
