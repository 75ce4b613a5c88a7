"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class SingularityError(ArithmeticError):
    """A denominator vanished (numerically) where it should not."""


class ConfigError(ValueError):
    """A scenario configuration failed validation."""


class InstabilityError(RuntimeError):
    """Time stepping blew up."""
