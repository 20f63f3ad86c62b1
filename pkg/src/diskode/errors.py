"""Exception types shared across the package."""


class DiskodeError(Exception):
    """Base class for all errors raised by diskode."""


class DomainError(DiskodeError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class KernelError(DiskodeError, ValueError):
    """The kernel weight is invalid or undefined for the requested quantity."""


class HypothesisError(DiskodeError, ValueError):
    """An equation does not satisfy the exponent pattern a result requires."""


class PreconditionError(DiskodeError, ValueError):
    """A precondition of a bound (other than the exponent pattern) fails."""


class SingularPowerError(DiskodeError, ArithmeticError):
    """A fractional root of zero was requested with an exponent below one."""


class ScenarioError(DiskodeError, ValueError):
    """A scenario document failed validation."""
