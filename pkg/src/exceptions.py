"""Custom exceptions for the Perron expansions toolkit.

Every exception carries the process exit code the command-line front end
returns when it escapes a subcommand.
"""

from typing import Iterable, Optional, Sequence


class PerronException(Exception):
    """Base exception for the application."""
    exit_code = 1


# ============================================================================
# VALIDATION (exit code 2)
# ============================================================================
class ValidationError(PerronException):
    """Raised when an input violates a documented precondition."""
    exit_code = 2


class PhiSyntaxError(ValidationError):
    """Raised when a phi expression does not match the grammar."""

    def __init__(self, message: str, position: int, expected: Iterable[str] = ()):
        self.position = position
        self.expected = tuple(sorted(set(expected)))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at position {position}{detail}")


class EmptyInput(ValidationError):
    """Raised when a phi expression is empty or whitespace only."""
    pass


class UnknownFamily(ValidationError):
    """Raised when a built-in family name is not in the catalog."""
    pass


class ChildOutOfRange(ValidationError):
    """Raised when a child index is not above the parent's r-value."""
    pass


class SideMismatch(ValidationError):
    """Raised when digit sequences from different sides or programs are mixed."""
    pass


class EmptyRestriction(ValidationError):
    """Raised when a digit restriction admits no cylinder at some level."""
    pass


class ConfigException(ValidationError):
    """Raised when configuration is invalid."""
    pass


# ============================================================================
# DOMAIN (exit code 3)
# ============================================================================
class DomainError(PerronException):
    """Raised when a point lies outside the interval an operation accepts."""
    exit_code = 3


class DepthError(DomainError):
    """Raised when a depth or digit-magnitude guard trips."""
    pass


class PhiError(DomainError):
    """Raised when evaluating a phi program fails at runtime."""
    pass


class NonPositivePhi(PhiError):
    """Raised when phi_n evaluates below 1."""

    def __init__(self, n: int, prefix: Sequence[int], value: int):
        self.n = n
        self.prefix = tuple(prefix)
        self.value = value
        super().__init__(
            f"phi_{n} evaluated to {value} on prefix {list(self.prefix)}; values must be >= 1"
        )


class IndexOutOfRange(PhiError):
    """Raised when x(e) refers to a digit outside 1..n."""
    pass


class ExponentError(PhiError):
    """Raised when a '^' exponent is negative or above the configured cap."""
    pass


class ConsistencyError(PerronException):
    """Raised when two independent computations of the same quantity disagree."""
    exit_code = 1


# ============================================================================
# PRECISION (exit code 4)
# ============================================================================
class PrecisionExhausted(PerronException):
    """Raised when the sampler cannot reach the required resolution."""
    exit_code = 4


# ============================================================================
# USAGE (exit code 64)
# ============================================================================
class UsageError(PerronException):
    """Raised when the command line cannot be parsed."""
    exit_code = 64

    def __init__(self, message: str, usage: Optional[str] = None):
        self.usage = usage
        super().__init__(message)
