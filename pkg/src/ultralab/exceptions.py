"""Custom exceptions."""

from __future__ import annotations

__all__ = [
    "UltralabError",
    "ParameterError",
    "ConstraintError",
    "DimensionError",
    "ParseError",
    "UnknownIdentifier",
    "DomainError",
    "PreconditionError",
    "NumericError",
    "DivergenceError",
    "AccuracyError",
    "ResourceError",
    "TermBudgetExceeded",
    "ConfigError",
    "UsageError",
]


class UltralabError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(UltralabError, ValueError):
    """Parameter outside the range allowed for the object it configures."""


class ConstraintError(ParameterError):
    """Parameter bundle violates a coupling constraint."""


class DimensionError(ParameterError):
    """Objects of different dimension were combined."""


class ParseError(UltralabError, ValueError):
    """Text could not be parsed."""

    def __init__(self, message: str, text: str = "", position: int = 0) -> None:
        self.text = text
        self.position = position
        super().__init__(f"{message} at offset {position}")


class UnknownIdentifier(ParseError):
    """Identifier is not a variable, constant or function in scope."""


class DomainError(UltralabError, ArithmeticError):
    """Expression evaluated outside its domain."""

    def __init__(self, message: str, subexpression: str = "") -> None:
        self.subexpression = subexpression
        super().__init__(f"{message}: {subexpression}" if subexpression else message)


class PreconditionError(UltralabError, ValueError):
    """Operation precondition does not hold for the given inputs."""


class NumericError(UltralabError):
    """Numerical procedure failed to produce a trustworthy value."""


class DivergenceError(NumericError):
    """Supremum or bracket search did not converge."""


class AccuracyError(NumericError):
    """Requested tolerance not reached within the budget."""

    def __init__(self, message: str, estimate: float = float("nan")) -> None:
        self.estimate = estimate
        super().__init__(f"{message} (achieved estimate {estimate:.3g})")


class ResourceError(NumericError):
    """Computation exceeded a configured resource budget."""


class TermBudgetExceeded(ResourceError):
    """Symbolic expansion produced more terms than allowed."""

    def __init__(self, budget: int, terms: int) -> None:
        self.budget = budget
        self.terms = terms
        super().__init__(f"term budget {budget} exceeded ({terms} terms)")


class ConfigError(UltralabError):
    """Experiment configuration is invalid."""


class UsageError(UltralabError):
    """Command-line usage error."""
