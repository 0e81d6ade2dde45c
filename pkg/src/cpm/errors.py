"""Exception types shared across the package."""

from __future__ import annotations


class CPMError(Exception):
    """Base class for all errors raised by this package."""


class ShapeMismatch(CPMError, ValueError):
    pass


class NegativeEntry(CPMError, ValueError):
    pass


class NotNormalized(CPMError, ValueError):
    pass


class VariableAbsent(CPMError, KeyError):
    def __str__(self) -> str:  # KeyError would repr() the message
        return str(self.args[0]) if self.args else ""


class ScopeMismatch(CPMError, ValueError):
    pass


class UnknownVariable(CPMError, ValueError):
    pass


class CompositionError(CPMError, ValueError):
    """Raised when a composition is undefined or its operands are incompatible."""


class CardinalityMismatch(CompositionError):
    pass


class DominanceViolation(CompositionError):
    """A denominator marginal is zero where the numerator marginal is not.

    Attributes
    ----------
    scope : tuple of str
        The intersection scope on which dominance was checked.
    witness : dict
        A configuration of ``scope`` where the denominator marginal is 0 and
        the numerator marginal is positive.
    step : int or None
        1-based position of the factor being composed when the violation
        happened inside a chain, if known.
    """

    def __init__(self, scope, witness, step=None, message=None):
        self.scope = tuple(scope)
        self.witness = dict(witness)
        self.step = step
        if message is None:
            message = f"dominance violated on {list(self.scope)} at {self.witness}"
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)

    def at_step(self, step: int) -> "DominanceViolation":
        return DominanceViolation(self.scope, self.witness, step=step)


class MarginalZeroDivision(CPMError, ZeroDivisionError):
    """Positive numerator over an exactly-zero denominator marginal."""


class TooLarge(CPMError, MemoryError):
    pass


class CheckDisagreement(CPMError, RuntimeError):
    pass


class ParseError(CPMError, ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class UndeclaredVariable(ParseError):
    pass


class ModelShapeMismatch(ParseError, ShapeMismatch):
    pass


class ModelNotNormalized(ParseError, NotNormalized):
    pass
