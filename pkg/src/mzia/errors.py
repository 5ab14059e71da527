"""Exception hierarchy."""

from __future__ import annotations


class MziaError(Exception):
    """Base class for all errors raised by this package."""


class UnsupportedRateError(MziaError):
    """A flow rate is zero, negative or missing."""


class IncompatibleContextError(MziaError):
    """Zones or schemas over different variables/rates were combined."""


class InitializedConditionError(MziaError):
    """A variable changed rate across a transition without being reset."""


class SchemaError(MziaError):
    """Ill-formed schema, expression or assignment."""


class UndecidableFragmentError(SchemaError):
    """A formula lies outside the finite-domain decidable fragment."""

    def __init__(self, message: str, variable: str | None = None):
        super().__init__(message)
        self.variable = variable


class OracleCapacityError(MziaError):
    """The brute-force oracle would have to enumerate too many assignments."""


class ModelError(MziaError):
    """Structural problem in an automaton (unknown location, invalid init...)."""


class CapacityError(MziaError):
    """Zone exploration exceeded the configured state cap."""


class ParseError(MziaError):
    """Syntax error in a model document, with 1-based position."""

    def __init__(self, line: int, column: int, expected: str, found: str, source_line: str = ""):
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found
        self.source_line = source_line
        msg = f"line {line}, column {column}: expected {expected}, found {found}"
        if source_line:
            msg += f"\n  {source_line}\n  {' ' * (column - 1)}^"
        super().__init__(msg)
