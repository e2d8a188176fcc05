"""Exception types shared across the package."""


class WfsmError(Exception):
    """Base class for all errors raised by this package."""


class SingularMatrix(WfsmError):
    """LU elimination hit a pivot too small to trust."""


class DivergentMachine(WfsmError):
    """The total transition matrix has spectral radius at (or too near) 1."""


class DegenerateMachine(WfsmError):
    """The partition function is zero or non-finite, so no distribution exists."""


class OrderTooLarge(WfsmError):
    """A requested derivative tensor would exceed the element budget."""


class DimensionMismatch(WfsmError):
    """A decomposable function refers to transitions or indices the machine lacks."""


class BudgetInsufficient(WfsmError):
    """No enumeration length satisfies the requested truncation tolerance."""


class ValidationError(WfsmError):
    """A structurally parsed machine or function violates a model invariant."""


class ParseError(WfsmError):
    """A machine or function file failed to parse.

    Carries the 1-based line and column of the offending token.
    """

    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.message = message
