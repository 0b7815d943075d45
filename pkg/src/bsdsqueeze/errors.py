"""Exception types shared by all modules.

The CLI maps :class:`PreconditionError` (and its subclasses) to exit status 2
and :class:`ConsistencyError` to exit status 3.
"""


class PreconditionError(ValueError):
    """Input violates an operation's precondition."""


class StructuralError(PreconditionError):
    """Operands do not share a factor, or have the wrong dimension."""


class UnsupportedOperation(PreconditionError):
    """The requested computation is outside what this toolkit can certify."""


class ConsistencyError(RuntimeError):
    """An internal numerical check failed (usually signals a wrong product)."""
