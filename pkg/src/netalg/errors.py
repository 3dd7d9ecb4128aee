"""Exception hierarchy shared by every module."""


class NetalgError(Exception):
    """Base class for all errors raised by netalg."""


class MalformedInputError(NetalgError, ValueError):
    """Input data violates a documented structural requirement."""


class PreconditionError(NetalgError, ValueError):
    """An operation was called outside its documented preconditions."""


class WellPosednessError(NetalgError, ArithmeticError):
    """The node matrix P has an identically vanishing determinant."""


class ResourceExhaustedError(NetalgError, RuntimeError):
    """A step budget was exceeded. ``state`` describes the partial progress."""

    def __init__(self, message: str, state: dict | None = None):
        super().__init__(message)
        self.state = state or {}


class DegenerateStructureError(NetalgError, RuntimeError):
    """Random probing kept hitting denominator zeros."""


class InconsistencyError(NetalgError, RuntimeError):
    """Independent methods disagreed where they must agree."""
