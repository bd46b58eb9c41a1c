"""Exception types shared by the numerical modules. +inf norms are values, not errors."""
from __future__ import annotations

from typing import Optional


class LabError(Exception):
    """Base class for smoothlab errors."""


class InputError(LabError, ValueError):
    """Malformed input: bad file, bad literal, non-finite samples."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DomainError(LabError, ValueError):
    """A defining integral diverges or an operation is undefined for the given object."""

    def __init__(self, message: str, quantity: Optional[str] = None):
        self.quantity = quantity
        super().__init__(message)


class PreconditionError(LabError, ValueError):
    """A mathematical precondition of an operation does not hold."""

    def __init__(self, message: str, condition: Optional[str] = None):
        self.condition = condition
        super().__init__(message)


class RangeError(LabError, ValueError):
    """Argument outside the range of a monotone function."""

    def __init__(self, message: str, value: float, lo: float, hi: float):
        self.value = value
        self.lo = lo
        self.hi = hi
        super().__init__(f"{message}: {value!r} not in ({lo!r}, {hi!r})")
