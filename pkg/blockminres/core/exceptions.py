"""
Exception hierarchy shared by all blockminres modules.
"""

from typing import Optional, Sequence


class BlockMinresError(Exception):
    """Base class for all errors raised by blockminres."""


class InputError(BlockMinresError, ValueError):
    """Invalid user input: dimensions, options, parameters, files."""


class PartitionError(InputError):
    """A block partition overlaps itself or leaves indices uncovered."""

    def __init__(self, message: str, indices: Optional[Sequence[int]] = None):
        super().__init__(message)
        self.indices = list(indices) if indices is not None else []


class ParseError(InputError):
    """A file could not be parsed."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(f"{location}{message}")
        self.path = path
        self.line = line


class UnsupportedFormatError(ParseError):
    """A well-formed file in a format variant that is not supported."""


class BreakdownError(BlockMinresError):
    """Numerical breakdown of the iteration."""


class IndefinitePreconditionerError(BreakdownError):
    """
    The preconditioner is not positive definite.

    Attributes:
        block: Label of the offending block, or None if only the assembled
            inner product revealed the problem.
    """

    def __init__(self, message: str, block: Optional[str] = None):
        super().__init__(message)
        self.block = block


class DegenerateRotationError(BreakdownError):
    """A Givens rotation was requested for the zero vector."""


class VerificationError(BlockMinresError):
    """Progressive and oracle histories cannot be compared."""
