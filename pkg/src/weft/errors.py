"""Exception hierarchy shared by all weft modules."""

from __future__ import annotations


class WeftError(Exception):
    """Base class for every error raised by weft."""


class ParseError(WeftError):
    """A property text does not match the grammar.

    ``line`` and ``column`` are 1-based positions inside the offending text.
    """

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class CompileError(WeftError):
    pass


class DataError(WeftError):
    """Malformed or out-of-order trace data."""


class CapacityError(WeftError):
    """A statically sized interval buffer was exceeded.

    This always indicates a sizing bug, never a recoverable runtime condition.
    """


class ArenaOverflowError(CapacityError):
    pass


class StaleHandleError(WeftError):
    pass
