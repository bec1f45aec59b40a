"""Exception types shared across the package."""

from __future__ import annotations


class SqirError(Exception):
    """Base class for all sqir errors."""


class ParseError(SqirError):
    """Syntax error in DSL source, with 1-based line/column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class ProgramError(SqirError):
    """Structurally invalid program (bad widths, recursion, unmatched Free, ...)."""


class DeadlockError(SqirError):
    """The program needs more live qubits than the machine allows under the
    chosen policy, and no in-flight work can ever reclaim enough."""


class VerifyError(SqirError):
    """A runtime verification check failed (dirty qubit pushed to the heap,
    overlapping braids, ...)."""


class RoutingError(SqirError):
    """A gate could not be routed on the target machine."""
