"""Exception types shared across the package.

User-facing input problems raise ValueError (or subclasses); a broken
internal invariant raises InvariantError, which the CLI maps to exit
code 2 instead of 1.
"""


class InvariantError(RuntimeError):
    """An internal consistency check failed; indicates a bug, not bad input."""


class SolverError(RuntimeError):
    """An iterative solver failed to converge; carries the last iterate."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate
