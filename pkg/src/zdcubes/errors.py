"""Exception types shared across the package.

The CLI maps these onto exit codes: InputError -> 3, HypothesisError -> 2.
A failed property check is not an exception; it is a verdict in a report
(exit code 1).
"""

from __future__ import annotations


class InputError(Exception):
    """Malformed or inconsistent input (file syntax, shape mismatch, bad id)."""

    def __init__(self, message: str, *, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        prefix = ""
        if path is not None:
            prefix = path
            if line is not None:
                prefix += f":{line}"
            prefix += ": "
        elif line is not None:
            prefix = f"line {line}: "
        super().__init__(prefix + message)


class HypothesisError(Exception):
    """An operation's mathematical hypotheses do not hold for this input."""
