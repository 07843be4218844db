"""Exception hierarchy shared across the package."""

from __future__ import annotations


class PIRError(Exception):
    """Base class for all package errors."""


class ParameterError(PIRError, ValueError):
    """Scheme parameters violate a construction precondition."""


class EncodingError(PIRError):
    """A record cannot be systematically encoded under the given parity check."""


class RequestError(PIRError, ValueError):
    """A retrieval request is malformed (e.g. record index out of range)."""


class ProtocolError(PIRError):
    """A node received a message it cannot process."""


class DecodeError(PIRError):
    """The decode system has no unique solution."""


class SessionError(PIRError):
    """A protocol session failed; ``node`` names the offending node if known."""

    def __init__(self, message: str, node: int | None = None):
        super().__init__(message if node is None else f"node {node}: {message}")
        self.node = node


class EnumerationBudgetError(PIRError):
    """A brute-force oracle would exceed its enumeration budget."""

    def __init__(self, required: int, budget: int):
        super().__init__(
            f"exhaustive enumeration needs {required} cases, budget is {budget}"
        )
        self.required = required
        self.budget = budget


class InfeasibleRegionError(PIRError, ValueError):
    """The storage cost leaves the tradeoff bound undefined (K * sc <= 1)."""


class SchemeFileError(PIRError, ValueError):
    """A scheme file failed to parse or validate."""
