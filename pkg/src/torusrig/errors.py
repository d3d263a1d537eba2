"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class TorusRigError(Exception):
    """Base class for all errors raised by torusrig."""


class EmptySubset(TorusRigError):
    """An operation that needs a non-empty edge subset received none."""


class DomainError(TorusRigError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class CapExceeded(TorusRigError):
    """An exhaustive enumeration was asked to run above its size cap."""

    def __init__(self, size: int, cap: int, what: str = "edges"):
        super().__init__(f"{size} {what} exceeds the enumeration cap of {cap}")
        self.size = size
        self.cap = cap


class ConfigError(TorusRigError, ValueError):
    """Invalid oracle configuration (e.g. a non-prime modulus)."""


class NotTight(TorusRigError):
    """The graph does not have exactly 6|V| - 3 edges."""


class NotSparse(TorusRigError):
    """The graph violates the gain-sparsity count on some edge subset."""


class InvalidPinch(TorusRigError):
    """A gain-modified edge pinch failed validation."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class InvalidMove(TorusRigError):
    """A bar-joint vertex addition or edge split broke the gain conditions."""


class ExhaustedSearch(TorusRigError):
    """The split-off search found no admissible matching.

    On tight sparse input a matching always exists, so this always signals a
    bug. ``instance`` carries the offending graph document.
    """

    def __init__(self, message: str, instance: dict):
        super().__init__(message)
        self.instance = instance


class DocumentError(TorusRigError):
    """A graph or trace document could not be parsed or validated."""

    def __init__(self, message: str, where: str = ""):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


class SamplingExhausted(TorusRigError):
    """Rejection sampling ran out of its retry budget."""
