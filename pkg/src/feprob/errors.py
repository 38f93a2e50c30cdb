"""Exception hierarchy.

The CLI maps these onto exit codes: :class:`UsageError` -> 2,
:class:`DomainError` and subclasses -> 3.
"""

from __future__ import annotations


class FeprobError(Exception):
    """Base class for all library errors."""


class UsageError(FeprobError, ValueError):
    """Arguments are inconsistent with each other (e.g. dimension mismatch)."""


class DomainError(FeprobError, ValueError):
    """A numeric argument lies outside the domain where the quantity is defined."""


class HypothesisError(DomainError):
    """The order condition ``k > n/2`` required by the estimate is violated."""

    def __init__(self, k: int, n: int):
        super().__init__(f"hypothesis k > n/2 violated: k={k}, n={n}")
        self.k = k
        self.n = n


class GeometryError(DomainError):
    """Degenerate or malformed simplex."""


class CapabilityError(DomainError):
    """Requested configuration is outside the supported range."""


class RangeError(DomainError, OverflowError):
    """Result does not fit the count type."""


class ProviderError(DomainError):
    """A semi-norm provider cannot answer a query."""

    def __init__(self, message: str, order: int | None = None):
        super().__init__(message)
        self.order = order
