"""
Error hierarchy for scandyn.

Every failure the library raises on purpose derives from ScanDynError, so callers
(the CLI, batch workers) can separate expected dynamics errors from bugs.
"""

from typing import List, Optional


class ScanDynError(Exception):
    """Base class for all scandyn errors."""


class DimensionMismatchError(ScanDynError, ValueError):
    """Input arrays do not match the chain's link count."""


class ScanError(ScanDynError, ValueError):
    """Invalid scan request: empty input, missing identity or bad plan."""


class ModelValidationError(ScanDynError):
    """A chain model violates one or more invariants."""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        summary = "; ".join(self.violations[:5])
        if len(self.violations) > 5:
            summary += f" (+{len(self.violations) - 5} more)"
        super().__init__(f"{len(self.violations)} model violation(s): {summary}")


class ModelFormatError(ScanDynError, ValueError):
    """A model or input document does not follow the schema."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class SingularInertiaError(ScanDynError):
    """An articulated inertia or joint space inertia lost positive definiteness."""

    def __init__(self, message: str, link_index: Optional[int] = None, pivot: Optional[float] = None):
        self.link_index = link_index
        self.pivot = pivot
        super().__init__(message)
