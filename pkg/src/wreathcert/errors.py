"""Exception types shared across the package."""

from __future__ import annotations


class WreathcertError(Exception):
    """Base class for errors raised by this package."""


class UsageError(WreathcertError):
    """Malformed input, mismatched backends, or a violated precondition."""


class CapacityError(WreathcertError):
    """A configured resource cap (ball size, translate length) was exceeded."""


class ConflictError(WreathcertError):
    """An attempt to re-pin an already pinned membership bit to the other value."""
