"""Exception types shared across the library."""

from __future__ import annotations


class SpectraError(Exception):
    """Base class for library errors."""


class PreconditionError(SpectraError, ValueError):
    """An argument violates a documented precondition."""


class BandPairingError(SpectraError):
    """Sorted eigenvalue pairing produced an invalid band decomposition.

    Carries the index of the offending band pair so callers can locate
    the failure in the eigenvalue list.
    """

    def __init__(self, message: str, band_index: int | None = None):
        super().__init__(message)
        self.band_index = band_index


class RefinementError(SpectraError):
    """A certified root bracket could not be established."""


class NotFoundError(SpectraError):
    """A search (transition, threshold) found no crossing in its range.

    Carries the endpoint observations so callers can widen the range.
    """

    def __init__(self, message: str, endpoints: tuple | None = None):
        super().__init__(message)
        self.endpoints = endpoints
