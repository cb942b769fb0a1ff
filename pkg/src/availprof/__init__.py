"""Availability profiles for advance reservations and backfilling."""

from .errors import (
    DuplicateKeyError,
    DuplicateRequestError,
    ImpossibleRequestError,
    InconsistentAllocationError,
    InsufficientResourcesError,
    InvalidDurationError,
    InvalidHandleError,
    InvalidRangeError,
    InvalidSlotError,
    NotFoundError,
    ProfileError,
    StaleReservationError,
    TraceParseError,
)
from .ranges import EMPTY, FIRST_FIT, ResourceRange, ResourceRangeSet

__all__ = [
    "DuplicateKeyError",
    "DuplicateRequestError",
    "EMPTY",
    "FIRST_FIT",
    "ImpossibleRequestError",
    "InconsistentAllocationError",
    "InsufficientResourcesError",
    "InvalidDurationError",
    "InvalidHandleError",
    "InvalidRangeError",
    "InvalidSlotError",
    "NotFoundError",
    "ProfileError",
    "ResourceRange",
    "ResourceRangeSet",
    "StaleReservationError",
    "TraceParseError",
]
