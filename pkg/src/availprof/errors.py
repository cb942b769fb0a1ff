"""Exception types shared across the package."""


class ProfileError(Exception):
    """Base class for every error raised by this package."""


class InvalidRangeError(ProfileError):
    """A resource range has lo > hi or a negative bound."""


class InsufficientResourcesError(ProfileError):
    """A selection asked for more resource IDs than the set holds."""


class DuplicateKeyError(ProfileError):
    """Insertion of a time key that is already present."""


class InvalidHandleError(ProfileError):
    """Use of a node handle after the node was removed."""


class NotFoundError(ProfileError):
    """Lookup or removal of something that does not exist."""


class ImpossibleRequestError(ProfileError):
    """A request that can never be served (demand exceeds capacity)."""


class InvalidDurationError(ProfileError):
    """A non-positive duration."""


class InvalidSlotError(ProfileError):
    """A malformed time slot: bad window or out-of-capacity ranges."""


class InconsistentAllocationError(ProfileError):
    """An allocation whose ranges are not free throughout its window.

    Raised instead of corrupting the profile silently.
    """


class StaleReservationError(ProfileError):
    """A reservation whose requested start already lies in the past."""


class DuplicateRequestError(ProfileError):
    """A second assignment for a request ID that was already placed."""


class TraceParseError(ProfileError):
    """A malformed workload trace line; carries the 1-based line number."""

    def __init__(self, message, lineno=None):
        super().__init__(message)
        self.lineno = lineno
