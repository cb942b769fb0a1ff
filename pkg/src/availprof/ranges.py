"""Sets of free resource IDs kept as disjoint inclusive integer ranges.

A pool's schedulable resources are numbered 0..capacity-1; a resource is an
opaque slot (the scheduler does not care what it is made of).  Availability
is tracked as ranges of those IDs, e.g. a pool of 10 resources starts out as
the single range [0..9].  Ranges are inclusive on both ends, so [0..9] holds
exactly ten IDs.

``ResourceRangeSet`` is the normalized form: ranges sorted ascending,
pairwise disjoint and never adjacent (``[0..1],[2..3]`` collapses to
``[0..3]``).  Normalization makes the representation of an ID set unique,
so equality of sets is equality of their ranges.  Instances are treated as
immutable: every operation returns a new set, which makes sharing between
profile entries safe.
"""

from __future__ import annotations

from typing import Callable, Iterable, Iterator, NamedTuple, Union

from .errors import InsufficientResourcesError, InvalidRangeError

FIRST_FIT = "first-fit"

SelectionPolicy = Union[str, Callable[["ResourceRangeSet", int], "ResourceRangeSet"]]


class ResourceRange(NamedTuple):
    """Inclusive interval of resource IDs."""

    lo: int
    hi: int

    @property
    def count(self) -> int:
        return self.hi - self.lo + 1

    def __str__(self) -> str:
        return f"{self.lo}-{self.hi}"


def _normalize(intervals: Iterable[tuple[int, int]]) -> tuple[ResourceRange, ...]:
    items = []
    for lo, hi in intervals:
        if lo < 0 or lo > hi:
            raise InvalidRangeError(f"bad resource range [{lo}..{hi}]")
        items.append((lo, hi))
    if not items:
        return ()
    items.sort()
    out = []
    cur_lo, cur_hi = items[0]
    for lo, hi in items[1:]:
        if lo <= cur_hi + 1:  # overlap or adjacency: merge
            if hi > cur_hi:
                cur_hi = hi
        else:
            out.append(ResourceRange(cur_lo, cur_hi))
            cur_lo, cur_hi = lo, hi
    out.append(ResourceRange(cur_lo, cur_hi))
    return tuple(out)


class ResourceRangeSet:
    """Normalized set of disjoint, non-adjacent resource-ID ranges.

    The constructor accepts any iterable of (lo, hi) pairs and merges
    overlaps and adjacencies; two sets covering the same IDs always
    compare equal.
    """

    __slots__ = ("ranges", "count")

    def __init__(self, intervals: Iterable[tuple[int, int]] = ()) -> None:
        self.ranges: tuple[ResourceRange, ...] = _normalize(intervals)
        self.count: int = sum(r[1] - r[0] + 1 for r in self.ranges)

    @classmethod
    def _wrap(cls, ranges: tuple[ResourceRange, ...]) -> "ResourceRangeSet":
        # internal fast path: ranges are already normalized
        rs = object.__new__(cls)
        rs.ranges = ranges
        rs.count = sum(r[1] - r[0] + 1 for r in ranges)
        return rs

    @classmethod
    def full(cls, capacity: int) -> "ResourceRangeSet":
        """The set of all IDs of a pool with the given capacity."""
        if capacity <= 0:
            return EMPTY
        return cls._wrap((ResourceRange(0, capacity - 1),))

    @classmethod
    def from_ids(cls, ids: Iterable[int]) -> "ResourceRangeSet":
        return cls((i, i) for i in ids)

    # -- set algebra -------------------------------------------------

    def intersect(self, other: "ResourceRangeSet") -> "ResourceRangeSet":
        """IDs present in both sets."""
        a, b = self.ranges, other.ranges
        i = j = 0
        out = []
        while i < len(a) and j < len(b):
            alo, ahi = a[i]
            blo, bhi = b[j]
            lo = alo if alo > blo else blo
            hi = ahi if ahi < bhi else bhi
            if lo <= hi:
                out.append(ResourceRange(lo, hi))
            if ahi < bhi:
                i += 1
            else:
                j += 1
        return ResourceRangeSet._wrap(tuple(out))

    def union(self, other: "ResourceRangeSet") -> "ResourceRangeSet":
        """IDs present in either set."""
        a, b = self.ranges, other.ranges
        if not a:
            return other
        if not b:
            return self
        i = j = 0
        out = []
        cur_lo = cur_hi = None
        while i < len(a) or j < len(b):
            if j >= len(b) or (i < len(a) and a[i][0] <= b[j][0]):
                lo, hi = a[i]
                i += 1
            else:
                lo, hi = b[j]
                j += 1
            if cur_lo is None:
                cur_lo, cur_hi = lo, hi
            elif lo <= cur_hi + 1:
                if hi > cur_hi:
                    cur_hi = hi
            else:
                out.append(ResourceRange(cur_lo, cur_hi))
                cur_lo, cur_hi = lo, hi
        out.append(ResourceRange(cur_lo, cur_hi))
        return ResourceRangeSet._wrap(tuple(out))

    def subtract(self, other: "ResourceRangeSet") -> "ResourceRangeSet":
        """IDs present in this set but not in the other."""
        b = other.ranges
        if not b or not self.ranges:
            return self
        out = []
        j = 0
        for lo, hi in self.ranges:
            cur = lo
            while j < len(b) and b[j][1] < cur:
                j += 1
            k = j
            while k < len(b) and b[k][0] <= hi:
                blo, bhi = b[k]
                if blo > cur:
                    out.append(ResourceRange(cur, blo - 1))
                if bhi >= cur:
                    cur = bhi + 1
                if cur > hi:
                    break
                k += 1
            if cur <= hi:
                out.append(ResourceRange(cur, hi))
        return ResourceRangeSet._wrap(tuple(out))

    __and__ = intersect
    __or__ = union
    __sub__ = subtract

    def issuperset(self, other: "ResourceRangeSet") -> bool:
        """True when every ID of the other set is also in this one."""
        a = self.ranges
        i = 0
        for lo, hi in other.ranges:
            while i < len(a) and a[i][1] < lo:
                i += 1
            if i >= len(a) or a[i][0] > lo or a[i][1] < hi:
                return False
        return True

    # -- selection ---------------------------------------------------

    def select(self, n: int, policy: SelectionPolicy = FIRST_FIT) -> "ResourceRangeSet":
        """Pick a subset of exactly n IDs according to the policy.

        ``first-fit`` takes the n lowest IDs, splitting the last range it
        consumes.  A callable policy receives (set, n) and must return a
        subset with exactly n IDs; this is the extension point for other
        strategies.
        """
        if n < 1:
            raise InsufficientResourcesError(f"cannot select {n} resources")
        if n > self.count:
            raise InsufficientResourcesError(
                f"need {n} resources, set holds {self.count}")
        if callable(policy):
            return policy(self, n)
        if policy != FIRST_FIT:
            raise ValueError(f"unknown selection policy: {policy!r}")
        out = []
        need = n
        for lo, hi in self.ranges:
            take = hi - lo + 1
            if take > need:
                take = need
            out.append(ResourceRange(lo, lo + take - 1))
            need -= take
            if need == 0:
                break
        return ResourceRangeSet._wrap(tuple(out))

    # -- text form ---------------------------------------------------

    def to_text(self) -> str:
        """Render as "lo-hi,lo-hi"; the empty set renders as "-"."""
        if not self.ranges:
            return "-"
        return ",".join(f"{lo}-{hi}" for lo, hi in self.ranges)

    @classmethod
    def from_text(cls, text: str) -> "ResourceRangeSet":
        """Parse the to_text() form; accepts bare IDs and "" for empty."""
        text = text.strip()
        if text in ("", "-"):
            return EMPTY
        intervals = []
        for part in text.split(","):
            lo, sep, hi = part.partition("-")
            try:
                intervals.append((int(lo), int(hi) if sep else int(lo)))
            except ValueError:
                raise InvalidRangeError(f"bad range text: {part!r}") from None
        return cls(intervals)

    # -- misc --------------------------------------------------------

    def ids(self) -> Iterator[int]:
        for lo, hi in self.ranges:
            yield from range(lo, hi + 1)

    def __contains__(self, rid: int) -> bool:
        for lo, hi in self.ranges:
            if lo <= rid <= hi:
                return True
        return False

    def __len__(self) -> int:
        return self.count

    def __bool__(self) -> bool:
        return bool(self.ranges)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ResourceRangeSet):
            return NotImplemented
        return self.ranges == other.ranges

    def __hash__(self) -> int:
        return hash(self.ranges)

    def __repr__(self) -> str:
        return f"ResourceRangeSet({self.to_text()!r})"

    def __str__(self) -> str:
        return self.to_text()


EMPTY = ResourceRangeSet()
