"""Availability profile: which resources are free from each change point.

The profile is a piecewise-constant function from time to a free-ID set,
stored as change points in a TimeMap.  An entry's ranges are free during
[entry.time, successor.time), or to +infinity for the last entry.  A
sentinel entry at `created` holding the full pool guarantees every query
time >= created has a floor entry.

Admission checks walk only the entries overlapping the queried window
(floor lookup for the anchor, then list successors), which is the whole
point of the structure.  check_availability and find_start_time record an
OpCost(visited, worst) per call so a caller can compare the nodes actually
examined against the theoretical worst case for that call.

Windows are half-open [start, finish): a request finishing at t and one
starting at t never conflict, and an entry exactly at the finish time is
not part of the window.
"""

from __future__ import annotations

from typing import Callable, Iterator, NamedTuple, Optional, Sequence

from .errors import (
    ImpossibleRequestError,
    InconsistentAllocationError,
    InvalidDurationError,
    InvalidSlotError,
)
from .ranges import EMPTY, ResourceRangeSet
from .timemap import Node, TimeMap


class ProfileEntry(NamedTuple):
    """One change point: the ranges free from `time` to the next entry."""

    time: int
    ranges: ResourceRangeSet

    @property
    def nRes(self) -> int:
        return self.ranges.count


class TimeSlot(NamedTuple):
    """Resources continuously free over [start, finish)."""

    start: int
    finish: int
    ranges: ResourceRangeSet

    @property
    def duration(self) -> int:
        return self.finish - self.start


class OpCost(NamedTuple):
    """Instrumentation for one admission call.

    visited: list nodes the algorithm examined.
    worst: node examinations the call could have needed; for a window
    check this is the entry count of the window, for a start-time search
    it is m*m with m counted from the first anchor that could fit the
    request.  visited <= worst always; worst == 0 marks a degenerate
    call (no candidate anchor) and is skipped by ratio aggregations.
    """

    op: str
    visited: int
    worst: int


class Profile:
    """Availability profile over a pool of `capacity` resources."""

    __slots__ = ("_capacity", "_map", "created", "cost_hook", "last_cost")

    def __init__(self, capacity: int, created: int = 0,
                 initial: Optional[ResourceRangeSet] = None) -> None:
        if capacity < 1:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self._capacity = capacity
        self._map = TimeMap()
        self.created = created
        if initial is None:
            initial = ResourceRangeSet.full(capacity)
        self._map.insert(created, ProfileEntry(created, initial))
        self.cost_hook: Optional[Callable[[OpCost], None]] = None
        self.last_cost: Optional[OpCost] = None

    @classmethod
    def empty(cls, capacity: int, created: int = 0) -> "Profile":
        """A profile with zero availability; see reconstruct()."""
        return cls(capacity, created, initial=EMPTY)

    @property
    def capacity(self) -> int:
        return self._capacity

    def __len__(self) -> int:
        return len(self._map)

    def _record(self, op: str, visited: int, worst: int) -> None:
        cost = OpCost(op, visited, worst)
        self.last_cost = cost
        if self.cost_hook is not None:
            self.cost_hook(cost)

    def _check_request(self, n_res: int, duration: int) -> None:
        if n_res < 1 or n_res > self._capacity:
            raise ImpossibleRequestError(
                f"request for {n_res} resources on a pool of {self._capacity}")
        if duration < 1:
            raise InvalidDurationError(f"duration must be >= 1, got {duration}")

    # -- admission ---------------------------------------------------

    def check_availability(self, n_res: int, start: int,
                           duration: int) -> Optional[TimeSlot]:
        """Can n_res resources be held for [start, start+duration)?

        Returns the slot with the intersection of every overlapping
        entry's ranges, or None as soon as the running intersection
        drops below n_res.  The anchor is the floor entry of `start`.
        """
        self._check_request(n_res, duration)
        anchor = self._map.floor(start)
        if anchor is None:
            raise InvalidSlotError(
                f"start {start} precedes profile creation {self.created}")
        finish = start + duration
        inter = anchor.payload.ranges
        rejected = inter.count < n_res
        visited = 1
        worst = 1
        node = anchor.next
        # one pass: count the full window for `worst` even after an
        # early rejection stops the actual examination
        while node is not None and node.key < finish:
            worst += 1
            if not rejected:
                visited += 1
                inter = inter.intersect(node.payload.ranges)
                if inter.count < n_res:
                    rejected = True
            node = node.next
        self._record("check", visited, worst)
        if rejected:
            return None
        return TimeSlot(start, finish, inter)

    def find_start_time(self, n_res: int, duration: int,
                        earliest: int) -> Optional[TimeSlot]:
        """Earliest slot of the given size and duration starting >= earliest.

        The candidate starts are `earliest` itself and each later entry
        time; candidates are tried anchor by anchor, intersecting
        successor entries until the window is covered or the
        intersection starves.  Returns None only when no entry suffix
        keeps n_res resources free forever (possible after reconstruct).
        """
        self._check_request(n_res, duration)
        if earliest < self.created:
            earliest = self.created
        anchor = self._map.floor(earliest)
        # skip entries that cannot even seat the request; the first one
        # that can is where both the search and the worst-case count start
        while anchor is not None and anchor.payload.ranges.count < n_res:
            anchor = anchor.next
        if anchor is None:
            self._record("schedule", 0, 0)
            return None
        m = 0
        node: Optional[Node] = anchor
        while node is not None:
            m += 1
            node = node.next
        worst = m * m
        visited = 0
        while anchor is not None:
            visited += 1
            ranges = anchor.payload.ranges
            if ranges.count >= n_res:
                pstime = anchor.key if anchor.key > earliest else earliest
                pftime = pstime + duration
                inter = ranges
                node = anchor.next
                while node is not None and node.key < pftime:
                    visited += 1
                    inter = inter.intersect(node.payload.ranges)
                    if inter.count < n_res:
                        break
                    node = node.next
                else:
                    self._record("schedule", visited, worst)
                    return TimeSlot(pstime, pftime, inter)
            anchor = anchor.next
        self._record("schedule", visited, worst)
        return None

    # -- updates -----------------------------------------------------

    def allocate(self, sel: ResourceRangeSet, start: int, finish: int) -> None:
        """Mark sel as busy during [start, finish).

        Boundary nodes are created on demand (existing ones are shared);
        every entry inside the window has sel subtracted.  The whole
        window is verified to contain sel before anything mutates, so a
        bad call cannot half-update the profile.
        """
        if start >= finish:
            raise InvalidSlotError(f"empty window [{start}, {finish})")
        anchor = self._map.floor(start)
        if anchor is None:
            raise InvalidSlotError(
                f"start {start} precedes profile creation {self.created}")
        if not sel:
            return
        node: Optional[Node] = anchor
        while node is not None and node.key < finish:
            if not node.payload.ranges.issuperset(sel):
                raise InconsistentAllocationError(
                    f"selection {sel} not free at time {node.key}")
            node = node.next

        # availability at the finish instant is whatever held before
        # this allocation; capture it before subtracting
        ffloor = self._map.floor(finish)
        finish_ranges = ffloor.payload.ranges
        if anchor.key == start:
            snode = anchor
        else:
            snode = self._map.insert(
                start, ProfileEntry(start, anchor.payload.ranges))
        if finish not in self._map:
            self._map.insert(finish, ProfileEntry(finish, finish_ranges))

        node = snode
        while node is not None and node.key < finish:
            node.payload = ProfileEntry(
                node.key, node.payload.ranges.subtract(sel))
            node = node.next

    def add_time_slot(self, start: int, finish: int,
                      ranges: ResourceRangeSet) -> None:
        """Mark ranges as free during [start, finish).

        Inverse of allocate for the same arguments; also how cancelled
        requests and capacity donations are returned to the pool.
        """
        if start >= finish:
            raise InvalidSlotError(f"empty window [{start}, {finish})")
        if ranges.ranges and ranges.ranges[-1].hi >= self._capacity:
            raise InvalidSlotError(
                f"ranges {ranges} exceed capacity {self._capacity}")
        anchor = self._map.floor(start)
        if anchor is None:
            raise InvalidSlotError(
                f"start {start} precedes profile creation {self.created}")
        if anchor.key == start:
            snode = anchor
        else:
            snode = self._map.insert(
                start, ProfileEntry(start, anchor.payload.ranges))
        if finish not in self._map:
            ffloor = self._map.floor(finish)
            self._map.insert(
                finish, ProfileEntry(finish, ffloor.payload.ranges))
        node: Optional[Node] = snode
        while node is not None and node.key < finish:
            node.payload = ProfileEntry(
                node.key, node.payload.ranges.union(ranges))
            node = node.next

    def prune(self, before: int) -> int:
        """Drop entries older than `before`, keeping its floor entry.

        The floor entry becomes the new sentinel, so availability at any
        t >= before is untouched.  Returns the number removed.
        """
        f = self._map.floor(before)
        if f is None:
            return 0
        removed = 0
        node = self._map.first()
        while node is not None and node.key < before:
            nxt = node.next
            if node is not f:
                self._map.remove(node.key)
                removed += 1
            node = nxt
        if f.key > self.created:
            self.created = f.key
        return removed

    # -- queries -----------------------------------------------------

    def availability_at(self, t: int) -> ResourceRangeSet:
        node = self._map.floor(t)
        if node is None:
            raise InvalidSlotError(
                f"time {t} precedes profile creation {self.created}")
        return node.payload.ranges

    def free_time_slots(self, qstart: int, qend: int) -> list[TimeSlot]:
        """Non-overlapping free slots partitioning [qstart, qend).

        One slot per profile segment with free resources; consecutive
        slots may touch but never overlap, and together they cover every
        instant in the window that has anything free.
        """
        if qstart >= qend:
            raise InvalidSlotError(f"empty window [{qstart}, {qend})")
        node = self._map.floor(qstart)
        if node is None:
            raise InvalidSlotError(
                f"window start {qstart} precedes profile creation {self.created}")
        out: list[TimeSlot] = []
        while node is not None and node.key < qend:
            nxt = node.next
            seg_start = node.key if node.key > qstart else qstart
            seg_end = qend if nxt is None or nxt.key > qend else nxt.key
            if seg_start < seg_end and node.payload.ranges:
                out.append(TimeSlot(seg_start, seg_end, node.payload.ranges))
            node = nxt
        return out

    def scheduling_options(self, qstart: int, qend: int,
                           min_duration: int = 1) -> list[TimeSlot]:
        """All maximal constant-range slots anchored in [qstart, qend).

        For each entry in the window, successors are intersected until
        the set shrinks; each plateau of the running intersection is one
        option.  Options from different anchors may overlap in time;
        that is what makes them alternative queue positions rather than
        a partition.
        """
        if qstart >= qend:
            raise InvalidSlotError(f"empty window [{qstart}, {qend})")
        if min_duration < 1:
            raise InvalidDurationError(
                f"min_duration must be >= 1, got {min_duration}")
        anchor = self._map.floor(qstart)
        if anchor is None:
            raise InvalidSlotError(
                f"window start {qstart} precedes profile creation {self.created}")
        out: list[TimeSlot] = []
        while anchor is not None and anchor.key < qend:
            a_start = anchor.key if anchor.key > qstart else qstart
            inter = anchor.payload.ranges
            node = anchor.next
            while inter:
                if node is None or node.key >= qend:
                    if qend - a_start >= min_duration:
                        out.append(TimeSlot(a_start, qend, inter))
                    break
                shrunk = inter.intersect(node.payload.ranges)
                if shrunk.count < inter.count:
                    if node.key - a_start >= min_duration:
                        out.append(TimeSlot(a_start, node.key, inter))
                    inter = shrunk
                node = node.next
            anchor = anchor.next
        return out

    # -- introspection -------------------------------------------------

    def entries(self) -> Iterator[ProfileEntry]:
        for _, payload in self._map.items():
            yield payload

    def snapshot(self) -> str:
        """One `<time> <ranges>` line per entry; the test/debug dump."""
        return "\n".join(
            f"{e.time} {e.ranges.to_text()}" for e in self.entries())


def reconstruct(capacity: int, slots: Sequence[TimeSlot],
                created: int = 0) -> Profile:
    """Rebuild a profile from free slots, e.g. free_time_slots() output.

    Availability starts at zero everywhere and each slot's ranges are
    added back over its window, so the result's availability function is
    exactly the union of the slots.
    """
    profile = Profile.empty(capacity, created)
    for slot in slots:
        if slot.ranges.ranges and slot.ranges.ranges[-1].hi >= capacity:
            raise InvalidSlotError(
                f"slot ranges {slot.ranges} exceed capacity {capacity}")
        profile.add_time_slot(slot.start, slot.finish, slot.ranges)
    return profile
