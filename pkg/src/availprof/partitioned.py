"""Availability profile over statically partitioned resources.

Each change point stores one free-range set per partition, so one map
answers per-partition questions and cross-partition ones from the same
nodes.  Ownership is static: partition specs fix which IDs belong to
which partition at construction, and borrowing only changes who consumes
a resource for a window, never who owns it.  An allocation is therefore
subtracted from each owning partition's set, and a cancellation returns
every ID to its owner.
"""

from __future__ import annotations

from typing import Callable, Iterator, NamedTuple, Optional, Sequence

from .errors import (
    ImpossibleRequestError,
    InconsistentAllocationError,
    InvalidDurationError,
    InvalidSlotError,
)
from .profile import OpCost, TimeSlot
from .ranges import EMPTY, ResourceRangeSet
from .timemap import Node, TimeMap


class PartitionSpec(NamedTuple):
    """One partition: its index and the IDs it owns."""

    id: int
    initial_ranges: ResourceRangeSet


class PartitionedEntry(NamedTuple):
    """One change point: the free set of every partition from `time` on."""

    time: int
    per_partition: tuple[ResourceRangeSet, ...]

    def union(self, parts: Sequence[int]) -> ResourceRangeSet:
        out = EMPTY
        for p in parts:
            out = out.union(self.per_partition[p])
        return out


class PartitionedProfile:
    """Profile whose nodes carry one free-range set per partition."""

    __slots__ = ("_specs", "_owned", "_capacity", "_map", "created",
                 "cost_hook", "last_cost")

    def __init__(self, specs: Sequence[PartitionSpec], created: int = 0) -> None:
        if not specs:
            raise ValueError("at least one partition required")
        union = EMPTY
        total = 0
        for i, spec in enumerate(specs):
            if spec.id != i:
                raise ValueError(
                    f"partition ids must be 0..{len(specs) - 1} in order")
            if union.intersect(spec.initial_ranges):
                raise ValueError(f"partition {i} overlaps an earlier one")
            union = union.union(spec.initial_ranges)
            total += spec.initial_ranges.count
        if union != ResourceRangeSet.full(total):
            raise ValueError("partitions must cover 0..capacity-1 exactly")
        self._specs = tuple(specs)
        self._owned = tuple(s.initial_ranges for s in specs)
        self._capacity = total
        self._map = TimeMap()
        self.created = created
        self._map.insert(created, PartitionedEntry(created, self._owned))
        self.cost_hook: Optional[Callable[[OpCost], None]] = None
        self.last_cost: Optional[OpCost] = None

    @property
    def capacity(self) -> int:
        return self._capacity

    @property
    def partitions(self) -> int:
        return len(self._specs)

    def partition_size(self, p: int) -> int:
        return self._owned[p].count

    def owner_of(self, rid: int) -> int:
        for p, owned in enumerate(self._owned):
            if rid in owned:
                return p
        raise ValueError(f"resource {rid} is not owned by any partition")

    def _record(self, cost: OpCost) -> None:
        self.last_cost = cost
        if self.cost_hook is not None:
            self.cost_hook(cost)

    def _anchor(self, t: int) -> Node:
        node = self._map.floor(t)
        if node is None:
            raise InvalidSlotError(
                f"time {t} precedes profile creation {self.created}")
        return node

    # -- queries -------------------------------------------------------

    def _check_window(self, parts: Sequence[int], n_res: int, start: int,
                      duration: int, limit: int) -> Optional[TimeSlot]:
        if n_res < 1 or n_res > limit:
            raise ImpossibleRequestError(
                f"request for {n_res} resources, partitions hold {limit}")
        if duration < 1:
            raise InvalidDurationError(f"duration must be >= 1, got {duration}")
        anchor = self._anchor(start)
        finish = start + duration
        inter = anchor.payload.union(parts)
        rejected = inter.count < n_res
        visited = 1
        worst = 1
        node = anchor.next
        while node is not None and node.key < finish:
            worst += 1
            if not rejected:
                visited += 1
                inter = inter.intersect(node.payload.union(parts))
                if inter.count < n_res:
                    rejected = True
            node = node.next
        self._record(OpCost("check", visited, worst))
        return None if rejected else TimeSlot(start, finish, inter)

    def check_partition(self, p: int, n_res: int, start: int,
                        duration: int) -> Optional[TimeSlot]:
        """check_availability restricted to one partition's free sets."""
        return self._check_window([p], n_res, start, duration,
                                  self.partition_size(p))

    def check_borrowing(self, p: int, donors: Sequence[int], n_res: int,
                        start: int, duration: int) -> Optional[TimeSlot]:
        """Window check over partition p plus the donors' free sets.

        The returned ranges may span several partitions; allocate() then
        charges each ID to its owner.
        """
        donors = sorted(set(donors))
        if p in donors:
            raise ValueError(f"partition {p} cannot donate to itself")
        parts = [p] + donors
        limit = sum(self.partition_size(q) for q in parts)
        return self._check_window(parts, n_res, start, duration, limit)

    def availability_at(self, t: int) -> tuple[ResourceRangeSet, ...]:
        return self._anchor(t).payload.per_partition

    # -- updates -------------------------------------------------------

    def _split_by_owner(self, sel: ResourceRangeSet) -> list[ResourceRangeSet]:
        pieces = [sel.intersect(owned) for owned in self._owned]
        covered = EMPTY
        for piece in pieces:
            covered = covered.union(piece)
        if covered != sel:
            raise InconsistentAllocationError(
                f"selection {sel} includes IDs outside every partition")
        return pieces

    def _ensure_boundaries(self, start: int, finish: int) -> Node:
        anchor = self._anchor(start)
        if anchor.key == start:
            snode = anchor
        else:
            snode = self._map.insert(
                start, PartitionedEntry(start, anchor.payload.per_partition))
        if finish not in self._map:
            ffloor = self._map.floor(finish)
            self._map.insert(
                finish, PartitionedEntry(finish, ffloor.payload.per_partition))
        return snode

    def allocate(self, sel: ResourceRangeSet, start: int, finish: int) -> None:
        """Mark sel busy on [start, finish), charging owners per ID."""
        if start >= finish:
            raise InvalidSlotError(f"empty window [{start}, {finish})")
        if not sel:
            return
        pieces = self._split_by_owner(sel)
        node: Optional[Node] = self._anchor(start)
        while node is not None and node.key < finish:
            for p, piece in enumerate(pieces):
                if piece and not node.payload.per_partition[p].issuperset(piece):
                    raise InconsistentAllocationError(
                        f"partition {p} does not have {piece} free at {node.key}")
            node = node.next
        node = self._ensure_boundaries(start, finish)
        while node is not None and node.key < finish:
            sets = tuple(
                s.subtract(piece) if piece else s
                for s, piece in zip(node.payload.per_partition, pieces))
            node.payload = PartitionedEntry(node.key, sets)
            node = node.next

    def allocate_partition(self, p: int, sel: ResourceRangeSet, start: int,
                           finish: int) -> None:
        """allocate() for IDs that must all belong to partition p."""
        if sel and not self._owned[p].issuperset(sel):
            raise InconsistentAllocationError(
                f"selection {sel} is not owned by partition {p}")
        self.allocate(sel, start, finish)

    def add_time_slot(self, start: int, finish: int,
                      ranges: ResourceRangeSet) -> None:
        """Return ranges to their owning partitions on [start, finish)."""
        if start >= finish:
            raise InvalidSlotError(f"empty window [{start}, {finish})")
        pieces = self._split_by_owner(ranges)
        node: Optional[Node] = self._ensure_boundaries(start, finish)
        while node is not None and node.key < finish:
            sets = tuple(
                s.union(piece) if piece else s
                for s, piece in zip(node.payload.per_partition, pieces))
            node.payload = PartitionedEntry(node.key, sets)
            node = node.next

    # -- introspection ---------------------------------------------------

    def entries(self) -> Iterator[PartitionedEntry]:
        for _, payload in self._map.items():
            yield payload

    def snapshot(self) -> str:
        """One line per entry: `<time> p0:<ranges> p1:<ranges> ...`."""
        lines = []
        for e in self.entries():
            parts = " ".join(
                f"p{p}:{s.to_text()}" for p, s in enumerate(e.per_partition))
            lines.append(f"{e.time} {parts}")
        return "\n".join(lines)
