"""Conservative backfilling over an availability profile.

Every best-effort request gets a start time the moment it arrives: at the
clock if the profile admits it now, else at the earliest feasible start.
Because the start is allocated in the profile immediately, later arrivals
can only fill holes; they can never displace an earlier assignment.
Advance reservations demand a fixed window and are admitted all-or-
nothing; a rejected reservation is answered with alternative slots from
the profile instead of a retry.

Assignments are write-once.  The scheduler keeps a private log of every
(start, ranges) it hands out and assignment_audit() re-verifies the live
records against it, which is how replays prove that backfilling stayed
conservative.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

from .errors import (
    DuplicateRequestError,
    ImpossibleRequestError,
    InconsistentAllocationError,
    NotFoundError,
    StaleReservationError,
)
from .profile import Profile, TimeSlot
from .ranges import FIRST_FIT, ResourceRangeSet, SelectionPolicy

OPTIONS_HORIZON = 7 * 86_400  # how far past a rejected start to offer slots


@dataclass
class Request:
    """Best-effort request: flexible in time, fixed in size and duration."""

    id: int
    n_res: int
    duration: int
    arrival: int
    start_time: Optional[int] = None
    ranges: Optional[ResourceRangeSet] = None
    outcome: str = ""

    @property
    def finish_time(self) -> Optional[int]:
        if self.start_time is None:
            return None
        return self.start_time + self.duration


@dataclass
class Reservation:
    """Advance reservation: fixed [start_time, start_time+duration) window."""

    id: int
    n_res: int
    start_time: int
    duration: int
    arrival: int
    ranges: Optional[ResourceRangeSet] = None
    outcome: str = ""

    @property
    def finish_time(self) -> int:
        return self.start_time + self.duration


class DecisionRecord(NamedTuple):
    id: int
    type: str
    arrival: int
    n_res: int
    duration: int
    decision: str
    start: Optional[int]
    ranges_text: str


class BackfillScheduler:
    """Owns one Profile and handles arrival/completion events in order."""

    def __init__(self, capacity: int, created: int = 0,
                 options_horizon: int = OPTIONS_HORIZON,
                 policy: SelectionPolicy = FIRST_FIT) -> None:
        self.profile = Profile(capacity, created)
        self.clock = created
        self.options_horizon = options_horizon
        self.policy = policy
        self.started = 0
        self.queued = 0
        self.accepted = 0
        self.rejected = 0
        self.completed = 0
        self.decisions: list[DecisionRecord] = []
        self._items: dict[int, Request | Reservation] = {}
        self._done: set[int] = set()
        self._assignment_log: dict[int, tuple[int, ResourceRangeSet]] = {}

    @property
    def capacity(self) -> int:
        return self.profile.capacity

    def advance(self, t: int) -> None:
        if t < self.clock:
            raise ValueError(f"clock may not move backwards: {t} < {self.clock}")
        self.clock = t

    def prune(self) -> int:
        """Drop profile entries older than the clock; memory bound only."""
        return self.profile.prune(self.clock)

    # -- assignment bookkeeping ------------------------------------------

    def _register(self, item: Request | Reservation) -> None:
        if item.id in self._items:
            raise DuplicateRequestError(f"id {item.id} already submitted")
        self._items[item.id] = item

    def _assign(self, item: Request | Reservation, start: int,
                ranges: ResourceRangeSet) -> None:
        if item.id in self._assignment_log:
            raise InconsistentAllocationError(
                f"id {item.id} was already assigned; assignments are write-once")
        item.start_time = start
        item.ranges = ranges
        self._assignment_log[item.id] = (start, ranges)

    def assignment_audit(self) -> int:
        """Verify no assignment drifted from its first write; returns count."""
        for rid, (start, ranges) in self._assignment_log.items():
            item = self._items[rid]
            if item.start_time != start or item.ranges != ranges:
                raise InconsistentAllocationError(
                    f"id {rid} changed after assignment: "
                    f"({item.start_time}, {item.ranges}) != ({start}, {ranges})")
        return len(self._assignment_log)

    def _decide(self, item: Request | Reservation, kind: str,
                decision: str) -> None:
        # a rejected reservation still carries its requested start_time;
        # the record's start column means "assigned start" only
        assigned = item.id in self._assignment_log
        item.outcome = decision
        self.decisions.append(DecisionRecord(
            item.id, kind, item.arrival, item.n_res, item.duration, decision,
            item.start_time if assigned else None,
            item.ranges.to_text() if assigned else ""))

    # -- best-effort requests ----------------------------------------------

    def req_submitted(self, r: Request) -> str:
        """Admit a request at its arrival; it always gets a start.

        Oversized requests are recorded as rejected rather than raised:
        a trace job no pool configuration could run is workload data,
        not a caller bug.
        """
        if r.arrival != self.clock:
            raise ValueError(
                f"request {r.id} arrives at {r.arrival}, clock is {self.clock}")
        self._register(r)
        if r.n_res < 1 or r.n_res > self.capacity:
            self._decide(r, "request", "rejected")
            self.rejected += 1
            return "rejected"
        if self.start_req(r):
            self._decide(r, "request", "started")
            self.started += 1
            return "started"
        self.enqueue_req(r)
        self._decide(r, "request", "queued")
        self.queued += 1
        return "queued"

    def start_req(self, r: Request) -> bool:
        """Try to run right now; allocates and assigns on success."""
        slot = self.profile.check_availability(r.n_res, self.clock, r.duration)
        if slot is None:
            return False
        sel = slot.ranges.select(r.n_res, self.policy)
        self.profile.allocate(sel, self.clock, self.clock + r.duration)
        self._assign(r, self.clock, sel)
        return True

    def enqueue_req(self, r: Request) -> None:
        """Assign the earliest feasible future start; always succeeds."""
        slot = self.profile.find_start_time(r.n_res, r.duration, self.clock)
        if slot is None:
            raise ImpossibleRequestError(
                f"no feasible start for request {r.id}")
        sel = slot.ranges.select(r.n_res, self.policy)
        self.profile.allocate(sel, slot.start, slot.finish)
        self._assign(r, slot.start, sel)

    # -- advance reservations ----------------------------------------------

    def res_submitted(self, r: Reservation) -> tuple[str, list[TimeSlot]]:
        """Admit a reservation or reject it with alternative slots.

        The options cover [start, start + options_horizon) and only
        include slots wide enough for the reservation's size, so the
        list is empty exactly when nothing in the horizon could hold it.
        """
        if r.start_time < self.clock:
            raise StaleReservationError(
                f"reservation {r.id} starts at {r.start_time}, "
                f"clock is {self.clock}")
        self._register(r)
        if r.n_res < 1 or r.n_res > self.capacity:
            self._decide(r, "reservation", "rejected")
            self.rejected += 1
            return "rejected", []
        if self.admit_reserv(r):
            self._decide(r, "reservation", "accepted")
            self.accepted += 1
            return "accepted", []
        options = [
            slot for slot in self.profile.scheduling_options(
                r.start_time, r.start_time + self.options_horizon, r.duration)
            if slot.ranges.count >= r.n_res]
        self._decide(r, "reservation", "rejected")
        self.rejected += 1
        return "rejected", options

    def admit_reserv(self, r: Reservation) -> bool:
        """All-or-nothing window admission at the requested start."""
        slot = self.profile.check_availability(
            r.n_res, r.start_time, r.duration)
        if slot is None:
            return False
        sel = slot.ranges.select(r.n_res, self.policy)
        self.profile.allocate(sel, r.start_time, r.finish_time)
        self._assign(r, r.start_time, sel)
        return True

    # -- completions -------------------------------------------------------

    def on_completion(self, rid: int) -> None:
        """Tally a finished run; the profile already encodes the release."""
        item = self._items.get(rid)
        if item is None or item.start_time is None:
            raise NotFoundError(f"no running request with id {rid}")
        if rid in self._done:
            raise DuplicateRequestError(f"id {rid} already completed")
        if not item.start_time <= self.clock <= item.finish_time:
            raise ValueError(
                f"completion of {rid} at {self.clock} outside its window "
                f"[{item.start_time}, {item.finish_time}]")
        self._done.add(rid)
        self.completed += 1

    # -- reporting -----------------------------------------------------------

    def write_decisions(self, path) -> None:
        """CSV dump: id,type,arrival,nRes,duration,decision,start,ranges."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", "type", "arrival", "nRes", "duration",
                        "decision", "start", "ranges"])
            for d in self.decisions:
                w.writerow([d.id, d.type, d.arrival, d.n_res, d.duration,
                            d.decision,
                            "" if d.start is None else d.start, d.ranges_text])
