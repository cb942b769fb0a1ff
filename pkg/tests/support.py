"""Brute-force oracles and generators shared by the test modules.

The implementation under test stores availability as change points; the
oracles here store it the dumb way, one row per tick, so agreement
between the two is meaningful evidence.  numpy keeps the dumb way fast
enough to run thousands of randomized trials.
"""

from __future__ import annotations

import random
from typing import Iterable, Optional

import numpy as np

from availprof.profile import Profile
from availprof.ranges import ResourceRangeSet


class TickOracle:
    """Free/busy matrix with one row per tick and one column per resource.

    Models [created, horizon); availability beyond the last tick is the
    last row (the profile's final entry extends forever, so generators
    must keep every mutation inside the horizon).
    """

    def __init__(self, capacity: int, horizon: int, created: int = 0,
                 full: bool = True) -> None:
        assert horizon > created
        self.capacity = capacity
        self.created = created
        self.horizon = horizon
        self.free = np.full((horizon - created, capacity), full, dtype=bool)

    def _row(self, t: int) -> int:
        assert t >= self.created
        return min(t - self.created, len(self.free) - 1)

    def free_ids(self, t: int) -> frozenset:
        return frozenset(np.flatnonzero(self.free[self._row(t)]).tolist())

    def allocate(self, ids: Iterable[int], start: int, finish: int) -> None:
        assert self.created <= start < finish <= self.horizon
        self.free[start - self.created:finish - self.created, list(ids)] = False

    def add(self, ids: Iterable[int], start: int, finish: int) -> None:
        assert self.created <= start < finish <= self.horizon
        self.free[start - self.created:finish - self.created, list(ids)] = True

    def window_ids(self, start: int, finish: int) -> frozenset:
        """IDs free at every tick of [start, finish)."""
        assert start < finish
        rows = [self._row(t) for t in range(start, finish)]
        mask = self.free[sorted(set(rows))].all(axis=0)
        return frozenset(np.flatnonzero(mask).tolist())

    def check(self, n_res: int, start: int, duration: int) -> Optional[frozenset]:
        ids = self.window_ids(start, start + duration)
        return ids if len(ids) >= n_res else None

    def find(self, n_res: int, duration: int,
             earliest: int) -> Optional[tuple[int, frozenset]]:
        """First start >= earliest with n_res IDs free for the duration.

        Scans every candidate tick, not just change points; per-resource
        window sums come from a cumulative-sum trick so the scan stays
        vectorized.
        """
        earliest = max(earliest, self.created)
        t_rows = len(self.free)
        assert earliest - self.created <= t_rows
        # extend by the window length so starts near the end see the
        # constant tail the real profile extends forever
        tail = np.broadcast_to(self.free[-1], (duration, self.capacity))
        fx = np.concatenate([self.free, tail])
        csum = np.zeros((len(fx) + 1, self.capacity), dtype=np.int64)
        np.cumsum(fx, axis=0, out=csum[1:])
        window = csum[duration:duration + t_rows] - csum[:t_rows]
        fully_free = window == duration
        counts = fully_free.sum(axis=1)
        s0 = earliest - self.created
        hits = np.flatnonzero(counts[s0:] >= n_res)
        if len(hits) == 0:
            return None
        s = s0 + int(hits[0])
        ids = frozenset(np.flatnonzero(fully_free[s]).tolist())
        return s + self.created, ids


def profile_ids(profile: Profile, t: int) -> frozenset:
    return frozenset(profile.availability_at(t).ids())


def boundary_times(profile: Profile, oracle: TickOracle) -> list[int]:
    """Entry times and their neighbors, clamped to the modeled window."""
    times = set()
    for entry in profile.entries():
        for t in (entry.time - 1, entry.time, entry.time + 1):
            if oracle.created <= t:
                times.add(min(t, oracle.horizon - 1))
    return sorted(times)


def assert_same_availability(profile: Profile, oracle: TickOracle,
                             extra_times: Iterable[int] = ()) -> None:
    for t in boundary_times(profile, oracle):
        assert profile_ids(profile, t) == oracle.free_ids(t), f"mismatch at t={t}"
    for t in extra_times:
        assert profile_ids(profile, t) == oracle.free_ids(t), f"mismatch at t={t}"


def mutate_once(rng: random.Random, profile: Profile,
                oracle: TickOracle) -> None:
    """Apply one random allocate or add_time_slot to both models."""
    c0, hz = oracle.created, oracle.horizon
    start = rng.randrange(c0, hz - 1)
    # keep the last tick untouched: it stands in for the profile's
    # constant tail, which any window ending at the horizon would break
    duration = rng.randint(1, min(60, hz - 1 - start))
    finish = start + duration
    if rng.random() < 0.7:
        free = oracle.window_ids(start, finish)
        if free:
            picked = rng.sample(sorted(free), rng.randint(1, len(free)))
            profile.allocate(ResourceRangeSet.from_ids(picked), start, finish)
            oracle.allocate(picked, start, finish)
            return
    picked = rng.sample(range(oracle.capacity),
                        rng.randint(1, oracle.capacity))
    profile.add_time_slot(start, finish, ResourceRangeSet.from_ids(picked))
    oracle.add(picked, start, finish)


def random_profile(rng: random.Random, capacity: Optional[int] = None,
                   horizon: Optional[int] = None, created: int = 0,
                   ops: Optional[int] = None) -> tuple[Profile, TickOracle]:
    capacity = capacity if capacity is not None else rng.randint(1, 16)
    horizon = horizon if horizon is not None else rng.randint(80, 400)
    profile = Profile(capacity, created)
    oracle = TickOracle(capacity, horizon, created)
    for _ in range(ops if ops is not None else rng.randint(0, 25)):
        mutate_once(rng, profile, oracle)
    return profile, oracle


class BackfillOracle:
    """Per-tick conservative backfilling with first-fit selection.

    Knows nothing about profiles or change points: one bool row per
    tick, linear window scans, lowest-ID selection.  The matrix must be
    sized to cover every start the replay can produce.
    """

    def __init__(self, capacity: int, rows: int) -> None:
        self.capacity = capacity
        self.free = np.ones((rows, capacity), dtype=bool)

    def _window_mask(self, start: int, finish: int) -> np.ndarray:
        assert 0 <= start < finish <= len(self.free)
        return self.free[start:finish].all(axis=0)

    def _take(self, mask: np.ndarray, n_res: int, start: int,
              finish: int) -> frozenset:
        ids = np.flatnonzero(mask)[:n_res]
        self.free[start:finish, ids] = False
        return frozenset(ids.tolist())

    def _earliest_start(self, n_res: int, duration: int, earliest: int,
                        block: int = 2048) -> Optional[int]:
        rows = len(self.free)
        s0 = earliest
        while s0 + duration <= rows:
            seg = self.free[s0:min(s0 + block + duration, rows)]
            nwin = len(seg) - duration + 1
            csum = np.zeros((len(seg) + 1, self.capacity), dtype=np.int64)
            np.cumsum(seg, axis=0, out=csum[1:])
            window = csum[duration:duration + nwin] - csum[:nwin]
            counts = (window == duration).sum(axis=1)
            hits = np.flatnonzero(counts >= n_res)
            if len(hits):
                return s0 + int(hits[0])
            s0 += nwin
        return None

    def submit_request(self, n_res: int, duration: int,
                       clock: int) -> tuple[str, Optional[int], Optional[frozenset]]:
        if n_res < 1 or n_res > self.capacity:
            return "rejected", None, None
        mask = self._window_mask(clock, clock + duration)
        if int(mask.sum()) >= n_res:
            ids = self._take(mask, n_res, clock, clock + duration)
            return "started", clock, ids
        start = self._earliest_start(n_res, duration, clock)
        assert start is not None, "oracle matrix too small for this replay"
        mask = self._window_mask(start, start + duration)
        ids = self._take(mask, n_res, start, start + duration)
        return "queued", start, ids

    def submit_reservation(self, n_res: int, start: int,
                           duration: int) -> tuple[str, Optional[frozenset]]:
        if n_res < 1 or n_res > self.capacity:
            return "rejected", None
        mask = self._window_mask(start, start + duration)
        if int(mask.sum()) < n_res:
            return "rejected", None
        return "accepted", self._take(mask, n_res, start, start + duration)


def random_scenario(rng: random.Random):
    """A mixed arrival sequence plus the oracle matrix size it needs."""
    capacity = rng.randint(1, 16)
    horizon = rng.randint(200, 10_000)
    n_items = rng.randint(100, 300) if rng.random() < 0.08 else rng.randint(5, 60)
    items = []
    total_work = 0
    max_dur = 1
    for i in range(n_items):
        arrival = rng.randint(0, horizon)
        duration = rng.randint(1, 400)
        total_work += duration
        max_dur = max(max_dur, duration)
        if rng.random() < 0.05:
            n_res = capacity + rng.randint(1, 4)  # oversized, must be rejected
        else:
            n_res = rng.randint(1, capacity)
        if rng.random() < 0.25:
            lead = rng.randint(0, 600)
            items.append(("res", i, n_res, duration, arrival, arrival + lead))
        else:
            items.append(("req", i, n_res, duration, arrival, arrival))
    items.sort(key=lambda it: (it[4], it[1]))
    rows = horizon + 600 + total_work + max_dur + 2
    return capacity, rows, items


def replay_and_compare(capacity: int, rows: int, items) -> int:
    """Replay one scenario on scheduler and oracle; returns items checked."""
    from availprof.scheduler import BackfillScheduler, Request, Reservation

    sched = BackfillScheduler(capacity)
    oracle = BackfillOracle(capacity, rows)
    for kind, rid, n_res, duration, arrival, start in items:
        sched.advance(arrival)
        if kind == "req":
            outcome = sched.req_submitted(Request(rid, n_res, duration, arrival))
            want, want_start, want_ids = oracle.submit_request(
                n_res, duration, arrival)
        else:
            outcome, _ = sched.res_submitted(
                Reservation(rid, n_res, start, duration, arrival))
            want, want_ids = oracle.submit_reservation(n_res, start, duration)
            want_start = start if want == "accepted" else None
        assert outcome == want, f"item {rid}: {outcome} != {want}"
        item = sched._items[rid]
        if want in ("started", "queued", "accepted"):
            assert item.start_time == want_start, (
                f"item {rid}: start {item.start_time} != {want_start}")
            assert frozenset(item.ranges.ids()) == want_ids, (
                f"item {rid}: ranges {item.ranges} != {sorted(want_ids)}")
        else:
            assert rid not in sched._assignment_log
    sched.assignment_audit()
    return len(items)
