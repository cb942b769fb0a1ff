import csv
import random

import pytest

from availprof.errors import (
    DuplicateRequestError,
    NotFoundError,
    StaleReservationError,
)
from availprof.profile import TimeSlot
from availprof.ranges import ResourceRangeSet
from availprof.scheduler import BackfillScheduler, Request, Reservation

from support import BackfillOracle, random_scenario, replay_and_compare


def rs(text):
    return ResourceRangeSet.from_text(text)


def test_empty_system_starts_immediately():
    s = BackfillScheduler(8)
    assert s.req_submitted(Request(1, 4, 100, 0)) == "started"
    r = s._items[1]
    assert r.start_time == 0
    assert r.ranges == rs("0-3")
    assert s.started == 1 and s.queued == 0


def test_saturated_system_queues_at_earliest_start():
    s = BackfillScheduler(4)
    s.req_submitted(Request(1, 4, 100, 0))
    s.advance(10)
    assert s.req_submitted(Request(2, 2, 50, 10)) == "queued"
    r = s._items[2]
    assert r.start_time == 100
    assert r.ranges == rs("0-1")


def test_backfill_into_hole():
    s = BackfillScheduler(4)
    s.req_submitted(Request(1, 4, 100, 0))       # runs [0, 100)
    s.req_submitted(Request(2, 4, 100, 0))       # queued [100, 200)
    # a small short job fits before neither big one; it must wait,
    # but a later gap-sized job backfills without delaying anyone
    s.advance(5)
    assert s.req_submitted(Request(3, 1, 20, 5)) == "queued"
    assert s._items[3].start_time == 200


def test_oversized_request_recorded_not_raised():
    s = BackfillScheduler(4)
    assert s.req_submitted(Request(1, 5, 10, 0)) == "rejected"
    assert s.rejected == 1
    assert s._items[1].start_time is None
    assert s.decisions[-1].decision == "rejected"


def test_request_arrival_must_match_clock():
    s = BackfillScheduler(4)
    with pytest.raises(ValueError):
        s.req_submitted(Request(1, 1, 10, 5))


def test_clock_cannot_move_backwards():
    s = BackfillScheduler(4)
    s.advance(10)
    with pytest.raises(ValueError):
        s.advance(9)


def test_duplicate_id_rejected():
    s = BackfillScheduler(4)
    s.req_submitted(Request(1, 1, 10, 0))
    with pytest.raises(DuplicateRequestError):
        s.req_submitted(Request(1, 1, 10, 0))


def test_queued_iff_clock_check_rejects():
    rng = random.Random(7401)
    s = BackfillScheduler(8)
    clock = 0
    for i in range(300):
        clock += rng.randint(0, 30)
        s.advance(clock)
        n, dur = rng.randint(1, 8), rng.randint(1, 120)
        fits_now = s.profile.check_availability(n, clock, dur) is not None
        outcome = s.req_submitted(Request(i, n, dur, clock))
        assert outcome == ("started" if fits_now else "queued")


def test_reservation_accepted_updates_profile():
    s = BackfillScheduler(6)
    outcome, options = s.res_submitted(Reservation(1, 4, 100, 50, 0))
    assert outcome == "accepted" and options == []
    assert s._items[1].ranges == rs("0-3")
    assert s.profile.availability_at(100) == rs("4-5")
    assert s.profile.availability_at(150) == rs("0-5")


def test_reservation_rejection_is_all_or_nothing():
    s = BackfillScheduler(4, options_horizon=500)
    s.req_submitted(Request(1, 3, 200, 0))
    before = s.profile.snapshot()
    outcome, options = s.res_submitted(Reservation(2, 2, 100, 50, 0))
    assert outcome == "rejected"
    assert s.profile.snapshot() == before
    # the profile can hold 2 resources from t=200; options must say so
    assert options
    assert all(o.ranges.count >= 2 and o.duration >= 50 for o in options)
    assert min(o.start for o in options) == 200


def test_reservation_options_window_and_filter():
    s = BackfillScheduler(4, options_horizon=300)
    s.req_submitted(Request(1, 3, 200, 0))
    outcome, options = s.res_submitted(Reservation(2, 4, 10, 100, 0))
    assert outcome == "rejected"
    assert options == [TimeSlot(200, 310, rs("0-3"))]


def test_reservation_options_empty_iff_infeasible():
    rng = random.Random(7402)
    for _ in range(200):
        capacity = rng.randint(1, 8)
        s = BackfillScheduler(capacity, options_horizon=rng.randint(50, 800))
        oracle = BackfillOracle(capacity, 12_000)
        clock = 0
        for i in range(rng.randint(1, 25)):
            clock += rng.randint(0, 40)
            s.advance(clock)
            n, dur = rng.randint(1, capacity), rng.randint(1, 100)
            lead = rng.randint(0, 200)
            if rng.random() < 0.5:
                outcome = s.req_submitted(Request(i, n, dur, clock))
                got = s._items[i]
                if outcome != "rejected":
                    oracle.free[got.start_time:got.start_time + dur,
                                sorted(got.ranges.ids())] = False
            else:
                outcome, options = s.res_submitted(
                    Reservation(i, n, clock + lead, dur, clock))
                if outcome == "accepted":
                    got = s._items[i]
                    oracle.free[got.start_time:got.start_time + dur,
                                sorted(got.ranges.ids())] = False
                else:
                    start = clock + lead
                    best = oracle._earliest_start(n, dur, start)
                    feasible = (best is not None
                                and best + dur <= start + s.options_horizon)
                    assert bool(options) == feasible


def test_stale_reservation_raises():
    s = BackfillScheduler(4)
    s.advance(100)
    with pytest.raises(StaleReservationError):
        s.res_submitted(Reservation(1, 1, 99, 10, 100))


def test_completion_round_trip():
    s = BackfillScheduler(4)
    s.req_submitted(Request(1, 4, 50, 0))
    s.advance(50)
    s.on_completion(1)
    assert s.completed == 1
    assert s.profile.availability_at(50) == rs("0-3")
    with pytest.raises(DuplicateRequestError):
        s.on_completion(1)
    with pytest.raises(NotFoundError):
        s.on_completion(99)


def test_completion_outside_window_raises():
    s = BackfillScheduler(4)
    s.req_submitted(Request(1, 2, 50, 0))
    s.advance(60)
    with pytest.raises(ValueError):
        s.on_completion(1)


def test_identical_requests_keep_submission_order():
    rng = random.Random(7403)
    for _ in range(60):
        capacity = rng.randint(1, 8)
        s = BackfillScheduler(capacity)
        clock = 0
        shapes = [(rng.randint(1, capacity), rng.randint(1, 60))
                  for _ in range(3)]
        by_shape = {}
        for i in range(40):
            clock += rng.randint(0, 15)
            s.advance(clock)
            n, dur = rng.choice(shapes)
            if s.req_submitted(Request(i, n, dur, clock)) != "rejected":
                by_shape.setdefault((n, dur), []).append(
                    s._items[i].start_time)
        for starts in by_shape.values():
            assert starts == sorted(starts)


def test_no_overallocation_at_any_entry():
    rng = random.Random(7404)
    for _ in range(40):
        capacity, rows, items = random_scenario(rng)
        s = BackfillScheduler(capacity)
        for kind, rid, n, dur, arrival, start in items:
            s.advance(arrival)
            if kind == "req":
                s.req_submitted(Request(rid, n, dur, arrival))
            else:
                s.res_submitted(Reservation(rid, n, start, dur, arrival))
        assigned = [it for it in s._items.values() if it.ranges is not None]
        for entry in s.profile.entries():
            live = sum(it.n_res for it in assigned
                       if it.start_time <= entry.time < it.finish_time)
            assert live + entry.nRes == capacity


def test_replay_matches_per_tick_oracle():
    rng = random.Random(7405)
    for _ in range(150):
        capacity, rows, items = random_scenario(rng)
        replay_and_compare(capacity, rows, items)


def test_decision_csv_format(tmp_path):
    s = BackfillScheduler(4)
    s.req_submitted(Request(1, 2, 50, 0))
    s.req_submitted(Request(2, 5, 50, 0))
    s.res_submitted(Reservation(3, 2, 30, 20, 0))
    path = tmp_path / "decisions.csv"
    s.write_decisions(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["id", "type", "arrival", "nRes", "duration",
                       "decision", "start", "ranges"]
    assert rows[1] == ["1", "request", "0", "2", "50", "started", "0", "0-1"]
    assert rows[2] == ["2", "request", "0", "5", "50", "rejected", "", ""]
    assert rows[3] == ["3", "reservation", "0", "2", "20", "accepted", "30",
                       "2-3"]


def test_prune_keeps_future_behavior():
    s = BackfillScheduler(4)
    s.req_submitted(Request(1, 2, 50, 0))
    s.advance(60)
    s.req_submitted(Request(2, 2, 50, 60))
    s.advance(200)
    removed = s.prune()
    assert removed >= 1
    assert s.profile.availability_at(200) == rs("0-3")
    s.req_submitted(Request(3, 4, 10, 200))
    assert s._items[3].start_time == 200
