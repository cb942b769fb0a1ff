"""Trace-replay simulator: feed a batch log through the scheduler and
measure how much of the availability profile each admission call walks.

Every check/find call reports (visited, worst); the simulator logs them
per operation kind in call order, drops a warmup/cooldown prefix and
suffix from the aggregates, and writes plain CSV for external plotting.
Replay is fully deterministic for a given trace, flag set, and seed, so
two runs produce byte-identical CSV files.  Wall-clock runtime is
reported on stdout only and never written to a CSV.
"""

from __future__ import annotations

import argparse
import heapq
import os
import random
import statistics
import sys
import time
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Union

from .errors import TraceParseError
from .profile import OpCost
from .scheduler import (
    BackfillScheduler,
    DecisionRecord,
    Request,
    Reservation,
)
from .swf import parse_swf

COMPLETION, ARRIVAL, RESERVATION_ARRIVAL = 0, 1, 2
PRUNE_INTERVAL = 10_000  # events between profile prunes; memory bound only


class OpStats(NamedTuple):
    """One instrumented admission call."""

    op: str
    index: int
    visited: int
    worst: int
    ratio: Optional[float]  # None when worst == 0 (no list work possible)
    non_visited: int


@dataclass
class SimConfig:
    trace: Union[str, os.PathLike]
    capacity: int
    reservation_fraction: float = 0.0
    lead_min: int = 3_600
    lead_max: int = 86_400
    seed: int = 1
    exclude: int = 4_000
    out_dir: Union[str, os.PathLike] = "."
    max_jobs: Optional[int] = None
    histogram_bin: int = 1

    def validate(self) -> None:
        if self.capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {self.capacity}")
        if not 0.0 <= self.reservation_fraction <= 1.0:
            raise ValueError(
                f"reservation fraction must be in [0, 1], "
                f"got {self.reservation_fraction}")
        if not 1 <= self.lead_min <= self.lead_max:
            raise ValueError(
                f"lead window [{self.lead_min}, {self.lead_max}] is invalid")
        if self.exclude < 0:
            raise ValueError(f"exclude must be >= 0, got {self.exclude}")
        if self.max_jobs is not None and self.max_jobs < 0:
            raise ValueError(f"max-jobs must be >= 0, got {self.max_jobs}")
        if self.histogram_bin < 1:
            raise ValueError(
                f"histogram bin width must be >= 1, got {self.histogram_bin}")


@dataclass
class SimReport:
    capacity: int
    jobs: int
    skipped: int
    events: int
    runtime_seconds: float
    exclude: int
    histogram_bin: int
    calls: dict[str, list[OpStats]] = field(default_factory=dict)
    tallies: dict[str, int] = field(default_factory=dict)
    decisions: list[DecisionRecord] = field(default_factory=list)

    def included(self, op: str) -> list[OpStats]:
        """Calls counted by aggregates: trim warmup/cooldown, drop worst=0."""
        seq = self.calls.get(op, [])
        stop = len(seq) - self.exclude
        trimmed = seq[self.exclude:stop] if stop > self.exclude else []
        return [c for c in trimmed if c.worst > 0]

    def ratio_stats(self, op: str) -> Optional[dict[str, float]]:
        ratios = [c.ratio for c in self.included(op)]
        if not ratios:
            return None
        if len(ratios) == 1:
            v = ratios[0]
            return {"mean": v, "median": v, "q1": v, "q3": v}
        q1, median, q3 = statistics.quantiles(ratios, n=4, method="inclusive")
        return {"mean": statistics.fmean(ratios), "median": median,
                "q1": q1, "q3": q3}

    def histogram(self, op: str = "check") -> list[tuple[int, int, int]]:
        """(bin_start, bin_end, count) over included non-visited counts."""
        width = self.histogram_bin
        bins: dict[int, int] = {}
        for c in self.included(op):
            k = c.non_visited // width
            bins[k] = bins.get(k, 0) + 1
        return [(k * width, (k + 1) * width, bins[k]) for k in sorted(bins)]


def inject_reservations(requests: Sequence[Request], fraction: float,
                        lead_range: tuple[int, int],
                        seed: int) -> list[Union[Request, Reservation]]:
    """Convert floor(fraction*N) requests into advance reservations.

    Selection and lead times come from one seeded generator, so the
    same inputs always produce the same mixed workload.  Converted items
    keep their position, id, size, and duration; the reserved window
    starts `lead` seconds after the original arrival.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must be in [0, 1], got {fraction}")
    lead_min, lead_max = lead_range
    items: list[Union[Request, Reservation]] = list(requests)
    count = int(fraction * len(items))
    if count == 0:
        return items
    rng = random.Random(seed)
    for idx in sorted(rng.sample(range(len(items)), count)):
        r = items[idx]
        lead = rng.randint(lead_min, lead_max)
        items[idx] = Reservation(r.id, r.n_res, r.arrival + lead,
                                 r.duration, r.arrival)
    return items


def run(config: SimConfig) -> SimReport:
    """Replay the configured trace and collect per-call instrumentation."""
    config.validate()
    trace = parse_swf(config.trace)
    requests = list(trace)
    if config.max_jobs is not None:
        requests = requests[:config.max_jobs]
    workload = inject_reservations(
        requests, config.reservation_fraction,
        (config.lead_min, config.lead_max), config.seed)

    items: dict[int, Union[Request, Reservation]] = {}
    heap: list[tuple[int, int, int]] = []
    for item in workload:
        if item.id in items:
            raise TraceParseError(f"duplicate job id {item.id} in trace")
        if item.arrival < 0:
            raise TraceParseError(f"negative arrival for job {item.id}")
        items[item.id] = item
        kind = RESERVATION_ARRIVAL if isinstance(item, Reservation) else ARRIVAL
        heapq.heappush(heap, (item.arrival, kind, item.id))

    scheduler = BackfillScheduler(config.capacity)
    calls: dict[str, list[OpStats]] = {"check": [], "schedule": []}

    def hook(cost: OpCost) -> None:
        seq = calls[cost.op]
        ratio = cost.visited / cost.worst if cost.worst > 0 else None
        seq.append(OpStats(cost.op, len(seq), cost.visited, cost.worst,
                           ratio, cost.worst - cost.visited))

    scheduler.profile.cost_hook = hook
    started_at = time.perf_counter()
    processed = 0
    while heap:
        t, kind, rid = heapq.heappop(heap)
        scheduler.advance(t)
        item = items[rid]
        if kind == COMPLETION:
            scheduler.on_completion(rid)
        elif kind == ARRIVAL:
            if scheduler.req_submitted(item) != "rejected":
                heapq.heappush(heap, (item.finish_time, COMPLETION, rid))
        else:
            outcome, _ = scheduler.res_submitted(item)
            if outcome == "accepted":
                heapq.heappush(heap, (item.finish_time, COMPLETION, rid))
        processed += 1
        if processed % PRUNE_INTERVAL == 0:
            scheduler.prune()
    runtime = time.perf_counter() - started_at

    return SimReport(
        capacity=config.capacity,
        jobs=len(workload),
        skipped=trace.skipped,
        events=processed,
        runtime_seconds=runtime,
        exclude=config.exclude,
        histogram_bin=config.histogram_bin,
        calls=calls,
        tallies={
            "started": scheduler.started,
            "queued": scheduler.queued,
            "accepted": scheduler.accepted,
            "rejected": scheduler.rejected,
            "completed": scheduler.completed,
        },
        decisions=scheduler.decisions,
    )


def emit_metrics(report: SimReport, out_dir) -> dict[str, str]:
    """Write calls/summary/histogram/decisions CSVs; returns their paths.

    An empty report produces header-only files.  Values are plain
    integers or repr'd floats, so identical reports serialize to
    identical bytes.
    """
    import csv

    os.makedirs(out_dir, exist_ok=True)
    paths = {name: os.path.join(out_dir, f"{name}.csv")
             for name in ("calls", "summary", "histogram", "decisions")}

    with open(paths["calls"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["opKind", "callIndex", "visited", "worst", "ratio",
                    "nonVisited"])
        for op in ("check", "schedule"):
            for c in report.calls.get(op, []):
                w.writerow([c.op, c.index, c.visited, c.worst,
                            "" if c.ratio is None else repr(c.ratio),
                            c.non_visited])

    with open(paths["summary"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["section", "name", "value"])
        for op in ("check", "schedule"):
            seq = report.calls.get(op, [])
            if not seq:
                continue
            w.writerow([op, "calls_total", len(seq)])
            w.writerow([op, "calls_included", len(report.included(op))])
            stats = report.ratio_stats(op)
            if stats:
                for name in ("mean", "median", "q1", "q3"):
                    w.writerow([op, f"ratio_{name}", repr(stats[name])])
        if report.jobs or report.skipped:
            w.writerow(["trace", "jobs", report.jobs])
            w.writerow(["trace", "skipped", report.skipped])
            w.writerow(["events", "processed", report.events])
            for name, value in report.tallies.items():
                w.writerow(["tallies", name, value])

    with open(paths["histogram"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["binStart", "binEnd", "count"])
        for lo, hi, count in report.histogram("check"):
            w.writerow([lo, hi, count])

    with open(paths["decisions"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "type", "arrival", "nRes", "duration", "decision",
                    "start", "ranges"])
        for d in report.decisions:
            w.writerow([d.id, d.type, d.arrival, d.n_res, d.duration,
                        d.decision, "" if d.start is None else d.start,
                        d.ranges_text])
    return paths


class _CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); config errors are 1
        raise _CliError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="simulate",
                description="Replay a batch trace through the conservative-"
                            "backfilling scheduler and report per-call "
                            "profile-walk instrumentation.")
    p.add_argument("--trace", required=True, help="SWF trace file")
    p.add_argument("--capacity", type=int, required=True,
                   help="number of schedulable resources")
    p.add_argument("--reservation-fraction", type=float, default=0.0,
                   help="fraction of jobs converted to advance reservations")
    p.add_argument("--lead-min", type=int, default=3_600,
                   help="minimum reservation lead time in seconds")
    p.add_argument("--lead-max", type=int, default=86_400,
                   help="maximum reservation lead time in seconds")
    p.add_argument("--seed", type=int, default=1,
                   help="seed for reservation injection")
    p.add_argument("--exclude", type=int, default=4_000,
                   help="warmup/cooldown calls dropped per operation kind")
    p.add_argument("--out-dir", default=".", help="directory for CSV output")
    p.add_argument("--max-jobs", type=int, default=None,
                   help="replay only the first N jobs")
    p.add_argument("--histogram-bin", type=int, default=1,
                   help="bin width of the non-visited histogram")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = SimConfig(
            trace=args.trace,
            capacity=args.capacity,
            reservation_fraction=args.reservation_fraction,
            lead_min=args.lead_min,
            lead_max=args.lead_max,
            seed=args.seed,
            exclude=args.exclude,
            out_dir=args.out_dir,
            max_jobs=args.max_jobs,
            histogram_bin=args.histogram_bin,
        )
        config.validate()
    except (_CliError, ValueError) as exc:
        print(f"simulate: {exc}", file=sys.stderr)
        return 1
    try:
        report = run(config)
    except TraceParseError as exc:
        where = f" at line {exc.lineno}" if exc.lineno else ""
        print(f"simulate: {config.trace}{where}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"simulate: {exc}", file=sys.stderr)
        return 2
    paths = emit_metrics(report, config.out_dir)
    print(f"jobs={report.jobs} skipped={report.skipped} "
          f"events={report.events}")
    for op in ("check", "schedule"):
        stats = report.ratio_stats(op)
        total = len(report.calls.get(op, []))
        included = len(report.included(op))
        if stats:
            print(f"{op}: calls={total} included={included} "
                  f"mean_ratio={stats['mean']:.4f} "
                  f"median_ratio={stats['median']:.4f}")
        else:
            print(f"{op}: calls={total} included={included}")
    print("tallies: " + " ".join(
        f"{k}={v}" for k, v in report.tallies.items()))
    print("outputs: " + " ".join(sorted(paths.values())))
    print(f"runtime: {report.runtime_seconds:.2f}s")
    return 0


def cli() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    cli()
