"""Standard Workload Format ingestion and synthetic workload generation.

SWF is the line-oriented integer format used by the public batch-log
archives: one job per line, `;` starts a comment, and every data line
carries at least 18 whitespace-separated fields.  Only five fields
matter here (1-based): 1 job id, 2 submit time, 4 run time, 5 allocated
processors, 8 requested processors, 9 requested time.  Requested values
win; the measured ones are the fallback when a requested value is
missing (encoded as 0 or -1).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import TraceParseError
from .scheduler import Request

MIN_FIELDS = 18


@dataclass
class SwfTrace:
    """Parsed jobs plus the count of lines dropped by the fallback rules."""

    requests: list[Request]
    skipped: int

    def __len__(self) -> int:
        return len(self.requests)

    def __iter__(self) -> Iterator[Request]:
        return iter(self.requests)

    def __getitem__(self, idx):
        return self.requests[idx]


def parse_swf(path) -> SwfTrace:
    """Read an SWF file into Requests.

    Jobs whose size or duration stays non-positive after the fallbacks
    are skipped and counted, matching how archive headers describe
    cancelled or corrupt entries.  A non-comment line that is too short
    or non-numeric in a used field is a hard error with its line number.
    """
    requests: list[Request] = []
    skipped = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith(";"):
                continue
            fields = stripped.split()
            if len(fields) < MIN_FIELDS:
                raise TraceParseError(
                    f"expected >= {MIN_FIELDS} fields, got {len(fields)}",
                    lineno=lineno)
            try:
                job_id = int(fields[0])
                arrival = int(fields[1])
                run_time = int(fields[3])
                alloc_procs = int(fields[4])
                req_procs = int(fields[7])
                req_time = int(fields[8])
            except ValueError as exc:
                raise TraceParseError(
                    f"non-integer job field: {exc}", lineno=lineno) from None
            duration = req_time if req_time > 0 else run_time
            n_res = req_procs if req_procs > 0 else alloc_procs
            if duration <= 0 or n_res <= 0:
                skipped += 1
                continue
            requests.append(Request(job_id, n_res, duration, arrival))
    return SwfTrace(requests, skipped)


def write_swf(path, requests: Sequence[Request]) -> None:
    """Write Requests as minimal SWF lines (18 fields, unused ones -1)."""
    with open(path, "w") as fh:
        fh.write("; generated workload\n")
        for r in requests:
            fields = [r.id, r.arrival, 0, r.duration, r.n_res, -1, -1,
                      r.n_res, r.duration] + [-1] * 9
            fh.write(" ".join(str(f) for f in fields) + "\n")


def synthetic_workload(n_jobs: int, capacity: int, load: float = 0.95,
                       seed: int = 0) -> list[Request]:
    """Poisson-arrival workload calibrated to an exact offered load.

    Job areas (size x duration) are drawn first; the arrival span is
    then sized so that total work / (span * capacity) equals `load`,
    and exponential gaps are scaled onto that span.  Sizes favor small
    powers of two and durations mix short and long jobs, loosely like
    batch logs from capacity-scheduled clusters.
    """
    if not 0 < load:
        raise ValueError("load must be positive")
    rng = random.Random(seed)
    sizes = []
    powers = [1 << k for k in range((capacity).bit_length()) if 1 << k <= capacity]
    for _ in range(n_jobs):
        if rng.random() < 0.75:
            sizes.append(min(rng.choice(powers), capacity))
        else:
            sizes.append(rng.randint(1, capacity))
    durations = []
    for _ in range(n_jobs):
        u = rng.random()
        if u < 0.4:
            durations.append(rng.randint(60, 600))
        elif u < 0.8:
            durations.append(rng.randint(600, 7_200))
        else:
            durations.append(rng.randint(7_200, 43_200))
    total_work = sum(s * d for s, d in zip(sizes, durations))
    span = total_work / (load * capacity)
    gaps = [rng.expovariate(1.0) for _ in range(n_jobs)]
    scale = span / sum(gaps)
    requests = []
    clock = 0.0
    for i, (size, duration) in enumerate(zip(sizes, durations), start=1):
        clock += gaps[i - 1] * scale
        requests.append(Request(i, size, duration, int(clock)))
    return requests
