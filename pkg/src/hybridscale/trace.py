"""Workload trace loading, saving, and synthetic generation.

Two CSV schemas are accepted, auto-detected by header:
  arrival_ms,function_id          one request per row
  minute,function_id,count        per-minute counts, expanded on load
Per-minute counts expand to uniformly spaced arrivals within the minute
(deterministic); Poisson expansion is available behind a flag.
"""

from __future__ import annotations

import csv
import logging
import random
from dataclasses import dataclass, field

from .errors import TraceFormatError

logger = logging.getLogger(__name__)

ARRIVAL_HEADER = ["arrival_ms", "function_id"]
MINUTE_HEADER = ["minute", "function_id", "count"]
MINUTE_MS = 60_000.0
_HORIZON_TAG = "# horizon_ms="


@dataclass
class WorkloadTrace:
    """Time-ordered request arrivals plus the replay horizon."""

    entries: list[tuple[float, str]] = field(default_factory=list)
    horizon_ms: float = 0.0

    def __post_init__(self):
        last = 0.0
        for t, _ in self.entries:
            if t < 0:
                raise TraceFormatError(f"negative arrival time {t}")
            if t < last:
                raise TraceFormatError("arrival times must be non-decreasing")
            last = t
        if self.entries:
            self.horizon_ms = max(self.horizon_ms, self.entries[-1][0])

    def __len__(self):
        return len(self.entries)

    def function_ids(self) -> list[str]:
        return sorted({fid for _, fid in self.entries})


def load_trace(path) -> WorkloadTrace:
    """Parses either trace schema; sorts (with a warning) if needed."""
    with open(path, newline="", encoding="utf-8") as fh:
        horizon = 0.0
        rows = []
        for raw in fh:
            line = raw.rstrip("\n")
            if line.startswith(_HORIZON_TAG):
                horizon = float(line[len(_HORIZON_TAG):])
                continue
            rows.append(line)
    if not rows or (len(rows) == 1 and not rows[0].strip()):
        return WorkloadTrace([], horizon)
    reader = csv.reader(rows)
    header = [h.strip() for h in next(reader)]
    if header == ARRIVAL_HEADER:
        entries = _parse_arrival_rows(reader, path)
    elif header == MINUTE_HEADER:
        entries = _parse_minute_rows(reader, path)
    else:
        raise TraceFormatError(
            f"{path}: unknown header {header}; expected {ARRIVAL_HEADER} or {MINUTE_HEADER}")
    if any(entries[i][0] > entries[i + 1][0] for i in range(len(entries) - 1)):
        logger.warning("%s: arrivals out of order, sorting", path)
        entries.sort(key=lambda e: e[0])
    return WorkloadTrace(entries, horizon)


def _parse_arrival_rows(reader, path):
    entries = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            t = float(row[0])
            fid = row[1].strip()
        except (IndexError, ValueError) as exc:
            raise TraceFormatError(f"{path} line {lineno}: {exc}") from exc
        if t < 0:
            raise TraceFormatError(f"{path} line {lineno}: negative arrival {t}")
        entries.append((t, fid))
    return entries


def _parse_minute_rows(reader, path):
    entries = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            minute = int(row[0])
            fid = row[1].strip()
            count = int(row[2])
        except (IndexError, ValueError) as exc:
            raise TraceFormatError(f"{path} line {lineno}: {exc}") from exc
        if minute < 0:
            raise TraceFormatError(f"{path} line {lineno}: negative minute {minute}")
        if count < 0:
            raise TraceFormatError(f"{path} line {lineno}: negative count {count}")
        base = minute * MINUTE_MS
        spacing = MINUTE_MS / count if count else 0.0
        entries.extend((base + i * spacing, fid) for i in range(count))
    entries.sort(key=lambda e: e[0])
    return entries


def save_trace(trace: WorkloadTrace, path) -> None:
    """Writes the per-arrival schema; load_trace(save_trace(t)) == t."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"{_HORIZON_TAG}{trace.horizon_ms!r}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ARRIVAL_HEADER)
        for t, fid in trace.entries:
            writer.writerow([repr(float(t)), fid])


def merge_traces(traces: list[WorkloadTrace]) -> WorkloadTrace:
    entries = sorted((e for t in traces for e in t.entries), key=lambda e: (e[0], e[1]))
    horizon = max((t.horizon_ms for t in traces), default=0.0)
    return WorkloadTrace(entries, horizon)


# -- synthetic workloads -----------------------------------------------


def synth_trace(kind: str, params: dict, seed: int, *, function_id: str = "f0",
                horizon_ms: float = 60_000.0) -> WorkloadTrace:
    """Deterministic synthetic workload.

    kinds: poisson(rate), step(low, high, period_ms), burst(base, spike,
    spike_prob). Rates are requests per second; rate 0 yields no arrivals.
    """
    rng = random.Random(seed)
    if horizon_ms <= 0:
        raise TraceFormatError(f"horizon_ms must be positive, got {horizon_ms}")
    if kind == "poisson":
        rate = _rate(params, "rate")
        entries = _poisson_segment(rng, rate, 0.0, horizon_ms, function_id)
    elif kind == "step":
        low = _rate(params, "low")
        high = _rate(params, "high")
        period = float(params.get("period_ms", 60_000.0))
        if period <= 0:
            raise TraceFormatError("step period_ms must be positive")
        entries = []
        t = 0.0
        level_low = True
        while t < horizon_ms:
            end = min(t + period, horizon_ms)
            entries.extend(_poisson_segment(
                rng, low if level_low else high, t, end, function_id))
            t = end
            level_low = not level_low
    elif kind == "burst":
        base = _rate(params, "base")
        spike = _rate(params, "spike")
        prob = float(params.get("spike_prob", 0.1))
        if not 0 <= prob <= 1:
            raise TraceFormatError(f"spike_prob {prob} outside [0, 1]")
        entries = []
        t = 0.0
        while t < horizon_ms:  # re-draw the rate second by second
            end = min(t + 1000.0, horizon_ms)
            rate = spike if rng.random() < prob else base
            entries.extend(_poisson_segment(rng, rate, t, end, function_id))
            t = end
    else:
        raise TraceFormatError(f"unknown synthetic trace kind {kind!r}")
    return WorkloadTrace(entries, horizon_ms)


def _rate(params: dict, key: str) -> float:
    value = float(params.get(key, 0.0))
    if value < 0:
        raise TraceFormatError(f"{key} must be non-negative, got {value}")
    return value


def _poisson_segment(rng, rate_rps, t0, t1, function_id):
    """Poisson arrivals on [t0, t1) via exponential inter-arrival gaps."""
    if rate_rps <= 0:
        return []
    entries = []
    t = t0 + rng.expovariate(rate_rps / 1000.0)
    while t < t1:
        entries.append((t, function_id))
        t += rng.expovariate(rate_rps / 1000.0)
    return entries
