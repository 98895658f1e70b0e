"""Table-backed latency predictor for (batch, sm, quota) configurations.

Stands in for a learned performance model behind a deterministic interface:
a rectangular sample grid plus trilinear interpolation. Tables must be
monotone (latency never drops when batch grows, never rises when sm or
quota grow); violations are rejected at load rather than repaired.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Optional, Protocol, Sequence, runtime_checkable

import numpy as np

from ._kernels import interp3
from .errors import TableFormatError

TABLE_HEADER = ["function_id", "batch", "sm_percent", "quota_percent", "latency_ms"]


@runtime_checkable
class PerfModel(Protocol):
    """Deterministic latency predictor contract used by the autoscaler."""

    def predict_latency(self, batch: float, sm_percent: float, quota_percent: float) -> float:
        ...

    def throughput(self, batch: float, sm_percent: float, quota_percent: float) -> float:
        ...


@dataclass
class TableIssue:
    """One validation finding, with the offending grid coordinates."""

    kind: str  # duplicate | missing | non_positive | monotonicity
    message: str
    coord: Optional[tuple] = None


@dataclass
class TableReport:
    function_id: str
    batches: list[int] = field(default_factory=list)
    sms: list[int] = field(default_factory=list)
    quotas: list[int] = field(default_factory=list)
    issues: list[TableIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues


class PerfTable:
    """Immutable sampled latency grid for one function."""

    def __init__(self, function_id: str, batches: Sequence[int], sms: Sequence[int],
                 quotas: Sequence[int], latency_ms: np.ndarray):
        self.function_id = function_id
        self.batches = [int(b) for b in batches]
        self.sms = [int(s) for s in sms]
        self.quotas = [int(q) for q in quotas]
        lat = np.ascontiguousarray(latency_ms, dtype=np.float64)
        expected = (len(self.batches), len(self.sms), len(self.quotas))
        if lat.shape != expected:
            raise TableFormatError(
                f"{function_id}: latency grid shape {lat.shape} != axes {expected}")
        self.latency_ms = lat
        self._b_axis = np.asarray(self.batches, dtype=np.float64)
        self._s_axis = np.asarray(self.sms, dtype=np.float64)
        self._q_axis = np.asarray(self.quotas, dtype=np.float64)
        issues = _validate_grid(function_id, self.batches, self.sms, self.quotas, lat)
        if issues:
            raise TableFormatError(f"{function_id}: {issues[0].message}")

    # -- predictions --------------------------------------------------

    def predict_latency(self, batch: float, sm_percent: float, quota_percent: float) -> float:
        """Interpolated latency in ms; exact at grid nodes.

        sm/quota clamp to the sampled range; batch outside its axis range
        is an error (extrapolating batch is never meaningful).
        """
        if not self.batches:
            raise TableFormatError(f"{self.function_id}: empty table")
        if batch < self.batches[0] or batch > self.batches[-1]:
            raise ValueError(
                f"{self.function_id}: batch {batch} outside table range "
                f"[{self.batches[0]}, {self.batches[-1]}]")
        return interp3(self._b_axis, self._s_axis, self._q_axis, self.latency_ms,
                       float(batch), float(sm_percent), float(quota_percent))

    def throughput(self, batch: float, sm_percent: float, quota_percent: float) -> float:
        """Requests per second: batch / latency-in-seconds."""
        latency_ms = self.predict_latency(batch, sm_percent, quota_percent)
        return batch / (latency_ms / 1000.0)

    def max_quota_capability(self, batch: float, sm_percent: float, quota_cap: float) -> float:
        """Throughput at the largest quota this placement could hold."""
        return self.throughput(batch, sm_percent, quota_cap)

    def most_efficient_config(self, target_rps: float, *, quota_step: int = 10,
                              batches: Optional[Iterable[int]] = None,
                              ) -> tuple[int, int, int]:
        """Cheapest (batch, sm, quota) whose throughput covers target_rps.

        Searches the table's batch/sm axes (batch optionally restricted)
        with quota stepped by quota_step; cost density is sm * quota.
        Ties break toward smaller sm, then quota, then batch. If no lattice
        point reaches the target, returns the maximum-throughput one.
        """
        if target_rps <= 0:
            raise ValueError("target_rps must be positive")
        if not 1 <= quota_step <= 100:
            raise ValueError("quota_step must be in [1, 100]")
        batch_candidates = self._batch_lattice(batches)
        quota_candidates = list(range(quota_step, 101, quota_step))

        best_meeting = None  # ((cost, sm, quota, batch), config)
        best_overall = None  # ((-rps, cost, sm, quota, batch), config)
        for b in batch_candidates:
            for s in self.sms:
                for q in quota_candidates:
                    rps = self.throughput(b, s, q)
                    cost = s * q
                    config = (b, s, q)
                    overall_key = (-rps, cost, s, q, b)
                    if best_overall is None or overall_key < best_overall[0]:
                        best_overall = (overall_key, config)
                    if rps >= target_rps:
                        meet_key = (cost, s, q, b)
                        if best_meeting is None or meet_key < best_meeting[0]:
                            best_meeting = (meet_key, config)
        if best_meeting is not None:
            return best_meeting[1]
        return best_overall[1]

    def _batch_lattice(self, batches: Optional[Iterable[int]]) -> list[int]:
        if batches is None:
            return list(self.batches)
        lo, hi = self.batches[0], self.batches[-1]
        usable = sorted({int(b) for b in batches if lo <= b <= hi})
        return usable or list(self.batches)

    def __repr__(self):
        return (f"PerfTable({self.function_id!r}, batches={self.batches}, "
                f"sms={self.sms}, quotas={self.quotas})")


# -- loading and validation -------------------------------------------


def load_table(path) -> PerfTable:
    """Loads and validates a perf-table CSV; raises TableFormatError."""
    function_id, samples, issues = _read_samples(path)
    if issues:
        raise TableFormatError(f"{path}: {issues[0].message}")
    report, table = _build_table(function_id, samples)
    if not report.ok:
        raise TableFormatError(f"{path}: {report.issues[0].message}")
    assert table is not None
    return table


def validate_table_file(path) -> TableReport:
    """Full validation scan for the CLI: collects every issue found."""
    function_id, samples, issues = _read_samples(path)
    if issues:
        return TableReport(function_id=function_id or "?", issues=issues)
    report, _ = _build_table(function_id, samples)
    return report


def _read_samples(path):
    """Parses CSV rows into {(batch, sm, quota): latency}; checks duplicates."""
    samples: dict[tuple[int, int, int], float] = {}
    issues: list[TableIssue] = []
    function_id = ""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != TABLE_HEADER:
            issues.append(TableIssue("format", f"bad header {header}, expected {TABLE_HEADER}"))
            return function_id, samples, issues
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                fid = row[0].strip()
                coord = (int(row[1]), int(row[2]), int(row[3]))
                latency = float(row[4])
            except (IndexError, ValueError) as exc:
                issues.append(TableIssue("format", f"line {lineno}: {exc}"))
                continue
            if not function_id:
                function_id = fid
            elif fid != function_id:
                issues.append(TableIssue(
                    "format", f"line {lineno}: mixed function ids {fid!r} vs {function_id!r}"))
                continue
            if coord in samples:
                issues.append(TableIssue(
                    "duplicate", f"duplicate sample at batch={coord[0]} "
                    f"sm={coord[1]} quota={coord[2]}", coord))
                continue
            samples[coord] = latency
    if not samples and not issues:
        issues.append(TableIssue("format", "empty table"))
    return function_id, samples, issues


def _build_table(function_id, samples):
    batches = sorted({c[0] for c in samples})
    sms = sorted({c[1] for c in samples})
    quotas = sorted({c[2] for c in samples})
    report = TableReport(function_id, batches, sms, quotas)

    grid = np.zeros((len(batches), len(sms), len(quotas)), dtype=np.float64)
    for bi, b in enumerate(batches):
        for si, s in enumerate(sms):
            for qi, q in enumerate(quotas):
                value = samples.get((b, s, q))
                if value is None:
                    report.issues.append(TableIssue(
                        "missing", f"missing grid cell batch={b} sm={s} quota={q}",
                        (b, s, q)))
                else:
                    grid[bi, si, qi] = value

    report.issues.extend(_validate_grid(function_id, batches, sms, quotas, grid,
                                        skip_shape=bool(report.issues)))
    if not report.ok:
        return report, None
    return report, PerfTable(function_id, batches, sms, quotas, grid)


def _validate_grid(function_id, batches, sms, quotas, grid, skip_shape=False):
    """Positivity plus per-axis monotonicity; returns issues with coordinates."""
    issues: list[TableIssue] = []
    if skip_shape:
        return issues
    for bi, b in enumerate(batches):
        for si, s in enumerate(sms):
            for qi, q in enumerate(quotas):
                v = grid[bi, si, qi]
                if v <= 0:
                    issues.append(TableIssue(
                        "non_positive",
                        f"latency {v} <= 0 at batch={b} sm={s} quota={q}", (b, s, q)))
                if bi > 0 and grid[bi - 1, si, qi] > v:
                    issues.append(TableIssue(
                        "monotonicity",
                        f"latency decreases along batch at batch={b} sm={s} quota={q} "
                        f"({grid[bi - 1, si, qi]} -> {v})", (b, s, q)))
                if si > 0 and grid[bi, si - 1, qi] < v:
                    issues.append(TableIssue(
                        "monotonicity",
                        f"latency increases along sm at batch={b} sm={s} quota={q} "
                        f"({grid[bi, si - 1, qi]} -> {v})", (b, s, q)))
                if qi > 0 and grid[bi, si, qi - 1] < v:
                    issues.append(TableIssue(
                        "monotonicity",
                        f"latency increases along quota at batch={b} sm={s} quota={q} "
                        f"({grid[bi, si, qi - 1]} -> {v})", (b, s, q)))
    return issues


def save_table(table: PerfTable, path) -> None:
    """Writes the grid back out in the canonical CSV schema."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TABLE_HEADER)
        for bi, b in enumerate(table.batches):
            for si, s in enumerate(table.sms):
                for qi, q in enumerate(table.quotas):
                    writer.writerow([table.function_id, b, s, q,
                                     repr(float(table.latency_ms[bi, si, qi]))])
