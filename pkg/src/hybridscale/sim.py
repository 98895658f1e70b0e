"""Deterministic discrete-event simulator.

Service model: a batch's intrinsic service need is its full-quota latency;
a pod accrues service fluidly at its quota fraction, so wall-clock latency
under quota q approximates the table's latency at q. Quota changes take
effect at the next window boundary; the allocator's books (and cost) change
at action time.

Event ordering at identical timestamps is fixed for reproducibility:
completions, pod-ready transitions, arrivals, scaler tick, window boundary.
"""

from __future__ import annotations

import csv
import heapq
import logging
import math
import os
from collections import deque
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

from . import allocator
from .autoscaler import ScalerConfig
from .core import (ActionKind, ClusterState, FunctionSpec, GpuDevice, PodInstance,
                   PodState, ScalingAction, function_capability, hgo)
from .errors import ConfigError, InvariantViolation, SchedulerError
from .kalman import KalmanState, predict_and_update
from .perf import PerfTable
from .policies import ScalingPolicy, make_policy
from .trace import WorkloadTrace

logger = logging.getLogger(__name__)

SLO_MULTIPLIERS = [1.0 + 0.25 * i for i in range(37)]  # 1.00 .. 10.00

# event priorities at equal timestamps
_P_COMPLETION = 0
_P_READY = 1
_P_ARRIVAL = 2
_P_SCALER = 3
_P_WINDOW = 4


@dataclass
class SimConfig:
    window_ms: float = 100.0
    scaler_interval_ms: float = 2000.0
    cold_start_ms: float = 5000.0
    price_per_gpu_hour: float = 2.48
    queue_capacity: int = 200
    seed: int = 0
    max_drain_ms: float = 60_000.0  # post-horizon grace before giving up on stragglers

    def __post_init__(self):
        if min(self.window_ms, self.scaler_interval_ms, self.cold_start_ms) <= 0:
            raise ConfigError("window, scaler interval, and cold start must be positive")
        if self.price_per_gpu_hour < 0:
            raise ConfigError("price_per_gpu_hour must be non-negative")
        if self.queue_capacity < 1:
            raise ConfigError("queue_capacity must be at least 1")


@dataclass
class RequestRecord:
    request_id: int
    function_id: str
    arrival_ms: float
    pod_id: str = ""
    start_ms: float = -1.0
    completion_ms: float = -1.0

    @property
    def latency_ms(self) -> float:
        return self.completion_ms - self.arrival_ms


@dataclass
class PodCostInterval:
    """One constant-configuration slice of a pod's lifetime."""

    function_id: str
    pod_id: str
    gpu_id: str
    sm_percent: int
    quota_percent: int
    start_ms: float
    end_ms: float = -1.0  # open until the pod is released or the run ends


@dataclass
class TimelinePoint:
    t_ms: float
    function_id: str
    pods: int
    capacity_rps: float
    observed_rps: float
    predicted_rps: float


@dataclass
class FunctionCounts:
    arrived: int = 0
    completed: int = 0
    rejected: int = 0

    @property
    def unfinished(self) -> int:
        return self.arrived - self.completed - self.rejected


@dataclass
class RunMetrics:
    multipliers: list[float]
    violation_curve: dict[str, list[float]]
    percentiles: dict[str, dict[str, float]]
    cost: dict[str, float]
    cost_per_1k: dict[str, float]
    counts: dict[str, FunctionCounts]
    timeline: list[TimelinePoint]
    intervals: list[PodCostInterval]
    sim_end_ms: float

    @property
    def total_cost(self) -> float:
        return sum(self.cost.values())

    def violation_at(self, function_id: str, multiplier: float) -> float:
        idx = SLO_MULTIPLIERS.index(multiplier)
        return self.violation_curve[function_id][idx]

    def aggregate_violation_at(self, multiplier: float) -> float:
        idx = SLO_MULTIPLIERS.index(multiplier)
        arrived = sum(c.arrived for c in self.counts.values())
        if arrived == 0:
            return 0.0
        weighted = sum(self.violation_curve[f][idx] * self.counts[f].arrived
                       for f in self.counts)
        return weighted / arrived

    def write_csvs(self, outdir) -> None:
        write_metric_csvs(self, outdir)


def build_cluster(num_gpus: int, *, total_sm_units: int = 80, window_ms: float = 100.0,
                  price_per_hour: float = 2.48,
                  functions: Sequence[FunctionSpec] = ()) -> ClusterState:
    gpus = {
        f"gpu-{i:03d}": GpuDevice(gpu_id=f"gpu-{i:03d}", total_sm_units=total_sm_units,
                                  window_ms=window_ms, price_per_hour=price_per_hour)
        for i in range(num_gpus)
    }
    return ClusterState(gpus=gpus, functions={f.function_id: f for f in functions})


# -- cost accounting ----------------------------------------------------


def compute_cost(intervals: Sequence[PodCostInterval], price_per_gpu_hour: float,
                 end_ms: Optional[float] = None) -> dict[str, float]:
    """Per-function cost: sm * quota * duration charged at the GPU rate.

    Open intervals are priced up to end_ms.
    """
    cost: dict[str, float] = {}
    for iv in intervals:
        close = iv.end_ms if iv.end_ms >= 0 else end_ms
        if close is None:
            raise ValueError(f"open interval for pod {iv.pod_id} and no end_ms given")
        hours = max(0.0, close - iv.start_ms) / 3_600_000.0
        share = (iv.sm_percent / 100.0) * (iv.quota_percent / 100.0)
        cost[iv.function_id] = cost.get(iv.function_id, 0.0) + \
            share * hours * price_per_gpu_hour
    return cost


# -- window-level token accounting ---------------------------------------


def execute_window(pod_work: Sequence[tuple[str, int, Sequence[float]]],
                   window_start: float, window_ms: float,
                   ) -> dict[str, tuple[float, list[float]]]:
    """Token grants for one scheduling window under the fluid service model.

    pod_work: (pod_id, quota_percent, pending service needs in full-quota ms).
    Each pod may consume up to quota% of the window; batches run in order and
    complete once their accumulated grant covers their need. Returns
    pod_id -> (granted_ms, completion times within this window).
    """
    out: dict[str, tuple[float, list[float]]] = {}
    for pod_id, quota, needs in pod_work:
        rate = quota / 100.0
        budget = rate * window_ms
        granted = 0.0
        completions: list[float] = []
        for need in needs:
            if granted + need > budget:
                granted = min(budget, granted + need)  # partial progress
                break
            granted += need
            completions.append(window_start + granted / rate)
        out[pod_id] = (granted, completions)
    return out


# -- engine ---------------------------------------------------------------


class _PodRuntime:
    """Mutable service-side state of one pod (queue, in-flight batch, rate)."""

    __slots__ = ("pod", "queue", "in_service", "remaining_ms", "last_update_ms",
                 "effective_quota", "pending_quota", "version")

    def __init__(self, pod: PodInstance):
        self.pod = pod
        self.queue: deque[RequestRecord] = deque()
        self.in_service: Optional[list[RequestRecord]] = None
        self.remaining_ms = 0.0
        self.last_update_ms = 0.0
        self.effective_quota = pod.quota_percent
        self.pending_quota = pod.quota_percent
        self.version = 0

    def rate(self) -> float:
        return self.effective_quota / 100.0

    def idle(self) -> bool:
        return self.in_service is None and not self.queue


class _Router:
    """Smooth weighted round-robin over Running pods, capability-weighted."""

    def __init__(self):
        self._members: dict[str, tuple] = {}
        self._current: dict[str, dict[str, float]] = {}

    def reset(self, function_id: str) -> None:
        self._members.pop(function_id, None)
        self._current.pop(function_id, None)

    def route(self, function_id: str, pods: list[PodInstance],
              has_space) -> Optional[str]:
        running = sorted((p for p in pods if p.state is PodState.RUNNING),
                         key=lambda p: p.pod_id)
        if not running:
            return None
        member_key = tuple(p.pod_id for p in running)
        if self._members.get(function_id) != member_key:
            self._members[function_id] = member_key
            self._current[function_id] = {p.pod_id: 0.0 for p in running}
        current = self._current[function_id]
        weights = {p.pod_id: p.capability_rps for p in running}
        total = sum(weights.values())
        if total <= 0:
            weights = {p.pod_id: 1.0 for p in running}
            total = float(len(running))
        for pid, w in weights.items():
            current[pid] += w
        choice = None
        for pid in sorted(current, key=lambda pid: (-current[pid], pid)):
            if has_space(pid):
                choice = pid
                break
        if choice is None:
            # nobody can take it; undo the credit so totals stay bounded
            for pid, w in weights.items():
                current[pid] -= w
            return None
        current[choice] -= total
        return choice


class SimulationEngine:
    def __init__(self, trace: WorkloadTrace, functions: Sequence[FunctionSpec],
                 tables: Mapping[str, PerfTable], cluster: ClusterState,
                 scaler_config: ScalerConfig, sim_config: SimConfig,
                 policy: Union[str, ScalingPolicy],
                 kalman_params: Optional[dict] = None):
        unknown = set(trace.function_ids()) - {f.function_id for f in functions}
        if unknown:
            raise ConfigError(f"trace references unknown functions {sorted(unknown)}")
        self.functions = {f.function_id: f for f in functions}
        for f in functions:
            ref = f.perf_table_ref or f.function_id
            if ref not in tables:
                raise ConfigError(f"missing perf table {ref!r} for {f.function_id}")
        self.tables = tables
        self.trace = trace
        self.cluster = cluster
        self.cluster.functions = dict(self.functions)
        self.scaler_config = scaler_config
        self.cfg = sim_config
        if isinstance(policy, str):
            policy = make_policy(policy, scaler_config, tables)
        self.policy = policy
        kp = kalman_params or {}
        self._kalman_defaults = {
            "A": kp.get("A", 1.0), "Q": kp.get("Q", 4.0), "H": kp.get("H", 1.0),
            "D": kp.get("D", 16.0),
        }
        self._kalman_p0 = kp.get("P0", 1.0)

        self._heap: list = []
        self._seq = 0
        self._pod_counter = 0
        self._request_counter = 0
        self._runtimes: dict[str, _PodRuntime] = {}
        self._router = _Router()
        self._kalman: dict[str, KalmanState] = {}
        self._tick_arrivals: dict[str, int] = {f: 0 for f in self.functions}
        self._counts: dict[str, FunctionCounts] = {
            f: FunctionCounts() for f in self.functions}
        self._latencies: dict[str, list[float]] = {f: [] for f in self.functions}
        self._intervals: list[PodCostInterval] = []
        self._open_interval: dict[str, PodCostInterval] = {}
        self._timeline: list[TimelinePoint] = []
        self._window_scheduled: set[float] = set()
        self._in_flight = 0

    # -- helpers --------------------------------------------------------

    def _push(self, t: float, prio: int, kind: str, data) -> None:
        heapq.heappush(self._heap, (t, prio, self._seq, kind, data))
        self._seq += 1

    def _table_of(self, function_id: str) -> PerfTable:
        f = self.functions[function_id]
        return self.tables[f.perf_table_ref or f.function_id]

    def _capability(self, pod: PodInstance) -> float:
        table = self._table_of(pod.function_id)
        return table.throughput(pod.batch, pod.sm_percent, pod.quota_percent)

    def _new_pod_id(self) -> str:
        pid = f"pod-{self._pod_counter:06d}"
        self._pod_counter += 1
        return pid

    def _open_cost_interval(self, pod: PodInstance, now: float) -> None:
        iv = PodCostInterval(pod.function_id, pod.pod_id, pod.gpu_id,
                             pod.sm_percent, pod.quota_percent, now)
        self._open_interval[pod.pod_id] = iv
        self._intervals.append(iv)

    def _close_cost_interval(self, pod_id: str, now: float) -> None:
        iv = self._open_interval.pop(pod_id, None)
        if iv is not None:
            iv.end_ms = now

    # -- bootstrap ------------------------------------------------------

    def _bootstrap(self) -> None:
        for fid in sorted(self.functions):
            function = self.functions[fid]
            shape = self.policy.initial_config(function)
            for _ in range(max(1, shape.replicas)):
                pod = PodInstance(
                    pod_id=self._new_pod_id(), function_id=fid, batch=shape.batch,
                    sm_percent=shape.sm_percent, quota_percent=shape.quota_percent,
                    gpu_id="", state=PodState.RUNNING)
                # spread keep-alive pods: emptiest GPU first, ids break ties
                legal = sorted(
                    (g for g in self.cluster.gpus.values()
                     if allocator.check_placement(g, shape.sm_percent,
                                                  shape.quota_percent) is None),
                    key=lambda g: (hgo(g, [p for p in self.cluster.pods.values()
                                           if p.gpu_id == g.gpu_id]), g.gpu_id))
                if not legal:
                    raise SchedulerError(
                        f"cluster cannot host initial pod of {fid} "
                        f"(sm={shape.sm_percent}, quota={shape.quota_percent})")
                allocator.place_pod(self.cluster, pod, legal[0].gpu_id)
                pod.capability_rps = self._capability(pod)
                self._runtimes[pod.pod_id] = _PodRuntime(pod)
                self._open_cost_interval(pod, 0.0)
        self.cluster.validate()

    # -- event handlers ---------------------------------------------------

    def _handle_arrival(self, now: float, index: int) -> None:
        if index + 1 < len(self.trace.entries):
            t_next, _ = self.trace.entries[index + 1]
            self._push(t_next, _P_ARRIVAL, "arrival", index + 1)
        _, fid = self.trace.entries[index]
        self._counts[fid].arrived += 1
        self._tick_arrivals[fid] += 1
        rec = RequestRecord(self._request_counter, fid, now)
        self._request_counter += 1
        pods = self.cluster.pods_of(fid)
        chosen = self._router.route(
            fid, pods,
            lambda pid: len(self._runtimes[pid].queue) < self.cfg.queue_capacity)
        if chosen is None:
            self._counts[fid].rejected += 1
            return
        rt = self._runtimes[chosen]
        rec.pod_id = chosen
        rt.queue.append(rec)
        self._in_flight += 1
        if rt.in_service is None:
            self._start_service(rt, now)

    def _start_service(self, rt: _PodRuntime, now: float) -> None:
        pod = rt.pod
        size = min(pod.batch, len(rt.queue))
        batch = [rt.queue.popleft() for _ in range(size)]
        for rec in batch:
            rec.start_ms = now
        table = self._table_of(pod.function_id)
        rt.in_service = batch
        # a partial pull costs the latency of its actual size, not the
        # configured maximum; capability estimates assume full batches.
        # pulls below the sampled batch range price as the smallest sample
        lookup = max(size, table.batches[0])
        rt.remaining_ms = table.predict_latency(lookup, pod.sm_percent, 100)
        rt.last_update_ms = now
        rt.version += 1
        self._push(now + rt.remaining_ms / rt.rate(), _P_COMPLETION, "completion",
                   (pod.pod_id, rt.version))

    def _handle_completion(self, now: float, pod_id: str, version: int) -> None:
        rt = self._runtimes.get(pod_id)
        if rt is None or rt.version != version or rt.in_service is None:
            return  # stale event from a rescheduled batch
        fid = rt.pod.function_id
        for rec in rt.in_service:
            rec.completion_ms = now
            self._latencies[fid].append(rec.latency_ms)
            self._counts[fid].completed += 1
            self._in_flight -= 1
        rt.in_service = None
        if rt.queue:
            self._start_service(rt, now)
        elif rt.pod.state is PodState.DRAINING:
            self._release_pod(pod_id, now)

    def _handle_ready(self, now: float, pod_id: str) -> None:
        rt = self._runtimes.get(pod_id)
        if rt is None or rt.pod.state is not PodState.COLD_STARTING:
            return
        rt.pod.state = PodState.RUNNING
        rt.pod.capability_rps = self._capability(rt.pod)
        self._router.reset(rt.pod.function_id)

    def _handle_window(self, now: float) -> None:
        self._window_scheduled.discard(now)
        for pod_id in sorted(self._runtimes):
            rt = self._runtimes[pod_id]
            if rt.pending_quota == rt.effective_quota:
                continue
            if rt.in_service is not None:
                rt.remaining_ms -= (now - rt.last_update_ms) * rt.rate()
                rt.remaining_ms = max(rt.remaining_ms, 0.0)
                rt.last_update_ms = now
            rt.effective_quota = rt.pending_quota
            if rt.in_service is not None:
                rt.version += 1
                self._push(now + rt.remaining_ms / rt.rate(), _P_COMPLETION,
                           "completion", (pod_id, rt.version))

    def _schedule_quota_switch(self, now: float) -> None:
        boundary = (math.floor(now / self.cfg.window_ms) + 1) * self.cfg.window_ms
        if boundary not in self._window_scheduled:
            self._window_scheduled.add(boundary)
            self._push(boundary, _P_WINDOW, "window", None)

    def _handle_scaler(self, now: float) -> None:
        self.cluster.clock_ms = now
        interval_s = self.cfg.scaler_interval_ms / 1000.0
        for fid in sorted(self.functions):
            observed = self._tick_arrivals[fid] / interval_s
            self._tick_arrivals[fid] = 0
            state = self._kalman.get(fid)
            if state is None:
                state = KalmanState(R=observed, P=self._kalman_p0,
                                    **self._kalman_defaults)
            state, predicted = predict_and_update(state, observed)
            self._kalman[fid] = state
            actions = self.policy.decide(self.functions[fid], self.cluster, predicted)
            for action in actions:
                self._apply_action(action, now)
            alive = [p for p in self.cluster.pods_of(fid)
                     if p.state is not PodState.DRAINING]
            self._timeline.append(TimelinePoint(
                t_ms=now, function_id=fid, pods=len(alive),
                capacity_rps=function_capability(self.cluster, fid),
                observed_rps=observed, predicted_rps=predicted))
        self.cluster.validate()

    def _apply_action(self, action: ScalingAction, now: float) -> None:
        kind = action.kind
        if kind in (ActionKind.VERTICAL_UP, ActionKind.VERTICAL_DOWN):
            pod = self.cluster.pods[action.pod_id]
            self._close_cost_interval(pod.pod_id, now)
            allocator.change_quota(self.cluster, pod.pod_id, action.quota_percent)
            pod.capability_rps = self._capability(pod)
            self._open_cost_interval(pod, now)
            rt = self._runtimes[pod.pod_id]
            rt.pending_quota = action.quota_percent
            self._schedule_quota_switch(now)
            self._router.reset(pod.function_id)
        elif kind is ActionKind.HORIZONTAL_UP:
            pod = PodInstance(
                pod_id=self._new_pod_id(), function_id=action.function_id,
                batch=action.batch, sm_percent=action.sm_percent,
                quota_percent=action.quota_percent, gpu_id=action.gpu_id,
                state=PodState.COLD_STARTING,
                ready_at_ms=now + self.cfg.cold_start_ms)
            allocator.place_pod(self.cluster, pod, action.gpu_id)
            pod.capability_rps = self._capability(pod)
            self._runtimes[pod.pod_id] = _PodRuntime(pod)
            self._open_cost_interval(pod, now)
            self._push(pod.ready_at_ms, _P_READY, "ready", pod.pod_id)
        elif kind is ActionKind.HORIZONTAL_DOWN:
            pod = self.cluster.pods[action.pod_id]
            pod.state = PodState.DRAINING
            self._router.reset(pod.function_id)
            rt = self._runtimes[pod.pod_id]
            if rt.idle():
                self._release_pod(pod.pod_id, now)
        else:  # pragma: no cover
            raise InvariantViolation(f"unknown action kind {kind}")

    def _release_pod(self, pod_id: str, now: float) -> None:
        rt = self._runtimes.pop(pod_id)
        self._close_cost_interval(pod_id, now)
        allocator.release_pod(self.cluster, pod_id)
        self._router.reset(rt.pod.function_id)

    # -- main loop --------------------------------------------------------

    def run(self) -> RunMetrics:
        self._bootstrap()
        horizon = self.trace.horizon_ms
        hard_stop = horizon + self.cfg.max_drain_ms
        if self.trace.entries:
            self._push(self.trace.entries[0][0], _P_ARRIVAL, "arrival", 0)
        self._push(self.cfg.scaler_interval_ms, _P_SCALER, "scaler", None)

        arrivals_done = not self.trace.entries
        now = 0.0
        while self._heap:
            t, prio, _, kind, data = heapq.heappop(self._heap)
            if t > hard_stop:
                now = hard_stop
                break
            if arrivals_done and self._in_flight == 0 and t > horizon:
                break  # drained and past the replay window
            now = t
            if kind == "completion":
                self._handle_completion(now, *data)
            elif kind == "ready":
                self._handle_ready(now, data)
            elif kind == "arrival":
                self._handle_arrival(now, data)
                arrivals_done = data + 1 >= len(self.trace.entries)
            elif kind == "scaler":
                self._handle_scaler(now)
                self._push(now + self.cfg.scaler_interval_ms, _P_SCALER,
                           "scaler", None)
            elif kind == "window":
                self._handle_window(now)

        sim_end = max(horizon, min(now, hard_stop))
        self.cluster.clock_ms = sim_end
        for pod_id in list(self._open_interval):
            self._close_cost_interval(pod_id, sim_end)
        self._check_conservation()
        return self._finalize(sim_end)

    def _check_conservation(self) -> None:
        leftover = 0
        for rt in self._runtimes.values():
            leftover += len(rt.queue)
            if rt.in_service is not None:
                leftover += len(rt.in_service)
        unfinished = sum(c.unfinished for c in self._counts.values())
        if leftover != unfinished or self._in_flight != leftover:
            raise InvariantViolation(
                f"request conservation broken: queued+in-service {leftover}, "
                f"arrived-completed-rejected {unfinished}, in-flight {self._in_flight}")

    def _finalize(self, sim_end: float) -> RunMetrics:
        violation_curve: dict[str, list[float]] = {}
        percentiles: dict[str, dict[str, float]] = {}
        for fid in sorted(self.functions):
            counts = self._counts[fid]
            latencies = sorted(self._latencies[fid])
            baseline = self.functions[fid].baseline_latency_ms
            curve = []
            for m in SLO_MULTIPLIERS:
                slo = baseline * m
                late = sum(1 for lat in latencies if lat > slo)
                bad = late + counts.rejected + counts.unfinished
                curve.append(bad / counts.arrived if counts.arrived else 0.0)
            violation_curve[fid] = curve
            percentiles[fid] = {
                f"p{q}": _nearest_rank(latencies, q) for q in (50, 90, 95, 99)}
        cost = compute_cost(self._intervals, self.cfg.price_per_gpu_hour, sim_end)
        cost = {fid: cost.get(fid, 0.0) for fid in sorted(self.functions)}
        cost_per_1k = {
            fid: (cost[fid] / self._counts[fid].completed * 1000.0
                  if self._counts[fid].completed else 0.0)
            for fid in cost
        }
        return RunMetrics(
            multipliers=list(SLO_MULTIPLIERS), violation_curve=violation_curve,
            percentiles=percentiles, cost=cost, cost_per_1k=cost_per_1k,
            counts=dict(self._counts), timeline=self._timeline,
            intervals=self._intervals, sim_end_ms=sim_end)


def _nearest_rank(sorted_values: list[float], q: int) -> float:
    if not sorted_values:
        return float("nan")
    rank = math.ceil(q / 100.0 * len(sorted_values))
    return sorted_values[max(0, min(len(sorted_values), rank) - 1)]


def run(trace: WorkloadTrace, functions: Sequence[FunctionSpec],
        tables: Mapping[str, PerfTable], cluster: ClusterState,
        scaler_config: ScalerConfig, sim_config: SimConfig,
        policy: Union[str, ScalingPolicy],
        kalman_params: Optional[dict] = None) -> RunMetrics:
    """Simulates the trace under one policy; deterministic in its inputs.

    The cluster is used as-is (bring a fresh one per run); initial pods are
    placed by the policy at t=0 already warm.
    """
    engine = SimulationEngine(trace, functions, tables, cluster, scaler_config,
                              sim_config, policy, kalman_params)
    metrics = engine.run()
    _assert_monotone_curves(metrics)
    return metrics


def _assert_monotone_curves(metrics: RunMetrics) -> None:
    for fid, curve in metrics.violation_curve.items():
        for a, b in zip(curve, curve[1:]):
            if b > a + 1e-12:
                raise InvariantViolation(
                    f"violation curve of {fid} increased with the SLO multiplier")


# -- CSV output -----------------------------------------------------------


def write_metric_csvs(metrics: RunMetrics, outdir) -> None:
    """Writes violations/latency/cost/timeline CSVs; stable row order."""
    os.makedirs(outdir, exist_ok=True)

    with open(os.path.join(outdir, "violations.csv"), "w", newline="",
              encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["function_id", "multiplier", "violation_rate"])
        for fid in sorted(metrics.violation_curve):
            for m, rate in zip(metrics.multipliers, metrics.violation_curve[fid]):
                w.writerow([fid, f"{m:.2f}", repr(rate)])

    with open(os.path.join(outdir, "latency.csv"), "w", newline="",
              encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["function_id", "p50", "p90", "p95", "p99"])
        for fid in sorted(metrics.percentiles):
            p = metrics.percentiles[fid]
            w.writerow([fid] + [repr(p[f"p{q}"]) for q in (50, 90, 95, 99)])

    with open(os.path.join(outdir, "cost.csv"), "w", newline="",
              encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["function_id", "total_cost", "cost_per_1k"])
        for fid in sorted(metrics.cost):
            w.writerow([fid, repr(metrics.cost[fid]), repr(metrics.cost_per_1k[fid])])

    with open(os.path.join(outdir, "timeline.csv"), "w", newline="",
              encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_ms", "function_id", "pods", "capacity_rps",
                    "observed_rps", "predicted_rps"])
        for p in metrics.timeline:
            w.writerow([repr(p.t_ms), p.function_id, p.pods, repr(p.capacity_rps),
                        repr(p.observed_rps), repr(p.predicted_rps)])
