"""Hybrid vertical/horizontal autoscaler.

Per function and per tick: when the predicted rate outgrows the capability
threshold, quota raises on existing pods come first (largest SM share
first, since a small quota step there buys the most throughput), then one
new pod on the used GPU with the lowest occupancy, then one new pod on a
fresh GPU at the most cost-efficient configuration. Scale-down mirrors the
stepwise quota walk (smallest SM share first) behind a cooldown, and never
drops a function's last pod.

Actions are staged against a scratch copy of the cluster as they are
emitted, so every emitted action is legal to apply in order.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Mapping

from . import allocator
from .core import (ActionKind, ClusterState, FunctionSpec, PodInstance, PodState,
                   ScalingAction, hgo)
from .errors import UnknownFunctionError, UnroutableFunctionError
from .perf import PerfTable


@dataclass(frozen=True)
class ScalerConfig:
    alpha: float = 0.9         # scale-up trigger: R > C_f * alpha
    beta: float = 0.5          # scale-down trigger: R < C_f * beta
    delta_iq: int = 10         # quota step, percent
    cooldown_ms: float = 30000.0  # minimum gap between scale-downs
    r_min: float = 1.0         # capacity floor under which we never scale down

    def __post_init__(self):
        if not 0 < self.beta < self.alpha <= 1:
            raise ValueError(f"need 0 < beta < alpha <= 1, got alpha={self.alpha} "
                             f"beta={self.beta}")
        if not 1 <= self.delta_iq <= 100:
            raise ValueError(f"delta_iq {self.delta_iq} outside [1, 100]")
        if self.cooldown_ms < 0 or self.r_min < 0:
            raise ValueError("cooldown_ms and r_min must be non-negative")


def update_load_balancer_weights(cluster: ClusterState, function_id: str) -> dict[str, float]:
    """Traffic weights proportional to each Running pod's capability."""
    pods = [p for p in cluster.pods_of(function_id) if p.state is PodState.RUNNING]
    if not pods:
        raise UnroutableFunctionError(function_id)
    total = sum(p.capability_rps for p in pods)
    if total <= 0:
        # all caps zero: spread evenly rather than dividing by zero
        return {p.pod_id: 1.0 / len(pods) for p in pods}
    return {p.pod_id: p.capability_rps / total for p in pods}


class Autoscaler:
    """Stateful wrapper: per-function scale-down cooldown timestamps."""

    def __init__(self, config: ScalerConfig, tables: Mapping[str, PerfTable]):
        self.config = config
        self.tables = tables
        self._last_scale_down: dict[str, float] = {}

    def _table(self, function: FunctionSpec) -> PerfTable:
        table = self.tables.get(function.perf_table_ref or function.function_id)
        if table is None:
            raise UnknownFunctionError(
                f"no perf table for function {function.function_id}")
        return table

    def scale(self, function: FunctionSpec, cluster: ClusterState,
              predicted_rps: float) -> list[ScalingAction]:
        """One scaling decision; pure in (cluster, rate) plus cooldown state."""
        cfg = self.config
        table = self._table(function)
        fid = function.function_id
        now = cluster.clock_ms

        pods = sorted(cluster.pods_of(function_id=fid),
                      key=lambda p: (-p.sm_percent, p.pod_id))
        pods = [p for p in pods if p.state is not PodState.DRAINING]
        if not pods:
            return []
        capability = sum(
            table.throughput(p.batch, p.sm_percent, p.quota_percent) for p in pods)

        if predicted_rps > capability * cfg.alpha:
            return self._scale_up(function, table, cluster, pods,
                                  predicted_rps - capability * cfg.alpha)

        r_min = function.min_rps if function.min_rps is not None else cfg.r_min
        last_down = self._last_scale_down.get(fid, float("-inf"))
        if (predicted_rps < capability * cfg.beta and predicted_rps > r_min
                and now - last_down >= cfg.cooldown_ms):
            actions = self._scale_down(function, table, cluster, pods,
                                       capability - predicted_rps)
            if actions:
                self._last_scale_down[fid] = now
            return actions
        return []

    # -- scale up -------------------------------------------------------

    def _scale_up(self, function: FunctionSpec, table: PerfTable,
                  cluster: ClusterState, pods: list[PodInstance],
                  rps_gap: float) -> list[ScalingAction]:
        cfg = self.config
        fid = function.function_id
        scratch = copy.deepcopy(cluster)
        actions: list[ScalingAction] = []

        # Vertical first: widen quotas, largest SM shares first.
        for pod in pods:
            if rps_gap <= 0:
                break
            if pod.state is not PodState.RUNNING:
                continue
            avail = allocator.max_avail_quota_for_pod(scratch, pod.pod_id)
            current = table.throughput(pod.batch, pod.sm_percent, pod.quota_percent)
            quota = pod.quota_percent
            gain = 0.0
            while quota + cfg.delta_iq <= avail and rps_gap - gain > 0:
                quota += cfg.delta_iq
                gain = table.throughput(pod.batch, pod.sm_percent, quota) - current
            if quota > pod.quota_percent:
                allocator.change_quota(scratch, pod.pod_id, quota)
                actions.append(ScalingAction(
                    function_id=fid, kind=ActionKind.VERTICAL_UP, batch=pod.batch,
                    sm_percent=pod.sm_percent, quota_percent=quota,
                    pod_id=pod.pod_id, gpu_id=pod.gpu_id))
                rps_gap -= gain

        batch_ref = pods[0].batch  # largest-SM pod anchors new-pod batch choice

        # Horizontal to the used GPU with the lowest occupancy.
        if rps_gap > 0:
            gpu = min(scratch.used_gpus(),
                      key=lambda g: (hgo(g, [p for p in scratch.pods.values()
                                            if p.gpu_id == g.gpu_id]), g.gpu_id))
            sm_max, q_max = allocator.max_avail_quota_and_sm(scratch, gpu.gpu_id)
            if sm_max > 0 and q_max > 0:
                c_max = table.max_quota_capability(batch_ref, sm_max, q_max)
                if c_max > rps_gap:
                    quota = self._covering_quota(table, batch_ref, sm_max, q_max, rps_gap)
                    action = ScalingAction(
                        function_id=fid, kind=ActionKind.HORIZONTAL_UP, batch=batch_ref,
                        sm_percent=sm_max, quota_percent=quota, gpu_id=gpu.gpu_id)
                    self._stage_new_pod(scratch, action, len(actions))
                    actions.append(action)
                    rps_gap -= table.throughput(batch_ref, sm_max, quota)

        # Fresh GPU at the most cost-efficient configuration.
        if rps_gap > 0:
            free = scratch.free_gpus()
            if free:
                batch, sm, quota = table.most_efficient_config(
                    rps_gap, quota_step=cfg.delta_iq,
                    batches=function.allowed_batches or None)
                action = ScalingAction(
                    function_id=fid, kind=ActionKind.HORIZONTAL_UP, batch=batch,
                    sm_percent=sm, quota_percent=quota, gpu_id=free[0].gpu_id)
                self._stage_new_pod(scratch, action, len(actions))
                actions.append(action)
        return actions

    def _covering_quota(self, table: PerfTable, batch: int, sm: int, q_max: int,
                        rps_gap: float) -> int:
        """Smallest quota step multiple (capped q_max) whose throughput covers the gap."""
        step = self.config.delta_iq
        for quota in range(step, q_max + 1, step):
            if table.throughput(batch, sm, quota) >= rps_gap:
                return quota
        return q_max

    @staticmethod
    def _stage_new_pod(scratch: ClusterState, action: ScalingAction, index: int) -> None:
        pod = PodInstance(
            pod_id=f"__staged-{index}", function_id=action.function_id,
            batch=action.batch, sm_percent=action.sm_percent,
            quota_percent=action.quota_percent, gpu_id=action.gpu_id,
            state=PodState.COLD_STARTING)
        allocator.place_pod(scratch, pod, action.gpu_id)

    # -- scale down -----------------------------------------------------

    def _scale_down(self, function: FunctionSpec, table: PerfTable,
                    cluster: ClusterState, pods: list[PodInstance],
                    rps_excess: float) -> list[ScalingAction]:
        cfg = self.config
        fid = function.function_id
        running = sorted((p for p in pods if p.state is PodState.RUNNING),
                         key=lambda p: (p.sm_percent, p.pod_id))
        alive = len(running)  # never drain the last pod able to take traffic
        actions: list[ScalingAction] = []
        for pod in running:
            if rps_excess <= 0:
                break
            current = table.throughput(pod.batch, pod.sm_percent, pod.quota_percent)
            quota = pod.quota_percent
            shed = 0.0
            while quota > 0 and rps_excess - shed > 0:
                quota = max(0, quota - cfg.delta_iq)
                if quota == 0:
                    shed = current  # full removal sheds the pod's whole capability
                else:
                    shed = current - table.throughput(pod.batch, pod.sm_percent, quota)
            if quota == 0:
                if alive <= 1:
                    # last pod: fall back to the deepest vertical cut instead
                    floor = pod.quota_percent - cfg.delta_iq * (
                        (pod.quota_percent - 1) // cfg.delta_iq)
                    if floor < pod.quota_percent:
                        shed = current - table.throughput(pod.batch, pod.sm_percent, floor)
                        actions.append(ScalingAction(
                            function_id=fid, kind=ActionKind.VERTICAL_DOWN,
                            batch=pod.batch, sm_percent=pod.sm_percent,
                            quota_percent=floor, pod_id=pod.pod_id, gpu_id=pod.gpu_id))
                        rps_excess -= shed
                    continue
                alive -= 1
                actions.append(ScalingAction(
                    function_id=fid, kind=ActionKind.HORIZONTAL_DOWN, batch=pod.batch,
                    sm_percent=pod.sm_percent, quota_percent=0,
                    pod_id=pod.pod_id, gpu_id=pod.gpu_id))
                rps_excess -= current
            elif quota < pod.quota_percent:
                actions.append(ScalingAction(
                    function_id=fid, kind=ActionKind.VERTICAL_DOWN, batch=pod.batch,
                    sm_percent=pod.sm_percent, quota_percent=quota,
                    pod_id=pod.pod_id, gpu_id=pod.gpu_id))
                rps_excess -= shed
        return actions
