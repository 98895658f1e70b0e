"""Scaling policies the simulator can drive.

hybrid          quota-first vertical scaling plus horizontal spillover
horizontal-only fixed per-pod configuration, replica count scaling only
exclusive-gpu   whole-GPU replicas (sm=100, quota=100), replica scaling

The baselines reuse the same thresholds and cooldown so comparisons
isolate the scaling mechanism, not the tuning.
"""

from __future__ import annotations

import copy
import math
from typing import Mapping, Optional, Protocol

from . import allocator
from .autoscaler import Autoscaler, ScalerConfig
from .core import (ActionKind, ClusterState, FunctionSpec, PodConfig, PodInstance,
                   PodState, ScalingAction, hgo)
from .errors import ConfigError, UnknownFunctionError
from .perf import PerfTable


class ScalingPolicy(Protocol):
    name: str

    def initial_config(self, function: FunctionSpec) -> PodConfig:
        ...

    def decide(self, function: FunctionSpec, cluster: ClusterState,
               predicted_rps: float) -> list[ScalingAction]:
        ...


class HybridPolicy:
    name = "hybrid"

    def __init__(self, config: ScalerConfig, tables: Mapping[str, PerfTable]):
        self._scaler = Autoscaler(config, tables)

    def initial_config(self, function: FunctionSpec) -> PodConfig:
        return function.initial

    def decide(self, function, cluster, predicted_rps):
        return self._scaler.scale(function, cluster, predicted_rps)


class _ReplicaPolicy:
    """Shared scaffolding for the replica-count-only baselines."""

    name = "replica"

    def __init__(self, config: ScalerConfig, tables: Mapping[str, PerfTable]):
        self.config = config
        self.tables = tables
        self._last_scale_down: dict[str, float] = {}

    def initial_config(self, function: FunctionSpec) -> PodConfig:
        raise NotImplementedError

    def _table(self, function: FunctionSpec) -> PerfTable:
        table = self.tables.get(function.perf_table_ref or function.function_id)
        if table is None:
            raise UnknownFunctionError(
                f"no perf table for function {function.function_id}")
        return table

    def decide(self, function: FunctionSpec, cluster: ClusterState,
               predicted_rps: float) -> list[ScalingAction]:
        cfg = self.config
        fid = function.function_id
        table = self._table(function)
        shape = self.initial_config(function)
        pod_cap = table.throughput(shape.batch, shape.sm_percent, shape.quota_percent)
        pods = [p for p in cluster.pods_of(fid) if p.state is not PodState.DRAINING]
        if not pods:
            return []
        capability = sum(
            table.throughput(p.batch, p.sm_percent, p.quota_percent) for p in pods)

        if predicted_rps > capability * cfg.alpha:
            gap = predicted_rps - capability * cfg.alpha
            wanted = math.ceil(gap / pod_cap)
            return self._add_replicas(fid, cluster, shape, wanted)

        r_min = function.min_rps if function.min_rps is not None else cfg.r_min
        last_down = self._last_scale_down.get(fid, float("-inf"))
        if (predicted_rps < capability * cfg.beta and predicted_rps > r_min
                and cluster.clock_ms - last_down >= cfg.cooldown_ms):
            running = sorted((p for p in pods if p.state is PodState.RUNNING),
                             key=lambda p: p.pod_id, reverse=True)  # newest first
            removable = max(0, len(running) - 1)
            excess = capability - predicted_rps
            count = min(removable, int(excess // pod_cap)) if pod_cap > 0 else 0
            actions = [
                ScalingAction(function_id=fid, kind=ActionKind.HORIZONTAL_DOWN,
                              batch=p.batch, sm_percent=p.sm_percent, quota_percent=0,
                              pod_id=p.pod_id, gpu_id=p.gpu_id)
                for p in running[:count]
            ]
            if actions:
                self._last_scale_down[fid] = cluster.clock_ms
            return actions
        return []

    def _add_replicas(self, fid: str, cluster: ClusterState, shape: PodConfig,
                      wanted: int) -> list[ScalingAction]:
        """Places up to `wanted` fixed-shape replicas, packing used GPUs first."""
        scratch = copy.deepcopy(cluster)
        actions: list[ScalingAction] = []
        for i in range(wanted):
            gpu_id = self._pick_gpu(scratch, shape)
            if gpu_id is None:
                break  # cluster saturated for this shape
            action = ScalingAction(
                function_id=fid, kind=ActionKind.HORIZONTAL_UP, batch=shape.batch,
                sm_percent=shape.sm_percent, quota_percent=shape.quota_percent,
                gpu_id=gpu_id)
            staged = PodInstance(
                pod_id=f"__staged-{i}", function_id=fid, batch=shape.batch,
                sm_percent=shape.sm_percent, quota_percent=shape.quota_percent,
                gpu_id=gpu_id, state=PodState.COLD_STARTING)
            allocator.place_pod(scratch, staged, gpu_id)
            actions.append(action)
        return actions

    @staticmethod
    def _pick_gpu(cluster: ClusterState, shape: PodConfig) -> Optional[str]:
        used = cluster.used_gpus()
        candidates = sorted(
            (g for g in used
             if allocator.check_placement(g, shape.sm_percent, shape.quota_percent) is None),
            key=lambda g: (hgo(g, [p for p in cluster.pods.values()
                                   if p.gpu_id == g.gpu_id]), g.gpu_id))
        if candidates:
            return candidates[0].gpu_id
        for gpu in cluster.free_gpus():
            if allocator.check_placement(gpu, shape.sm_percent, shape.quota_percent) is None:
                return gpu.gpu_id
        return None


class HorizontalOnlyPolicy(_ReplicaPolicy):
    """Fixed fine-grained slice per pod; reacts to load with replicas alone."""

    name = "horizontal-only"

    def initial_config(self, function: FunctionSpec) -> PodConfig:
        return function.initial


class ExclusiveGpuPolicy(_ReplicaPolicy):
    """One whole GPU per replica, the coarse-allocation baseline."""

    name = "exclusive-gpu"

    def initial_config(self, function: FunctionSpec) -> PodConfig:
        return PodConfig(batch=function.initial.batch, sm_percent=100,
                         quota_percent=100, replicas=function.initial.replicas)


POLICY_NAMES = ("hybrid", "horizontal-only", "exclusive-gpu")

_ALIASES = {
    "hybrid": "hybrid",
    "horizontal": "horizontal-only",
    "horizontal-only": "horizontal-only",
    "exclusive": "exclusive-gpu",
    "exclusive-gpu": "exclusive-gpu",
}


def make_policy(name: str, config: ScalerConfig,
                tables: Mapping[str, PerfTable]) -> ScalingPolicy:
    canonical = _ALIASES.get(name)
    if canonical == "hybrid":
        return HybridPolicy(config, tables)
    if canonical == "horizontal-only":
        return HorizontalOnlyPolicy(config, tables)
    if canonical == "exclusive-gpu":
        return ExclusiveGpuPolicy(config, tables)
    raise ConfigError(f"unknown policy {name!r}; expected one of {POLICY_NAMES}")
