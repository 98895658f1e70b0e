"""Domain types shared by the allocator, autoscaler, and simulator.

SM shares and time quotas are kept as integer percentage points (1..100)
so capacity sums and alignment checks stay exact; fractions only appear
at the edges (occupancy metric, cost accounting).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import InvariantViolation, UnknownFunctionError


class PodState(enum.Enum):
    COLD_STARTING = "cold_starting"
    RUNNING = "running"
    DRAINING = "draining"


class ActionKind(enum.Enum):
    VERTICAL_UP = "vertical_up"
    VERTICAL_DOWN = "vertical_down"
    HORIZONTAL_UP = "horizontal_up"
    HORIZONTAL_DOWN = "horizontal_down"


@dataclass
class SmPartition:
    """One SM slice of a device; all resident pods share its exact sm share."""

    sm_percent: int
    resident_pods: list[str] = field(default_factory=list)
    quota_allocated: int = 0  # sum of resident pods' quotas, <= 100

    def headroom(self) -> int:
        return 100 - self.quota_allocated


@dataclass
class GpuDevice:
    gpu_id: str
    total_sm_units: int = 80
    partitions: list[SmPartition] = field(default_factory=list)
    window_ms: float = 100.0
    price_per_hour: float = 2.48

    def allocated_sm_percent(self) -> int:
        return sum(p.sm_percent for p in self.partitions)

    def free_sm_percent(self) -> int:
        return 100 - self.allocated_sm_percent()

    def partitions_with_sm(self, sm_percent: int) -> list[SmPartition]:
        return [p for p in self.partitions if p.sm_percent == sm_percent]


@dataclass
class PodInstance:
    pod_id: str
    function_id: str
    batch: int
    sm_percent: int
    quota_percent: int
    gpu_id: str
    state: PodState = PodState.RUNNING
    ready_at_ms: float = 0.0  # meaningful while COLD_STARTING
    capability_rps: float = 0.0  # batch / predicted latency at current config

    def is_running(self) -> bool:
        return self.state is PodState.RUNNING


@dataclass
class PodConfig:
    """Initial replica configuration of a function."""

    batch: int
    sm_percent: int
    quota_percent: int
    replicas: int = 1


@dataclass
class FunctionSpec:
    function_id: str
    baseline_latency_ms: float
    slo_multiplier: float = 2.0
    perf_table_ref: str = ""
    min_rps: Optional[float] = None  # falls back to the scaler-wide floor
    allowed_batches: list[int] = field(default_factory=lambda: [1])
    initial: PodConfig = field(default_factory=lambda: PodConfig(1, 50, 20))

    @property
    def slo_ms(self) -> float:
        return self.baseline_latency_ms * self.slo_multiplier


@dataclass(frozen=True)
class ScalingAction:
    """One output of the autoscaler: a target pod configuration plus kind.

    Vertical actions and horizontal-down reference an existing pod_id;
    horizontal-up carries the placement target instead (gpu_id plus the
    sm share that selects or opens a partition there).
    """

    function_id: str
    kind: ActionKind
    batch: int
    sm_percent: int
    quota_percent: int
    pod_id: Optional[str] = None
    gpu_id: Optional[str] = None

    def __post_init__(self):
        if self.kind in (ActionKind.VERTICAL_UP, ActionKind.VERTICAL_DOWN,
                         ActionKind.HORIZONTAL_DOWN):
            if self.pod_id is None:
                raise InvariantViolation(f"{self.kind.value} action requires pod_id")
        if self.kind is ActionKind.HORIZONTAL_UP and self.gpu_id is None:
            raise InvariantViolation("horizontal_up action requires a gpu_id placement")


@dataclass
class ClusterState:
    """The allocator's world: GPUs, pods, and the simulation clock."""

    gpus: dict[str, GpuDevice] = field(default_factory=dict)
    pods: dict[str, PodInstance] = field(default_factory=dict)
    functions: dict[str, FunctionSpec] = field(default_factory=dict)
    clock_ms: float = 0.0

    def pods_of(self, function_id: str) -> list[PodInstance]:
        return [p for p in self.pods.values() if p.function_id == function_id]

    def used_gpus(self) -> list[GpuDevice]:
        """GPUs hosting at least one pod of any function, id-sorted."""
        used = {p.gpu_id for p in self.pods.values()}
        return [self.gpus[g] for g in sorted(used)]

    def free_gpus(self) -> list[GpuDevice]:
        used = {p.gpu_id for p in self.pods.values()}
        return [self.gpus[g] for g in sorted(self.gpus) if g not in used]

    def partition_of(self, pod: PodInstance) -> SmPartition:
        gpu = self.gpus.get(pod.gpu_id)
        if gpu is None:
            raise InvariantViolation(f"pod {pod.pod_id} references missing GPU {pod.gpu_id}")
        for part in gpu.partitions:
            if part.sm_percent == pod.sm_percent and pod.pod_id in part.resident_pods:
                return part
        raise InvariantViolation(
            f"pod {pod.pod_id} (sm={pod.sm_percent}) not resident on a matching "
            f"partition of GPU {pod.gpu_id}"
        )

    def validate(self) -> None:
        """Checks every bookkeeping invariant; raises InvariantViolation."""
        for gpu in self.gpus.values():
            if gpu.allocated_sm_percent() > 100:
                raise InvariantViolation(
                    f"GPU {gpu.gpu_id}: sum of partition SM shares "
                    f"{gpu.allocated_sm_percent()} > 100"
                )
            for part in gpu.partitions:
                if not 1 <= part.sm_percent <= 100:
                    raise InvariantViolation(
                        f"GPU {gpu.gpu_id}: partition sm {part.sm_percent} out of range")
                if not part.resident_pods:
                    raise InvariantViolation(
                        f"GPU {gpu.gpu_id}: empty partition sm={part.sm_percent} not reclaimed")
                quota_sum = 0
                for pid in part.resident_pods:
                    pod = self.pods.get(pid)
                    if pod is None:
                        raise InvariantViolation(
                            f"GPU {gpu.gpu_id}: partition lists unknown pod {pid}")
                    if pod.gpu_id != gpu.gpu_id or pod.sm_percent != part.sm_percent:
                        raise InvariantViolation(
                            f"pod {pid} misaligned with partition "
                            f"(sm {pod.sm_percent} vs {part.sm_percent})")
                    quota_sum += pod.quota_percent
                if quota_sum != part.quota_allocated:
                    raise InvariantViolation(
                        f"GPU {gpu.gpu_id} sm={part.sm_percent}: quota bookkeeping "
                        f"{part.quota_allocated} != sum of pod quotas {quota_sum}")
                if part.quota_allocated > 100:
                    raise InvariantViolation(
                        f"GPU {gpu.gpu_id} sm={part.sm_percent}: quota "
                        f"{part.quota_allocated} > 100")
        for pod in self.pods.values():
            if pod.quota_percent <= 0:
                raise InvariantViolation(f"pod {pod.pod_id} has quota <= 0")
            self.partition_of(pod)  # raises on any mismatch


def function_capability(cluster: ClusterState, function_id: str) -> float:
    """Total serving capability (rps) of a function's Running pods.

    Cold-starting pods contribute nothing until ready; Draining pods take
    no new traffic and are excluded as well.
    """
    pods = cluster.pods_of(function_id)
    if not pods and function_id not in cluster.functions:
        raise UnknownFunctionError(function_id)
    return sum(p.capability_rps for p in pods if p.is_running())


def hgo(gpu: GpuDevice, pods: Iterable[PodInstance]) -> float:
    """GPU occupancy metric: sum of sm * quota over the GPU's resident pods."""
    total = 0
    for pod in pods:
        if pod.gpu_id != gpu.gpu_id:
            raise InvariantViolation(
                f"hgo: pod {pod.pod_id} is not resident on GPU {gpu.gpu_id}")
        total += pod.sm_percent * pod.quota_percent
    return total / 10000.0
