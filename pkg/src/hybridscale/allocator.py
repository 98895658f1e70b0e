"""SM-alignment-aware placement and quota bookkeeping.

Placement rules: a pod whose sm share matches an existing partition joins
it when the partition has quota headroom for the pod (joining is mandatory
then, which is what keeps same-sm slices from fragmenting); otherwise the
pod may open a new partition inside the device's unallocated SM share.
Quota totals per partition never exceed 100, SM totals per GPU never
exceed 100.
"""

from __future__ import annotations

from .core import ClusterState, GpuDevice, PodInstance, SmPartition
from .errors import PlacementError, UnknownGpuError, UnknownPodError


def max_avail_quota_for_pod(cluster: ClusterState, pod_id: str) -> int:
    """Largest quota the pod could hold on its current partition."""
    pod = cluster.pods.get(pod_id)
    if pod is None:
        raise UnknownPodError(pod_id)
    partition = cluster.partition_of(pod)
    return pod.quota_percent + partition.headroom()


def max_avail_quota_and_sm(cluster: ClusterState, gpu_id: str) -> tuple[int, int]:
    """Best (sm, quota) a new pod could get on this GPU.

    Candidates: join an existing partition (its sm, its quota headroom) or
    open a new one (the unallocated SM share, full quota). Ranked by the
    sm*quota product, ties to the larger sm, then to joining. Returns
    (0, 0) when the GPU has no headroom anywhere.
    """
    gpu = cluster.gpus.get(gpu_id)
    if gpu is None:
        raise UnknownGpuError(gpu_id)
    best = (0, 0)
    best_key = None
    # join=1 outranks join=0 at equal product and sm: prefer filling a slice
    for part in gpu.partitions:
        if part.headroom() > 0:
            candidate = (part.sm_percent, part.headroom())
            key = (candidate[0] * candidate[1], candidate[0], 1)
            if best_key is None or key > best_key:
                best, best_key = candidate, key
    free_sm = gpu.free_sm_percent()
    if free_sm > 0:
        candidate = (free_sm, 100)
        key = (free_sm * 100, free_sm, 0)
        if best_key is None or key > best_key:
            best, best_key = candidate, key
    return best


def _joinable_partition(gpu: GpuDevice, sm_percent: int, quota_percent: int):
    """First same-sm partition that can absorb the quota, if any."""
    for part in gpu.partitions:
        if part.sm_percent == sm_percent and part.headroom() >= quota_percent:
            return part
    return None


def check_placement(gpu: GpuDevice, sm_percent: int, quota_percent: int) -> str | None:
    """Returns the rejection reason for placing (sm, quota), or None if legal.

    Legality branches: join a same-sm partition with enough headroom, or
    open a new partition within the unallocated SM share.
    """
    if not 1 <= sm_percent <= 100 or not 1 <= quota_percent <= 100:
        return f"sm={sm_percent} quota={quota_percent} outside (0, 100]"
    if _joinable_partition(gpu, sm_percent, quota_percent) is not None:
        return None
    free_sm = gpu.free_sm_percent()
    if free_sm >= sm_percent:
        return None
    matching = gpu.partitions_with_sm(sm_percent)
    if matching:
        best = max(p.headroom() for p in matching)
        return (f"partition sm={sm_percent} has headroom {best} < quota "
                f"{quota_percent}, and free SM {free_sm} < {sm_percent}")
    return (f"sm={sm_percent} matches no partition and exceeds unallocated "
            f"share {free_sm}")


def place_pod(cluster: ClusterState, pod: PodInstance, gpu_id: str) -> SmPartition:
    """Registers the pod on the GPU, joining or opening a partition.

    Joining is mandatory whenever a same-sm partition can take the quota;
    a parallel same-sm partition only appears when the existing one cannot.
    The pod must not already be in the cluster.
    """
    gpu = cluster.gpus.get(gpu_id)
    if gpu is None:
        raise UnknownGpuError(gpu_id)
    if pod.pod_id in cluster.pods:
        raise PlacementError(f"pod {pod.pod_id} already placed")
    reason = check_placement(gpu, pod.sm_percent, pod.quota_percent)
    if reason is not None:
        raise PlacementError(f"GPU {gpu_id}: {reason}")
    part = _joinable_partition(gpu, pod.sm_percent, pod.quota_percent)
    if part is None:
        part = SmPartition(sm_percent=pod.sm_percent)
        gpu.partitions.append(part)
    part.resident_pods.append(pod.pod_id)
    part.quota_allocated += pod.quota_percent
    pod.gpu_id = gpu_id
    cluster.pods[pod.pod_id] = pod
    return part


def change_quota(cluster: ClusterState, pod_id: str, new_quota: int) -> None:
    """Rewrites a pod's quota in place; rejected if the partition overflows."""
    pod = cluster.pods.get(pod_id)
    if pod is None:
        raise UnknownPodError(pod_id)
    if not 1 <= new_quota <= 100:
        raise PlacementError(f"quota {new_quota} outside (0, 100]")
    part = cluster.partition_of(pod)
    delta = new_quota - pod.quota_percent
    if part.quota_allocated + delta > 100:
        raise PlacementError(
            f"quota change to {new_quota} overflows partition "
            f"(allocated {part.quota_allocated}, delta {delta})")
    part.quota_allocated += delta
    pod.quota_percent = new_quota


def release_pod(cluster: ClusterState, pod_id: str) -> None:
    """Removes the pod; empty partitions (and thus GPUs) free their share."""
    pod = cluster.pods.get(pod_id)
    if pod is None:
        raise UnknownPodError(pod_id)
    gpu = cluster.gpus[pod.gpu_id]
    part = cluster.partition_of(pod)
    part.resident_pods.remove(pod_id)
    part.quota_allocated -= pod.quota_percent
    if not part.resident_pods:
        gpu.partitions.remove(part)
    del cluster.pods[pod_id]
