"""Fine-grained GPU slice autoscaling: scheduler library plus a
trace-driven simulator for comparing scaling policies.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .autoscaler import Autoscaler, ScalerConfig, update_load_balancer_weights
from .core import (ActionKind, ClusterState, FunctionSpec, GpuDevice, PodConfig,
                   PodInstance, PodState, ScalingAction, SmPartition,
                   function_capability, hgo)
from .kalman import KalmanState, predict_and_update
from .perf import PerfTable, load_table, save_table, validate_table_file
from .policies import POLICY_NAMES, make_policy
from .sim import (SLO_MULTIPLIERS, PodCostInterval, RequestRecord, RunMetrics,
                  SimConfig, build_cluster, compute_cost, execute_window, run)
from .trace import WorkloadTrace, load_trace, merge_traces, save_trace, synth_trace

__version__ = "0.1.0"

__all__ = [
    "ActionKind", "Autoscaler", "ClusterState", "FunctionSpec", "GpuDevice",
    "KERNEL_BACKEND", "KalmanState", "POLICY_NAMES", "PerfTable", "PodConfig",
    "PodCostInterval", "PodInstance", "PodState", "RequestRecord", "RunMetrics",
    "SLO_MULTIPLIERS", "ScalerConfig", "ScalingAction", "SimConfig", "SmPartition",
    "WorkloadTrace", "build_cluster", "compute_cost", "execute_window",
    "function_capability", "hgo", "load_table", "load_trace", "make_policy",
    "merge_traces", "predict_and_update", "run", "save_table", "save_trace",
    "synth_trace", "update_load_balancer_weights", "validate_table_file",
]
