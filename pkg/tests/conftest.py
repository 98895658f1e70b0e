import os
import random

import numpy as np
import pytest

from hybridscale import (ClusterState, FunctionSpec, PerfTable, PodConfig, PodInstance,
                         PodState, build_cluster)
from hybridscale import allocator

TABLES_DIR = os.path.join(os.path.dirname(__file__), "..", "tables")
FIXTURE_TABLES = [os.path.join(TABLES_DIR, name)
                  for name in ("resnet50.csv", "bert-small.csv")]


def conformance_caps(quota: int) -> float:
    """Throughput of the hand-trace table at sm=50: 30,50,...,210 rps."""
    return 2.0 * quota + 10.0


def make_conformance_table() -> PerfTable:
    """Small table with round capability numbers for hand-traced scenarios.

    sm=50 capability at quota q is 2q+10 rps (so cap(40)=90, cap(60)=130);
    sm=25 halves it. Latency derives from batch/cap.
    """
    quotas = list(range(10, 101, 10))
    sms = [25, 50]
    batches = [8]
    lat = np.zeros((1, 2, 10))
    for qi, q in enumerate(quotas):
        lat[0, 1, qi] = 8000.0 / conformance_caps(q)
        lat[0, 0, qi] = 2.0 * lat[0, 1, qi]
    return PerfTable("conf-fn", batches, sms, quotas, lat)


def random_monotone_table(rng: random.Random, nb=3, ns=3, nq=4,
                          function_id="rand-fn") -> PerfTable:
    batches = sorted(rng.sample(range(1, 33), nb))
    sms = sorted(rng.sample(range(5, 101), ns))
    quotas = sorted(rng.sample(range(5, 101), nq))
    lat = np.zeros((nb, ns, nq))
    # build monotone surface: grow along batch, shrink along sm/quota
    for bi in range(nb):
        for si in range(ns):
            for qi in range(nq):
                base = 5.0 + 3.0 * bi + rng.random()
                lat[bi, si, qi] = base * (1.0 + 0.5 * (ns - si)) * (1.0 + 0.3 * (nq - qi))
    # enforce monotonicity exactly by cumulative maxima along each axis
    for si in range(ns):
        for qi in range(nq):
            for bi in range(1, nb):
                lat[bi, si, qi] = max(lat[bi, si, qi], lat[bi - 1, si, qi])
    for bi in range(nb):
        for qi in range(nq):
            for si in range(1, ns):
                lat[bi, si, qi] = min(lat[bi, si, qi], lat[bi, si - 1, qi])
        for si in range(ns):
            for qi in range(1, nq):
                lat[bi, si, qi] = min(lat[bi, si, qi], lat[bi, si, qi - 1])
    return PerfTable(function_id, batches, sms, quotas, lat)


def place_running_pod(cluster: ClusterState, pod_id, function_id, batch, sm, quota,
                      gpu_id, capability=0.0) -> PodInstance:
    pod = PodInstance(pod_id, function_id, batch, sm, quota, gpu_id,
                      state=PodState.RUNNING, capability_rps=capability)
    allocator.place_pod(cluster, pod, gpu_id)
    return pod


@pytest.fixture
def conformance_table() -> PerfTable:
    return make_conformance_table()


@pytest.fixture
def small_cluster() -> ClusterState:
    return build_cluster(4)


@pytest.fixture(params=FIXTURE_TABLES, ids=["resnet50", "bert-small"])
def fixture_table(request) -> PerfTable:
    from hybridscale import load_table

    return load_table(request.param)


def make_function(function_id="conf-fn", baseline=20.0, batches=(8,),
                  initial=(8, 50, 20), min_rps=None) -> FunctionSpec:
    return FunctionSpec(
        function_id=function_id, baseline_latency_ms=baseline,
        perf_table_ref=function_id, min_rps=min_rps,
        allowed_batches=list(batches),
        initial=PodConfig(*initial))
