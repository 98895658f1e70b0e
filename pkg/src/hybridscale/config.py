"""Experiment configuration: one YAML file with sections
functions / cluster / scaler / kalman / sim / scenarios.

`--set section.key=value` overrides are applied to the raw mapping before
validation, so sweeps never need edited files.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any, Optional

import yaml

from .autoscaler import ScalerConfig
from .core import FunctionSpec, PodConfig
from .errors import ConfigError
from .perf import PerfTable, load_table
from .sim import SimConfig
from .trace import WorkloadTrace, load_trace, merge_traces, synth_trace

_SECTIONS = {"functions", "cluster", "scaler", "kalman", "sim", "scenarios"}


@dataclass
class ClusterSpec:
    gpus: int = 4
    total_sm_units: int = 80
    price_per_hour: float = 2.48


@dataclass
class TraceSpec:
    file: Optional[str] = None
    horizon_ms: float = 60_000.0
    synth: list[dict] = field(default_factory=list)

    def build(self, seed: int) -> WorkloadTrace:
        if self.file:
            return load_trace(self.file)
        parts = []
        for i, spec in enumerate(sorted(self.synth, key=lambda s: s["function"])):
            params = {k: v for k, v in spec.items() if k not in ("function", "kind")}
            parts.append(synth_trace(spec["kind"], params, seed + i,
                                     function_id=spec["function"],
                                     horizon_ms=self.horizon_ms))
        return merge_traces(parts) if parts else WorkloadTrace([], self.horizon_ms)


@dataclass
class ScenarioSpec:
    name: str
    policies: list[str]
    trace: TraceSpec


@dataclass
class ExperimentConfig:
    functions: list[FunctionSpec]
    tables: dict[str, PerfTable]
    cluster: ClusterSpec
    scaler: ScalerConfig
    kalman: dict[str, float]
    sim: SimConfig
    scenarios: list[ScenarioSpec]


def apply_overrides(raw: dict, overrides: list[str]) -> dict:
    """Applies `section.key=value` strings; values parse as YAML scalars."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        path, _, value = item.partition("=")
        keys = path.strip().split(".")
        node = raw
        for key in keys[:-1]:
            if not isinstance(node.get(key), dict):
                node[key] = {}
            node = node[key]
        node[keys[-1]] = yaml.safe_load(value)
    return raw


def load_config(path, overrides: Optional[list[str]] = None,
                seed: Optional[int] = None) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(str(exc)) from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    raw = apply_overrides(raw, overrides or [])
    if seed is not None:
        raw.setdefault("sim", {})["seed"] = seed
    return parse_config(raw, base_dir=os.path.dirname(os.path.abspath(path)))


def parse_config(raw: dict, base_dir: str = ".") -> ExperimentConfig:
    unknown = set(raw) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown config sections {sorted(unknown)}")

    functions, tables = _parse_functions(raw.get("functions") or [], base_dir)
    cluster = _build(ClusterSpec, raw.get("cluster") or {}, "cluster")
    scaler = _build(ScalerConfig, raw.get("scaler") or {}, "scaler")
    sim = _build(SimConfig, raw.get("sim") or {}, "sim")
    kalman = _parse_kalman(raw.get("kalman") or {})
    scenarios = _parse_scenarios(raw.get("scenarios") or [], base_dir)
    if not functions:
        raise ConfigError("config defines no functions")
    if cluster.gpus < 1:
        raise ConfigError("cluster.gpus must be at least 1")
    return ExperimentConfig(functions=functions, tables=tables, cluster=cluster,
                            scaler=scaler, kalman=kalman, sim=sim,
                            scenarios=scenarios)


def _build(cls, section: dict, name: str):
    if not isinstance(section, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    allowed = set(cls.__dataclass_fields__)
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"{name}: unknown keys {sorted(unknown)}")
    try:
        return cls(**section)
    except (TypeError, ValueError, ConfigError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def _parse_kalman(section: dict) -> dict[str, float]:
    allowed = {"A", "Q", "H", "D", "P0"}
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"kalman: unknown keys {sorted(unknown)}")
    defaults = {"A": 1.0, "Q": 4.0, "H": 1.0, "D": 16.0, "P0": 1.0}
    defaults.update({k: float(v) for k, v in section.items()})
    return defaults


def _parse_functions(entries: list, base_dir: str):
    functions: list[FunctionSpec] = []
    tables: dict[str, PerfTable] = {}
    for entry in entries:
        if not isinstance(entry, dict) or "id" not in entry:
            raise ConfigError(f"functions entry must be a mapping with an id: {entry}")
        init = entry.get("initial") or {}
        initial = PodConfig(
            batch=int(init.get("batch", 1)), sm_percent=int(init.get("sm", 50)),
            quota_percent=int(init.get("quota", 20)),
            replicas=int(init.get("replicas", 1)))
        table_path = entry.get("perf_table")
        if not table_path:
            raise ConfigError(f"function {entry['id']}: perf_table is required")
        table_path = os.path.join(base_dir, table_path)
        if not os.path.exists(table_path):
            raise ConfigError(f"function {entry['id']}: missing perf table {table_path}")
        table = load_table(table_path)
        ref = entry["id"]
        tables[ref] = table
        spec = FunctionSpec(
            function_id=entry["id"],
            baseline_latency_ms=float(entry.get("baseline_latency_ms", 0.0)),
            slo_multiplier=float(entry.get("slo_multiplier", 2.0)),
            perf_table_ref=ref,
            min_rps=(float(entry["min_rps"]) if "min_rps" in entry else None),
            allowed_batches=[int(b) for b in entry.get("allowed_batches", [initial.batch])],
            initial=initial)
        if spec.baseline_latency_ms <= 0:
            raise ConfigError(f"function {spec.function_id}: baseline_latency_ms "
                              "must be positive")
        functions.append(spec)
    ids = [f.function_id for f in functions]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"duplicate function ids in config: {ids}")
    return functions, tables


def _parse_scenarios(entries: list, base_dir: str) -> list[ScenarioSpec]:
    scenarios = []
    for entry in entries:
        if not isinstance(entry, dict) or "name" not in entry:
            raise ConfigError(f"scenario entry must be a mapping with a name: {entry}")
        trace_raw: dict[str, Any] = entry.get("trace") or {}
        trace = TraceSpec(
            file=(os.path.join(base_dir, trace_raw["file"])
                  if trace_raw.get("file") else None),
            horizon_ms=float(trace_raw.get("horizon_ms", 60_000.0)),
            synth=list(trace_raw.get("synth") or []))
        policies = entry.get("policies") or ["hybrid"]
        scenarios.append(ScenarioSpec(name=str(entry["name"]),
                                      policies=[str(p) for p in policies],
                                      trace=trace))
    names = [s.name for s in scenarios]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate scenario names: {names}")
    return scenarios
