"""Experiment runner CLI.

    hybridscale run --config demo.yaml [--out DIR] [--set k=v ...] [--seed N]
    hybridscale validate-table TABLE.csv
    hybridscale predict TABLE.csv --batch B --sm S --quota Q

Exit codes: 0 ok, 1 validation findings, 2 bad config/table, 3 invariant
violation during a run. HAS_SCHED_LOG sets log verbosity (DEBUG/INFO/...).
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import traceback

from .config import ExperimentConfig, load_config
from .errors import ConfigError, InvariantViolation, SchedulerError, TableFormatError
from .perf import load_table, validate_table_file
from .sim import SLO_MULTIPLIERS, RunMetrics, build_cluster, run, write_metric_csvs

logger = logging.getLogger(__name__)

_SUMMARY_MULTIPLIERS = (1.5, 2.0, 2.5)


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("HAS_SCHED_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, TableFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print("invariant violation during run:", file=sys.stderr)
        print(f"  {exc}", file=sys.stderr)
        traceback.print_exc(file=sys.stderr)
        return 3
    except SchedulerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridscale",
        description="GPU-slice autoscaling simulator and policy comparison runner")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the configured scenarios")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default="out")
    p_run.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="SECTION.KEY=VALUE")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.set_defaults(func=cmd_run)

    p_val = sub.add_parser("validate-table", help="check a perf-table CSV")
    p_val.add_argument("path")
    p_val.set_defaults(func=cmd_validate_table)

    p_pred = sub.add_parser("predict", help="query latency/throughput for one config")
    p_pred.add_argument("table")
    p_pred.add_argument("--batch", type=float, required=True)
    p_pred.add_argument("--sm", type=float, required=True)
    p_pred.add_argument("--quota", type=float, required=True)
    p_pred.set_defaults(func=cmd_predict)
    return parser


# -- run ------------------------------------------------------------------


def cmd_run(args) -> int:
    config = load_config(args.config, overrides=args.overrides, seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    results = run_experiment(config, args.out)
    write_summary(results, os.path.join(args.out, "summary.csv"))
    print(f"wrote {len(results)} scenario runs under {args.out}")
    return 0


def run_experiment(config: ExperimentConfig, outdir) -> list[tuple[str, str, RunMetrics]]:
    """Runs every (scenario x policy) pair and writes per-run CSV directories."""
    results = []
    for scenario in config.scenarios:
        trace = scenario.trace.build(config.sim.seed)
        for policy in scenario.policies:
            cluster = build_cluster(
                config.cluster.gpus, total_sm_units=config.cluster.total_sm_units,
                window_ms=config.sim.window_ms,
                price_per_hour=config.cluster.price_per_hour,
                functions=config.functions)
            metrics = run(trace, config.functions, config.tables, cluster,
                          config.scaler, config.sim, policy,
                          kalman_params=config.kalman)
            rundir = os.path.join(outdir, f"{scenario.name}-{policy}")
            write_metric_csvs(metrics, rundir)
            logger.info("scenario %s policy %s: cost=%.4f", scenario.name, policy,
                        metrics.total_cost)
            results.append((scenario.name, policy, metrics))
    return results


def write_summary(results, path) -> None:
    """Per-function cross-policy summary; ratios are against the same
    scenario's hybrid run and recompute exactly from the per-run CSVs."""
    idx = {m: SLO_MULTIPLIERS.index(m) for m in _SUMMARY_MULTIPLIERS}
    hybrid = {(scenario, fid): metrics
              for scenario, policy, metrics in results if policy == "hybrid"
              for fid in metrics.violation_curve}
    header = ["scenario", "policy", "function_id", "total_cost", "cost_per_1k"]
    header += [f"violation_{m}x" for m in _SUMMARY_MULTIPLIERS]
    header += ["cost_ratio_vs_hybrid"]
    header += [f"violation_ratio_{m}x_vs_hybrid" for m in _SUMMARY_MULTIPLIERS]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for scenario, policy, metrics in results:
            for fid in sorted(metrics.violation_curve):
                rates = [metrics.violation_curve[fid][idx[m]]
                         for m in _SUMMARY_MULTIPLIERS]
                row = [scenario, policy, fid, repr(metrics.cost[fid]),
                       repr(metrics.cost_per_1k[fid])]
                row += [repr(r) for r in rates]
                base = hybrid.get((scenario, fid))
                if policy == "hybrid" or base is None:
                    row += [""] * (1 + len(_SUMMARY_MULTIPLIERS))
                else:
                    row.append(repr(_ratio(metrics.cost[fid], base.cost[fid])))
                    row += [repr(_ratio(r, base.violation_curve[fid][idx[m]]))
                            for r, m in zip(rates, _SUMMARY_MULTIPLIERS)]
                writer.writerow(row)


def _ratio(value: float, base: float) -> float:
    if base == 0.0:
        return float("nan") if value == 0.0 else float("inf")
    return value / base


# -- table utilities --------------------------------------------------------


def cmd_validate_table(args) -> int:
    report = validate_table_file(args.path)
    print(f"table: {args.path}")
    print(f"function: {report.function_id}")
    print(f"axes: batch={report.batches} sm={report.sms} quota={report.quotas}")
    if report.ok:
        expected = len(report.batches) * len(report.sms) * len(report.quotas)
        print(f"grid: complete ({expected} cells)")
        print("OK")
        return 0
    for issue in report.issues:
        print(f"{issue.kind}: {issue.message}")
    print(f"FAILED ({len(report.issues)} issues)")
    return 1


def cmd_predict(args) -> int:
    table = load_table(args.table)
    try:
        latency = table.predict_latency(args.batch, args.sm, args.quota)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rps = table.throughput(args.batch, args.sm, args.quota)
    print(f"latency_ms={latency!r}")
    print(f"throughput_rps={rps!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
