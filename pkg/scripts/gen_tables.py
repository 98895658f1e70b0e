#!/usr/bin/env python3
"""Regenerates the shipped fixture perf tables under tables/.

The latency surface is a simple separable model chosen for plausible
shape: affine in batch, hyperbolic in quota (halving the quota doubles
wall-clock latency), and an SM penalty that saturates at the full device.
Monotone along every axis by construction.
"""

import csv
import os

AXES = {
    "batches": [1, 2, 4, 8],
    "sms": [25, 50, 75, 100],
    "quotas": [10, 20, 30, 40, 50, 60, 70, 80, 90, 100],
}

MODELS = {
    # function_id: (fixed_ms, per_item_ms, sm_floor, sm_weight)
    "resnet50": (8.0, 1.5, 0.35, 0.65),
    "bert-small": (15.0, 3.5, 0.25, 0.75),
}


def latency_ms(fixed, per_item, sm_floor, sm_weight, batch, sm, quota):
    compute = fixed + per_item * batch
    sm_penalty = sm_floor + sm_weight * (100.0 / sm)
    return compute * sm_penalty * (100.0 / quota)


def main():
    outdir = os.path.join(os.path.dirname(__file__), "..", "tables")
    os.makedirs(outdir, exist_ok=True)
    for fid, (fixed, per_item, sm_floor, sm_weight) in MODELS.items():
        path = os.path.join(outdir, f"{fid}.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["function_id", "batch", "sm_percent", "quota_percent",
                             "latency_ms"])
            for b in AXES["batches"]:
                for s in AXES["sms"]:
                    for q in AXES["quotas"]:
                        lat = latency_ms(fixed, per_item, sm_floor, sm_weight, b, s, q)
                        writer.writerow([fid, b, s, q, repr(lat)])
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
