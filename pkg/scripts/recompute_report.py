"""Recompute headline statistics of a run from latencies.csv alone.

Standalone on purpose: it shares no code with the package, so agreement with
report.json is an independent check.

    python3 scripts/recompute_report.py runs/C-T1-1@scale100
"""

import argparse
import csv
import json
import math
import sys
from fractions import Fraction
from pathlib import Path


def nearest_rank(sorted_values, p):
    k = max(1, math.ceil(Fraction(str(p)) * len(sorted_values) / 100))
    return sorted_values[k - 1]


def summarize(rows, warmup_fraction):
    lat = [int(r["latency_ns"]) for r in rows]
    ordered = sorted(lat)
    warm = math.floor(Fraction(str(warmup_fraction)) * len(lat))
    steady = sorted(lat[warm:] or lat)
    span = max(int(r["done_ns"]) for r in rows) - min(int(r["enqueue_ns"]) for r in rows)
    return {
        "count": len(lat),
        "compliantCount": sum(r["compliant"] == "1" for r in rows),
        "medianMs": nearest_rank(ordered, 50) / 1e6,
        "p75Ms": nearest_rank(ordered, 75) / 1e6,
        "p95Ms": nearest_rank(ordered, 95) / 1e6,
        "maxMs": ordered[-1] / 1e6,
        "warmupEvents": warm,
        "postWarmup": {"count": len(steady), "medianMs": nearest_rank(steady, 50) / 1e6,
                       "p95Ms": nearest_rank(steady, 95) / 1e6},
        "throughputEps": len(lat) * 1e9 / span if span > 0 else None,
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("run_dir", type=Path, help="directory holding latencies.csv and report.json")
    a = ap.parse_args(argv)
    with open(a.run_dir / "latencies.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    report = json.loads((a.run_dir / "report.json").read_text())
    ours = summarize(rows, report.get("warmup_fraction", 0.1))
    theirs = report["statistics"]
    bad = [k for k, v in ours.items() if theirs.get(k) != v]
    for k, v in ours.items():
        print(f"{k:15s} {json.dumps(v):>40s}  {'ok' if k not in bad else 'MISMATCH ' + json.dumps(theirs.get(k))}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
