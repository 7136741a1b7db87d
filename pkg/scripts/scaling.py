"""Batch throughput against the number of compliance checkers.

Preloads one batch task, then drains it with each checker count in turn.

    python3 scripts/scaling.py --task C-T5-1 --checkers 1 5 10 --inject-delay 1ms
"""

import argparse
import csv
import sys
import time

from consentbench.genbench.config import get_task, parse_duration
from consentbench.genbench.runner import RunConfig, prepare_workload, run_task


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--task", default="C-T5-1")
    ap.add_argument("--checkers", type=int, nargs="+", default=[1, 5, 10])
    ap.add_argument("--partitions", type=int, default=10)
    ap.add_argument("--inject-delay", default="1ms")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--csv", help="also write the table here")
    a = ap.parse_args(argv)

    spec = get_task(a.task)
    t0 = time.perf_counter()
    w = prepare_workload(spec, a.seed)
    print(f"{spec.task_id}: {len(w.events)} events prepared in {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    delay = parse_duration(a.inject_delay, allow_zero=True) or None
    rows = []
    for n in a.checkers:
        rc = RunConfig(checkers=n, partitions=a.partitions, injected_delay_ns=delay, seed=a.seed)
        rep = run_task(spec, rc, workload=w).report
        busiest = max(rep.per_checker.values())
        rows.append((n, rep.throughput_total_eps, rep.median_ms, busiest))
        print(f"checkers={n:3d}  throughput={rep.throughput_total_eps:9.1f} ev/s  "
              f"median={rep.median_ms:10.1f} ms  busiest checker={busiest}", flush=True)
    base = rows[0][1]
    for n, eps, _, _ in rows[1:]:
        print(f"speedup {rows[0][0]} -> {n}: x{eps / base:.2f}")
    if a.csv:
        with open(a.csv, "w", newline="") as f:
            out = csv.writer(f)
            out.writerow(["checkers", "throughput_eps", "median_ms", "busiest_checker_events"])
            out.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
