"""Windowed p95 latency as the arrival rate approaches and passes checker capacity.

Runs in virtual time, so the output is deterministic.  With one checker and
2 ms of service, arrivals faster than one every 2 ms build an ever-growing
queue.

    python3 scripts/overload.py --users 10 --rates 100ms 20ms 10ms --service 2ms
"""

import argparse
import sys
from dataclasses import replace

from consentbench.genbench.config import format_duration, get_task, parse_duration
from consentbench.genbench.metrics import windowed_percentiles
from consentbench.genbench.runner import RunConfig, run_task


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--users", type=int, default=10)
    ap.add_argument("--rates", nargs="+", default=["100ms", "20ms", "10ms"], help="per-user event interval")
    ap.add_argument("--test-time", default="6s")
    ap.add_argument("--checkers", type=int, default=1)
    ap.add_argument("--service", default="2ms", help="injected check time")
    ap.add_argument("--window", type=int, default=500)
    a = ap.parse_args(argv)

    base = get_task("C-T2-1")
    service = parse_duration(a.service)
    for rate in a.rates:
        rate_ns = parse_duration(rate)
        spec = replace(base, task_id=f"overload-{rate}", users=a.users, rate_ns=rate_ns,
                       test_time_ns=parse_duration(a.test_time))
        res = run_task(spec, RunConfig(checkers=a.checkers, virtual_time=True, injected_delay_ns=service))
        load = a.users * service / (rate_ns * a.checkers)
        windows = windowed_percentiles([r.latency_ns for r in res.rows], a.window)
        series = " ".join(f"{p95 / 1e6:.1f}" for _, _, _, p95 in windows)
        print(f"interval {format_duration(rate_ns):>6s}  load {load:4.2f}  p95 per window (ms): {series}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
