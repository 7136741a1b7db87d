"""Latency percentiles, windowed series, throughput and the report statistics.

Statistics are a pure function of the latency rows, so a report can be
recomputed from ``latencies.csv`` alone and compared value by value.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from ..errors import EmptyInput

NS_PER_MS = 1_000_000
NS_PER_S = 1_000_000_000
LATENCY_COLUMNS = ("event_id", "enqueue_ns", "done_ns", "latency_ns", "compliant")
SERIES_COLUMNS = ("window_end", "p50_ms", "p75_ms", "p95_ms")


def _rank(p: float, n: int) -> int:
    if not 0 <= p <= 100:
        raise ValueError(f"percentile {p} outside [0, 100]")
    return max(1, math.ceil(Fraction(str(p)) * n / 100))


def percentile(values: Sequence, p: float):
    """Nearest-rank percentile: the ceil(p/100 * n)-th smallest value."""
    if not values:
        raise EmptyInput("percentile of an empty sample")
    return sorted(values)[_rank(p, len(values)) - 1]


def windowed_percentiles(
    latencies: Sequence, window: int = 1000, cumulative: bool = False
) -> list[tuple[int, object, object, object]]:
    """(end index, p50, p75, p95) per disjoint window of ``window`` events.

    A trailing partial window yields a final row.  With ``cumulative`` each
    row covers every event up to its end index.
    """
    if window < 1:
        raise ValueError("window must be positive")
    rows = []
    for start in range(0, len(latencies), window):
        end = min(start + window, len(latencies))
        chunk = sorted(latencies[0 if cumulative else start:end])
        n = len(chunk)
        rows.append((end, chunk[_rank(50, n) - 1], chunk[_rank(75, n) - 1], chunk[_rank(95, n) - 1]))
    return rows


@dataclass(frozen=True)
class LatencyRow:
    event_id: str
    enqueue_ns: int
    done_ns: int
    latency_ns: int
    compliant: bool
    # not written to latencies.csv
    checker_id: str = ""
    label: bool | None = None

    def __post_init__(self):
        if self.done_ns - self.enqueue_ns != self.latency_ns:
            raise ValueError(f"{self.event_id}: latency disagrees with its timestamps")


def write_latencies(path: str | Path, rows: Sequence[LatencyRow]) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(LATENCY_COLUMNS)
        for r in rows:
            w.writerow([r.event_id, r.enqueue_ns, r.done_ns, r.latency_ns, int(r.compliant)])


def read_latencies(path: str | Path) -> list[LatencyRow]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != LATENCY_COLUMNS:
            raise ValueError(f"{path}: expected columns {','.join(LATENCY_COLUMNS)}")
        return [
            LatencyRow(r["event_id"], int(r["enqueue_ns"]), int(r["done_ns"]),
                       int(r["latency_ns"]), r["compliant"] == "1")
            for r in reader
        ]


def _ms(ns) -> float:
    return ns / NS_PER_MS


def throughput_series(rows: Sequence[LatencyRow]) -> list[tuple[int, int]]:
    """Completed events per whole second since the first enqueue, zero seconds included."""
    if not rows:
        return []
    t0 = min(r.enqueue_ns for r in rows)
    counts: dict[int, int] = {}
    for r in rows:
        s = (r.done_ns - t0) // NS_PER_S
        counts[s] = counts.get(s, 0) + 1
    return [(s, counts.get(s, 0)) for s in range(max(counts) + 1)]


def compute_statistics(
    rows: Sequence[LatencyRow],
    window: int = 1000,
    warmup_fraction: float = 0.1,
    cumulative: bool = False,
) -> dict:
    """Report statistics from latency rows in completion order."""
    if not rows:
        return {"count": 0, "note": "empty run: no completed events"}
    lat = [r.latency_ns for r in rows]
    n = len(lat)
    warmup = math.floor(Fraction(str(warmup_fraction)) * n)
    steady = lat[warmup:] or lat
    span_ns = max(r.done_ns for r in rows) - min(r.enqueue_ns for r in rows)
    return {
        "count": n,
        "compliantCount": sum(r.compliant for r in rows),
        "medianMs": _ms(percentile(lat, 50)),
        "meanMs": _ms(sum(lat) / n),
        "p75Ms": _ms(percentile(lat, 75)),
        "p95Ms": _ms(percentile(lat, 95)),
        "maxMs": _ms(max(lat)),
        "warmupEvents": warmup,
        "postWarmup": {
            "count": len(steady),
            "medianMs": _ms(percentile(steady, 50)),
            "p95Ms": _ms(percentile(steady, 95)),
        },
        "spanS": span_ns / NS_PER_S,
        "throughputEps": n * NS_PER_S / span_ns if span_ns > 0 else None,
        "window": window,
        "cumulative": cumulative,
        "percentileSeries": [
            {"end": end, "p50Ms": _ms(a), "p75Ms": _ms(b), "p95Ms": _ms(c)}
            for end, a, b, c in windowed_percentiles(lat, window, cumulative)
        ],
        "throughputSeries": [{"second": s, "events": k} for s, k in throughput_series(rows)],
    }


def recompute_statistics(path: str | Path, window: int = 1000, warmup_fraction: float = 0.1,
                         cumulative: bool = False) -> dict:
    return compute_statistics(read_latencies(path), window, warmup_fraction, cumulative)


@dataclass
class MetricsReport:
    task: dict
    checkers: int
    partitions: int
    virtual_time: bool
    injected_delay_ms: float | None
    seed: int
    statistics: dict
    per_checker: dict[str, int]
    storage_bytes: dict[str, int]
    expected_compliant: int
    duplicates: int = 0
    errors: int = 0
    cpu_samples: list[float] = field(default_factory=list)
    mem_samples: list[int] = field(default_factory=list)
    resources: str = "disabled"
    warmup_fraction: float = 0.1
    label_mismatches: int = 0

    @property
    def count(self) -> int:
        return self.statistics["count"]

    @property
    def median_ms(self) -> float | None:
        return self.statistics.get("medianMs")

    @property
    def mean_ms(self) -> float | None:
        return self.statistics.get("meanMs")

    @property
    def throughput_total_eps(self) -> float | None:
        return self.statistics.get("throughputEps")

    @property
    def percentile_series(self) -> list[dict]:
        return self.statistics.get("percentileSeries", [])

    @property
    def throughput_series(self) -> list[dict]:
        return self.statistics.get("throughputSeries", [])

    @property
    def warmup_events(self) -> int:
        return self.statistics.get("warmupEvents", 0)

    def to_dict(self) -> dict:
        return asdict(self)
