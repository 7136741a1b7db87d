"""Benchmark execution: produce a workload, check it, measure, write outputs.

Three execution modes share one pipeline (application-log topic, a group of
checkers, compliance-log topic):

* streaming: a producer releases each event at its due time while checker
  threads consume concurrently;
* batch: the whole workload is loaded first and the checkers drain it;
  latency is counted from the start of the drain;
* virtual time: no threads and no sleeping.  Each checker serves its
  partitions as one FIFO queue on its own simulated clock (start of service
  is the later of arrival and the end of the previous check; the injected
  delay is the service time).  Verdicts still come from the real checker.

All timestamps are nanoseconds since the start of the run.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import logging
import threading
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..broker import Broker, Checker, ConsentStore, Topic, run_checker, virtual_wallclock
from ..splog import ComplianceRecord, from_json, to_json
from ..vocab import Taxonomy, builtin_special
from .config import BATCH, TaskSpec
from .generate import EVENT_START, gen_consents, gen_events
from .metrics import SERIES_COLUMNS, LatencyRow, MetricsReport, compute_statistics, write_latencies
from .resources import ResourceSampler

log = logging.getLogger(__name__)

APP_TOPIC = "application-log"
COMPLIANCE_TOPIC = "compliance-log"
CHECKER_GROUP = "compliance-checkers"


@dataclass(frozen=True)
class RunConfig:
    checkers: int = 1
    partitions: int = 10
    injected_delay_ns: int | None = None
    virtual_time: bool = False
    seed: int = 42
    window: int = 1000
    warmup_fraction: float = 0.1
    cumulative: bool = False
    replication_factor: int = 2
    resource_interval: float | None = None  # seconds; None disables sampling
    write_events: bool = False
    timeout_s: float | None = None

    @property
    def injected_delay_s(self) -> float | None:
        return None if self.injected_delay_ns is None else self.injected_delay_ns / 1e9


@dataclass
class Workload:
    """Encoded records ready to produce; reusable across runs."""

    spec: TaskSpec
    consents: list[tuple[bytes, bytes]]
    events: list[tuple[bytes, bytes, int]]  # key, value, due offset (ns)
    labels: dict[str, bool] = field(default_factory=dict)

    @property
    def expected_compliant(self) -> int:
        return sum(self.labels.values())


def prepare_workload(spec: TaskSpec, seed: int = 42, taxonomy: Taxonomy | None = None) -> Workload:
    t = taxonomy or builtin_special()
    cfg = spec.gen_config(seed)
    consents = gen_consents(cfg, t)
    w = Workload(spec, [(user.encode(), to_json(e, t.prefixes)) for user, e in consents], [])
    for g in gen_events(cfg, consents, t):
        w.events.append((g.entry.data_subject.encode(), to_json(g.entry, t.prefixes), g.offset_ns))
        w.labels[g.entry.entry_id] = g.compliant
    return w


class RunClock:
    """Reads 0 until started, then nanoseconds since the start."""

    def __init__(self):
        self._t0: int | None = None

    def start(self) -> None:
        self._t0 = time.monotonic_ns()

    def __call__(self) -> int:
        return 0 if self._t0 is None else time.monotonic_ns() - self._t0


@dataclass
class RunResult:
    report: MetricsReport
    rows: list[LatencyRow]
    broker: Broker
    assignment: dict[int, str]
    out_dir: Path | None = None


def _setup(rc: RunConfig, clock) -> tuple[Broker, Topic, Topic]:
    broker = Broker(clock)
    app = broker.create_topic(APP_TOPIC, rc.partitions, rc.replication_factor)
    comp = broker.create_topic(COMPLIANCE_TOPIC, rc.partitions, rc.replication_factor)
    return broker, app, comp


def _checker_ids(n: int) -> list[str]:
    return [f"checker-{i:02d}" for i in range(n)]


def _run_virtual(w: Workload, rc: RunConfig, t: Taxonomy):
    broker, app, comp = _setup(rc, lambda: 0)
    for key, value in w.consents:
        app.produce(key, value, enqueue_time=0)
    batch = w.spec.scenario == BATCH
    for key, value, offset in w.events:
        app.produce(key, value, enqueue_time=0 if batch else offset)
    group = broker.group(CHECKER_GROUP, APP_TOPIC)
    ids = _checker_ids(rc.checkers)
    for cid in ids:
        group.join(cid)
    store = ConsentStore()
    service = rc.injected_delay_ns or 0
    for cid in ids:
        now = [0]

        def advance(_seconds, now=now):
            now[0] += service

        checker = Checker(cid, store, t, comp, rc.injected_delay_s, clock=lambda now=now: now[0],
                          sleep=advance, wallclock=virtual_wallclock(EVENT_START, lambda now=now: now[0]))
        queues = [app.partitions[p] for p in group.assigned(cid)]
        for rec in heapq.merge(*queues, key=lambda r: (r.enqueue_time, r.partition, r.offset)):
            now[0] = max(now[0], rec.enqueue_time)
            checker.handle(rec)
            group.commit(cid, rec.partition, rec.offset)
    return broker, comp, dict(group.assignment), ids


def _wait_for(comp: Topic, expected: int, deadline: float, checkers: list[threading.Thread]) -> None:
    while len(comp) < expected:
        if time.monotonic() > deadline:
            raise TimeoutError(f"only {len(comp)} of {expected} results before the deadline")
        if not any(th.is_alive() for th in checkers):
            raise RuntimeError("all checker threads exited early")
        time.sleep(0.02)


def _run_threaded(w: Workload, rc: RunConfig, t: Taxonomy):
    clock = RunClock()
    broker, app, comp = _setup(rc, clock)
    batch = w.spec.scenario == BATCH
    for key, value in w.consents:
        app.produce(key, value)
    if batch:
        for key, value, _ in w.events:
            app.produce(key, value)
    group = broker.group(CHECKER_GROUP, APP_TOPIC)
    ids = _checker_ids(rc.checkers)
    for cid in ids:
        group.join(cid)
    store = ConsentStore()
    stop = threading.Event()
    threads = []
    for cid in ids:
        checker = Checker(cid, store, t, comp, rc.injected_delay_s, clock=clock,
                          wallclock=virtual_wallclock(EVENT_START, clock))
        th = threading.Thread(target=run_checker, name=cid, daemon=True,
                              args=(cid, group, comp, store, t),
                              kwargs={"stop": stop, "checker": checker})
        threads.append(th)
    horizon = 0 if batch or not w.events else w.events[-1][2] / 1e9
    timeout = rc.timeout_s or 120 + 10 * horizon + len(w.events) * (rc.injected_delay_s or 0) * 2
    deadline = time.monotonic() + timeout
    clock.start()
    for th in threads:
        th.start()
    try:
        if not batch:
            for key, value, offset in w.events:
                ahead = offset - clock()
                if ahead > 0:
                    time.sleep(ahead / 1e9)
                app.produce(key, value)
        _wait_for(comp, len(w.events), deadline, threads)
    finally:
        stop.set()
        for th in threads:
            th.join()
    return broker, comp, dict(group.assignment), ids


def _collect(comp: Topic, w: Workload, t: Taxonomy) -> tuple[list[LatencyRow], int, int]:
    seen: dict[str, LatencyRow] = {}
    duplicates = errors = 0
    for rec in sorted(comp.records(), key=lambda r: (r.enqueue_time, r.partition, r.offset)):
        cr = from_json(rec.value, t.prefixes)
        assert isinstance(cr, ComplianceRecord)
        if cr.entry is None:
            errors += 1
            continue
        eid = cr.entry.entry_id
        if eid in seen:
            duplicates += 1
            continue
        done = rec.enqueue_time
        seen[eid] = LatencyRow(eid, done - cr.latency_ns, done, cr.latency_ns, cr.compliant,
                               cr.checker_id, w.labels.get(eid))
    return list(seen.values()), duplicates, errors


def verdict_digest(rows: list[LatencyRow]) -> str:
    lines = sorted(f"{r.event_id}:{int(r.compliant)}" for r in rows)
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()


def run_task(
    spec: TaskSpec,
    rc: RunConfig = RunConfig(),
    out_dir: str | Path | None = None,
    taxonomy: Taxonomy | None = None,
    workload: Workload | None = None,
) -> RunResult:
    """Run one task end to end; writes its outputs when ``out_dir`` is given."""
    t = taxonomy or builtin_special()
    w = workload or prepare_workload(spec, rc.seed, t)
    sampler = ResourceSampler(rc.resource_interval) if rc.resource_interval else None
    if sampler:
        sampler.start()
    try:
        if rc.virtual_time:
            broker, comp, assignment, ids = _run_virtual(w, rc, t)
        else:
            broker, comp, assignment, ids = _run_threaded(w, rc, t)
    finally:
        if sampler:
            sampler.stop()
    rows, duplicates, errors = _collect(comp, w, t)
    stats = compute_statistics(rows, rc.window, rc.warmup_fraction, rc.cumulative)
    per_checker = {cid: 0 for cid in ids}
    for r in rows:
        per_checker[r.checker_id] += 1
    report = MetricsReport(
        task=spec.to_dict(),
        checkers=rc.checkers,
        partitions=rc.partitions,
        virtual_time=rc.virtual_time,
        injected_delay_ms=None if rc.injected_delay_ns is None else rc.injected_delay_ns / 1e6,
        seed=rc.seed,
        statistics=stats,
        per_checker=per_checker,
        storage_bytes={
            APP_TOPIC: broker.topic(APP_TOPIC).storage_bytes(),
            COMPLIANCE_TOPIC: comp.storage_bytes(),
            "replicationFactor": rc.replication_factor,
        },
        expected_compliant=w.expected_compliant,
        duplicates=duplicates,
        errors=errors,
        cpu_samples=sampler.cpu if sampler else [],
        mem_samples=sampler.rss if sampler else [],
        resources=sampler.status if sampler else "disabled",
        warmup_fraction=rc.warmup_fraction,
        label_mismatches=sum(r.compliant != r.label for r in rows if r.label is not None),
    )
    result = RunResult(report, rows, broker, assignment)
    if out_dir is not None:
        result.out_dir = write_outputs(result, Path(out_dir), rc)
    return result


def write_outputs(result: RunResult, out: Path, rc: RunConfig) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    report = result.report
    body = report.to_dict()
    body["verdictDigest"] = verdict_digest(result.rows)
    body["assignment"] = {str(p): m for p, m in sorted(result.assignment.items())}
    (out / "report.json").write_text(json.dumps(body, indent=2) + "\n")
    write_latencies(out / "latencies.csv", result.rows)
    with open(out / "series.csv", "w") as f:
        f.write(",".join(SERIES_COLUMNS) + "\n")
        for s in report.percentile_series:
            f.write(f"{s['end']},{s['p50Ms']!r},{s['p75Ms']!r},{s['p95Ms']!r}\n")
    with open(out / "throughput.csv", "w") as f:
        f.write("second,events\n")
        for s in report.throughput_series:
            f.write(f"{s['second']},{s['events']}\n")
    inspect = {name: result.broker.inspect(name) for name in (APP_TOPIC, COMPLIANCE_TOPIC)}
    (out / "broker.json").write_text(json.dumps(inspect, indent=2) + "\n")
    if rc.write_events:
        with open(out / "events.jsonl", "wb") as f:
            for rec in result.broker.topic(APP_TOPIC).records():
                f.write(rec.value + b"\n")
    return out


def with_checkers(rc: RunConfig, n: int) -> RunConfig:
    return replace(rc, checkers=n)
