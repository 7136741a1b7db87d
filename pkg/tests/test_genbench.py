import csv
import itertools
import json
import random
import time
from dataclasses import replace
from datetime import timedelta
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from consentbench.errors import BadDuration, ConfigError, EmptyInput
from consentbench.genbench.config import (
    BATCH,
    TASKS,
    GenConfig,
    format_duration,
    get_task,
    parse_duration,
)
from consentbench.genbench.generate import EVENT_START, gen_consents, gen_events, is_compliant_slot
from consentbench.genbench.metrics import (
    LatencyRow,
    compute_statistics,
    percentile,
    read_latencies,
    recompute_statistics,
    throughput_series,
    windowed_percentiles,
)
from consentbench.genbench.resources import ResourceSampler
from consentbench.genbench.runner import RunConfig, run_task
from consentbench.reasoner import complies
from consentbench.splog import from_json, to_json
from consentbench.vocab import builtin_special

T = builtin_special()


def _ns(td: timedelta) -> int:
    return td // timedelta(microseconds=1) * 1000


def test_parse_duration_examples():
    assert parse_duration("1m30s") == _ns(timedelta(minutes=1, seconds=30))
    assert parse_duration("10ms") == _ns(timedelta(milliseconds=10))
    assert parse_duration("250us") == parse_duration("250µs") == 250_000
    assert parse_duration("2h") == _ns(timedelta(hours=2))
    assert parse_duration("7ns") == 7
    assert parse_duration("0s", allow_zero=True) == 0


@pytest.mark.parametrize("bad", ["", "10", "1x", "s", "1s 2ms", "-1s", "0s", "1.5s"])
def test_parse_duration_rejects(bad):
    with pytest.raises(BadDuration):
        parse_duration(bad)


@given(st.integers(1, 10**15))
def test_format_parse_round_trip(ns):
    assert parse_duration(format_duration(ns)) == ns


def test_task_table_counts():
    assert len(TASKS) == 25
    assert TASKS["C-T4-4"].event_count() == 1_200_000
    assert TASKS["C-T1-1"].event_count() == 120_000
    assert TASKS["C-T4-5"].rate_ns == parse_duration("100ms")
    assert TASKS["C-T5-2"].event_count() == 1_000_000
    assert get_task("C-T1-1@scale100").event_count() == 10
    assert get_task("C-T1-1@scale10").event_count() == 100 * 12
    assert get_task("C-T5-1@scale10").events == 10_000
    with pytest.raises(ConfigError):
        get_task("C-T6-1")


def test_unbounded_generator_streams():
    cfg = GenConfig(users=3, events=0)
    assert cfg.event_count() is None
    consents = gen_consents(cfg, T)
    first = list(itertools.islice(gen_events(cfg, consents, T), 50))
    assert [g.index for g in first] == list(range(50))


def test_due_offsets_spread_users_within_a_round():
    cfg = GenConfig(users=4, rate_ns=1000, test_time_ns=3000)
    events = list(gen_events(cfg, gen_consents(cfg, T), T))
    assert len(events) == 12
    assert [g.offset_ns for g in events[:5]] == [0, 250, 500, 750, 1000]
    assert [g.entry.data_subject for g in events[:5]] == ["user0", "user1", "user2", "user3", "user0"]
    assert events[0].entry.validity_time == EVENT_START


def test_generator_is_deterministic():
    cfg = GenConfig(users=5, events=200, seed=9)
    a = [to_json(g.entry) for g in gen_events(cfg, gen_consents(cfg, T), T)]
    b = [to_json(g.entry) for g in gen_events(cfg, gen_consents(cfg, T), T)]
    other = replace(cfg, seed=10)
    c = [to_json(g.entry) for g in gen_events(other, gen_consents(other, T), T)]
    assert a == b and a != c


@pytest.mark.parametrize("ratio", [0, 25, 50, 75, 100, 33.3])
def test_pass_ratio_labels_are_exact(ratio):
    cfg = GenConfig(users=20, events=1000, pass_ratio=ratio)
    consents = gen_consents(cfg, T)
    by_user = dict(consents)
    events = list(gen_events(cfg, consents, T))
    assert sum(g.compliant for g in events) == 1000 * Fraction(str(ratio)) // 100
    for g in events:
        verdict = complies(g.entry.content, by_user[g.entry.data_subject].content, T)
        assert verdict.compliant == g.compliant


def test_slot_prefixes_track_the_ratio():
    r = Fraction(1, 3) * 100
    for n in range(1, 200):
        assert sum(is_compliant_slot(i, r) for i in range(n)) == n * r // 100


def test_sharing_events_carry_recipients():
    cfg = GenConfig(users=5, events=500)
    events = [g.entry for g in gen_events(cfg, gen_consents(cfg, T), T)]
    sharing = [e for e in events if e.recipient_instances]
    assert 50 < len(sharing) < 150
    assert all(e.recipient_instances[0].startswith("org-") for e in sharing)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-10**6, 10**6), min_size=1, max_size=300), st.sampled_from([0, 1, 25, 50, 75, 95, 99, 100]))
def test_percentile_matches_reference(values, p):
    expected = np.percentile(np.array(values), p, method="inverted_cdf")
    assert percentile(values, p) == expected


def test_percentile_edge_cases():
    assert percentile([5], 95) == 5
    assert percentile([1, 2, 3, 4], 50) == 2
    assert percentile([1, 2, 3, 4], 0) == 1
    with pytest.raises(EmptyInput):
        percentile([], 50)


def test_windows_with_trailing_partial():
    lat = list(range(1, 2501))
    rows = windowed_percentiles(lat, 1000)
    assert [r[0] for r in rows] == [1000, 2000, 2500]
    assert rows[2][1:] == (2250, 2375, 2475)
    cum = windowed_percentiles(lat, 1000, cumulative=True)
    assert cum[-1][1] == percentile(lat, 50)


def _rows(lat_ms, start=0):
    return [LatencyRow(f"e{i}", start + i * 1_000_000, start + i * 1_000_000 + v * 1_000_000, v * 1_000_000, i % 2 == 0)
            for i, v in enumerate(lat_ms)]


def test_statistics_and_throughput():
    rows = _rows([1] * 10)
    stats = compute_statistics(rows, window=4, warmup_fraction=0.2)
    assert stats["count"] == 10 and stats["compliantCount"] == 5
    assert stats["medianMs"] == 1.0 and stats["warmupEvents"] == 2
    assert stats["spanS"] == pytest.approx(0.010)
    assert stats["throughputEps"] == pytest.approx(1000.0)
    assert [s["end"] for s in stats["percentileSeries"]] == [4, 8, 10]
    assert throughput_series(rows) == [(0, 10)]
    assert compute_statistics([])["count"] == 0
    with pytest.raises(ValueError):
        LatencyRow("x", 10, 20, 5, True)


def test_small_virtual_run_matches_labels(tmp_path):
    spec = get_task("C-T3-2@scale10")
    res = run_task(spec, RunConfig(checkers=3, partitions=4, virtual_time=True, injected_delay_ns=10**6),
                   out_dir=tmp_path)
    rep = res.report
    assert rep.count == spec.event_count() == 1200
    assert rep.statistics["compliantCount"] == 300 == rep.expected_compliant
    assert rep.label_mismatches == 0 and rep.duplicates == 0
    stored = json.loads((tmp_path / "report.json").read_text())
    assert stored["statistics"] == recompute_statistics(tmp_path / "latencies.csv")
    with open(tmp_path / "latencies.csv") as f:
        assert next(csv.reader(f)) == ["event_id", "enqueue_ns", "done_ns", "latency_ns", "compliant"]
    assert len(read_latencies(tmp_path / "latencies.csv")) == 1200


def test_virtual_runs_are_reproducible():
    spec = get_task("C-T2-1@scale10")
    rc = RunConfig(checkers=2, partitions=3, virtual_time=True, injected_delay_ns=500_000)
    a, b = run_task(spec, rc), run_task(spec, rc)
    assert [r.latency_ns for r in a.rows] == [r.latency_ns for r in b.rows]


def test_threaded_batch_run_completes():
    spec = replace(get_task("C-T5-1"), task_id="tiny", users=7, events=300)
    res = run_task(spec, RunConfig(checkers=3, partitions=5))
    assert res.report.count == 300
    assert res.report.label_mismatches == 0
    assert sum(res.report.per_checker.values()) == 300


def test_streaming_run_respects_pacing():
    spec = replace(get_task("C-T1-1"), users=5, rate_ns=parse_duration("20ms"), test_time_ns=parse_duration("200ms"))
    t0 = time.monotonic()
    res = run_task(spec, RunConfig(checkers=2, partitions=2))
    assert time.monotonic() - t0 >= 0.18
    assert res.report.count == 50
    assert min(r.enqueue_ns for r in res.rows[5:]) > 0


def test_events_dump_matches_storage(tmp_path):
    spec = get_task("C-T1-1@scale100")
    res = run_task(spec, RunConfig(virtual_time=True, write_events=True), out_dir=tmp_path)
    lines = (tmp_path / "events.jsonl").read_bytes().splitlines()
    entries = [from_json(x) for x in lines]
    raw = sum(len(x) + len(e.data_subject.encode()) + 16 for x, e in zip(lines, entries))
    assert res.report.storage_bytes["application-log"] == 2 * raw


def test_resource_sampler_sees_cpu():
    s = ResourceSampler(0.05).start()
    end = time.monotonic() + 0.4
    x = 0
    while time.monotonic() < end:
        x += 1
    s.stop()
    assert s.status == "ok"
    assert s.cpu and max(s.cpu) > 0
    assert all(r > 0 for r in s.rss)


def test_batch_spec_scales_event_total():
    spec = get_task("C-T5-3@scale1000")
    assert spec.scenario == BATCH
    assert (spec.users, spec.events) == (10, 10_000)


def test_random_labels_are_roughly_fair():
    cfg = GenConfig(users=10, events=2000, seed=random.Random(1).randrange(1000))
    labels = [g.compliant for g in gen_events(cfg, gen_consents(cfg, T), T)]
    assert 850 < sum(labels) < 1150
