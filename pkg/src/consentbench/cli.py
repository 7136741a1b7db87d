"""Command-line entry point.

Exit codes: 0 success, 1 validation or usage error, 2 runtime error.
``CONSENTBENCH_OUT_DIR`` and ``CONSENTBENCH_SEED`` override the defaults of
``--out`` and ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .broker import Broker
from .errors import ConsentBenchError, ParseError, ValidationError
from .genbench.config import GenConfig, get_task, parse_duration
from .genbench.generate import gen_consents, gen_events
from .genbench.metrics import recompute_statistics
from .genbench.runner import APP_TOPIC, RunConfig, run_task
from .oracle import oracle_complies
from .policy import BasicPolicy, GeneralPolicy
from .reasoner import complies
from .splog import LogEntry, content_from_json, from_json, policy_from_json, to_json, to_ttl
from .vocab import Taxonomy, builtin_special, load_taxonomy


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _env_seed() -> int:
    raw = os.environ.get("CONSENTBENCH_SEED")
    if raw is None:
        return 42
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"CONSENTBENCH_SEED must be an integer, got {raw!r}") from None


def _env_out(default: str) -> str:
    return os.environ.get("CONSENTBENCH_OUT_DIR", default)


def _duration(s: str) -> int:
    try:
        return parse_duration(s)
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def _taxonomy(paths: list[str] | None) -> Taxonomy:
    t = builtin_special()
    for p in paths or ():
        t = load_taxonomy(Path(p).read_text(), base=t)
    return t


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="consentbench", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a consent or event corpus")
    g.add_argument("--type", choices=("log", "consent"), default="log",
                   help="generator parameter: data events (log) or consent assertions (consent)")
    g.add_argument("--format", choices=("json", "ttl"), default="json",
                   help="generator parameter: jsonl or Turtle output")
    g.add_argument("--users", type=_positive, default=1000,
                   help="generator parameter: number of distinct data subjects")
    g.add_argument("--policies", type=_positive, default=5,
                   help="generator parameter: maximum basic policies per consent")
    g.add_argument("--rate", type=_duration, default=_duration("10s"),
                   help="generator parameter: interval between one user's events (e.g. 1s, 10ms)")
    g.add_argument("--events", type=int, default=0,
                   help="generator parameter: total events; <= 0 uses --test-time or streams forever")
    g.add_argument("--test-time", type=_duration, default=None,
                   help="generator parameter: stream length; events = users * test_time / rate")
    g.add_argument("--pass-ratio", type=float, default=None,
                   help="generator parameter: percentage of compliant events (default: fair coin)")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--taxonomy", action="append", help="taxonomy extension file (repeatable)")
    g.add_argument("-o", "--output", default="-", help="output file, '-' for stdout")
    g.add_argument("--labels", help="also write ground-truth labels as CSV (event_id,compliant)")

    b = sub.add_parser("bench", help="benchmark tasks")
    bsub = b.add_subparsers(dest="action", required=True, parser_class=_Parser)
    r = bsub.add_parser("run", help="run one benchmark task")
    r.add_argument("--task", required=True, help="task id, e.g. C-T4-4 or C-T1-1@scale100")
    r.add_argument("--scale", type=_positive, default=None, help="divide users and test time (or events) by k")
    r.add_argument("--checkers", type=_positive, default=1, help="number of compliance checkers")
    r.add_argument("--partitions", type=_positive, default=10, help="application-log partitions")
    r.add_argument("--virtual-time", action="store_true", help="simulated clock instead of wall-clock pacing")
    r.add_argument("--inject-delay", type=_duration, default=None, help="added time per check, e.g. 1ms")
    r.add_argument("--window", type=_positive, default=1000, help="events per percentile window")
    r.add_argument("--cumulative", action="store_true", help="cumulative instead of disjoint windows")
    r.add_argument("--warmup", type=float, default=0.1, help="fraction of events treated as warm-up")
    r.add_argument("--replication", type=_positive, default=2, help="replication factor for storage accounting")
    r.add_argument("--resources", type=float, default=None, metavar="SECONDS",
                   help="sample CPU and memory at this interval")
    r.add_argument("--events-dump", action="store_true", help="also write events.jsonl")
    r.add_argument("--dry-count", action="store_true", help="print the event count without running")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--taxonomy", action="append", help="taxonomy extension file (repeatable)")
    r.add_argument("--out", default=None, help="output directory (default: runs/<task>)")

    c = sub.add_parser("reason", help="policy reasoning")
    csub = c.add_subparsers(dest="action", required=True, parser_class=_Parser)
    ck = csub.add_parser("check", help="check content against a consent")
    ck.add_argument("--content", required=True, help="content object or data-event JSON file")
    ck.add_argument("--consent", required=True, help="consent policy or consent-assertion JSON file")
    ck.add_argument("--taxonomy", action="append", help="taxonomy extension file (repeatable)")
    ck.add_argument("--oracle", action="store_true", help="also decide by brute-force enumeration")

    k = sub.add_parser("broker", help="broker utilities")
    ksub = k.add_subparsers(dest="action", required=True, parser_class=_Parser)
    ins = ksub.add_parser("inspect", help="partition sizes, committed offsets and assignment as JSON")
    src = ins.add_mutually_exclusive_group(required=True)
    src.add_argument("--state", help="broker.json written by 'bench run'")
    src.add_argument("--load", help="produce the entries of a jsonl file into a fresh topic")
    ins.add_argument("--topic", default=APP_TOPIC)
    ins.add_argument("--partitions", type=_positive, default=10)
    ins.add_argument("--replication", type=_positive, default=2)

    rep = sub.add_parser("report", help="report utilities")
    rsub = rep.add_subparsers(dest="action", required=True, parser_class=_Parser)
    rc = rsub.add_parser("recompute", help="recompute report statistics from latencies.csv")
    rc.add_argument("--from", dest="source", required=True, help="latencies.csv")
    rc.add_argument("--report", help="report.json to compare against (exit 1 on mismatch)")
    rc.add_argument("--window", type=_positive, default=None)
    rc.add_argument("--warmup", type=float, default=None)
    rc.add_argument("--cumulative", action="store_true", default=None)
    return p


def _read_json_file(path: str):
    return Path(path).read_bytes()


def _load_content(path: str, t: Taxonomy) -> BasicPolicy:
    raw = _read_json_file(path)
    obj = json.loads(raw)
    if isinstance(obj, dict) and "kind" in obj:
        entry = from_json(raw, t.prefixes)
        if not isinstance(entry, LogEntry) or not isinstance(entry.content, BasicPolicy):
            raise ValidationError(f"{path}: not a data event")
        return entry.content
    return content_from_json(raw, t.prefixes)


def _load_consent(path: str, t: Taxonomy) -> GeneralPolicy:
    raw = _read_json_file(path)
    obj = json.loads(raw)
    if isinstance(obj, dict) and "kind" in obj:
        entry = from_json(raw, t.prefixes)
        if not isinstance(entry, LogEntry) or not isinstance(entry.content, GeneralPolicy):
            raise ValidationError(f"{path}: not a consent assertion")
        return entry.content
    return policy_from_json(raw, t.prefixes)


def cmd_gen(a) -> int:
    t = _taxonomy(a.taxonomy)
    seed = a.seed if a.seed is not None else _env_seed()
    cfg = GenConfig(rate_ns=a.rate, events=a.events, format=a.format, type=a.type, policies=a.policies,
                    users=a.users, pass_ratio=a.pass_ratio, seed=seed, test_time_ns=a.test_time)
    consents = gen_consents(cfg, t)
    if a.type == "consent":
        entries = ((e, None) for _, e in consents)
    else:
        entries = ((g.entry, g.compliant) for g in gen_events(cfg, consents, t))
    out = sys.stdout.buffer if a.output == "-" else open(a.output, "wb")
    labels = open(a.labels, "w") if a.labels else None
    try:
        if labels:
            labels.write("event_id,compliant\n")
        first = True
        for entry, label in entries:
            if cfg.format == "json":
                out.write(to_json(entry, t.prefixes) + b"\n")
            else:
                out.write(to_ttl(entry, t.prefixes, header=first) + b"\n")
            first = False
            if labels and label is not None:
                labels.write(f"{entry.entry_id},{int(label)}\n")
    finally:
        if out is not sys.stdout.buffer:
            out.close()
        if labels:
            labels.close()
    return 0


def cmd_bench_run(a) -> int:
    spec = get_task(a.task)
    if a.scale:
        if "@scale" in a.task:
            raise UsageError("--scale conflicts with a task id that already carries @scale")
        spec = spec.scaled(a.scale)
    if a.dry_count:
        print(spec.event_count())
        return 0
    if not 0 <= a.warmup < 1:
        raise UsageError("--warmup must lie in [0, 1)")
    seed = a.seed if a.seed is not None else _env_seed()
    rc = RunConfig(
        checkers=a.checkers, partitions=a.partitions, injected_delay_ns=a.inject_delay,
        virtual_time=a.virtual_time, seed=seed, window=a.window, warmup_fraction=a.warmup,
        cumulative=a.cumulative, replication_factor=a.replication,
        resource_interval=a.resources, write_events=a.events_dump,
    )
    out = Path(a.out or _env_out(str(Path("runs") / spec.task_id)))
    result = run_task(spec, rc, out_dir=out, taxonomy=_taxonomy(a.taxonomy))
    rep = result.report
    print(json.dumps({
        "task": spec.task_id, "count": rep.count, "compliant": rep.statistics.get("compliantCount", 0),
        "medianMs": rep.median_ms, "p95Ms": rep.statistics.get("p95Ms"),
        "throughputEps": rep.throughput_total_eps, "out": str(out),
    }))
    return 0


def cmd_reason_check(a) -> int:
    t = _taxonomy(a.taxonomy)
    content = _load_content(a.content, t)
    consent = _load_consent(a.consent, t)
    res = complies(content, consent, t, check=True)
    verdict = "compliant" if res.compliant else "non-compliant"
    line = verdict if res.matched_basic is None else f"{verdict} (basic {res.matched_basic})"
    print(line)
    if a.oracle:
        agree = oracle_complies(content, consent, t)
        print(f"oracle: {'compliant' if agree else 'non-compliant'}")
        if agree != res.compliant:
            print("reasoner and oracle disagree", file=sys.stderr)
            return 2
    return 0


def cmd_broker_inspect(a) -> int:
    if a.state:
        state = json.loads(Path(a.state).read_text())
        if a.topic not in state:
            raise ValidationError(f"topic {a.topic!r} not in {a.state} (has: {', '.join(state)})")
        print(json.dumps(state[a.topic], indent=2))
        return 0
    broker = Broker()
    topic = broker.create_topic(a.topic, a.partitions, a.replication)
    with open(a.load, "rb") as fh:
        for n, line in enumerate(fh, start=1):
            line = line.rstrip(b"\n")
            if not line:
                continue
            try:
                entry = from_json(line)
            except ParseError as exc:
                raise ParseError(f"{a.load} line {n}: {exc}", line=n) from None
            key = getattr(entry, "data_subject", None) or getattr(entry, "entry_id", "")
            topic.produce(key.encode(), line)
    print(json.dumps(broker.inspect(a.topic), indent=2))
    return 0


def cmd_report_recompute(a) -> int:
    expected = json.loads(Path(a.report).read_text()) if a.report else None
    stats_in = (expected or {}).get("statistics", {})
    window = a.window or stats_in.get("window", 1000)
    warmup = a.warmup if a.warmup is not None else (expected or {}).get("warmup_fraction", 0.1)
    cumulative = a.cumulative if a.cumulative is not None else stats_in.get("cumulative", False)
    stats = recompute_statistics(a.source, window, warmup, cumulative)
    print(json.dumps(stats, indent=2))
    if expected is not None:
        if json.dumps(stats, indent=2) != json.dumps(stats_in, indent=2):
            print("recomputed statistics differ from the report", file=sys.stderr)
            return 1
        print("report statistics reproduced exactly", file=sys.stderr)
    return 0


_COMMANDS = {
    ("gen", None): cmd_gen,
    ("bench", "run"): cmd_bench_run,
    ("reason", "check"): cmd_reason_check,
    ("broker", "inspect"): cmd_broker_inspect,
    ("report", "recompute"): cmd_report_recompute,
}


def main(argv: list[str] | None = None) -> int:
    try:
        a = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.WARNING - 10 * min(a.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    handler = _COMMANDS[(a.command, getattr(a, "action", None))]
    try:
        return handler(a)
    except (ValidationError, ParseError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1 if isinstance(exc, FileNotFoundError) else 2
    except (ConsentBenchError, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
