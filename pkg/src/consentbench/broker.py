"""In-process partitioned log with consumer groups and compliance checkers.

Topics hold a fixed number of append-only partitions.  Records are routed
by a stable hash of their key, so all entries of one user (consents and
events alike) land in one partition and are seen in production order.
A consumer group assigns each partition to at most one member, round-robin
over the sorted member ids; with more members than partitions the surplus
members sit idle.  Delivery is at-least-once: a rebalance rewinds every
partition to its last committed offset.
"""

from __future__ import annotations

import bisect
import logging
import threading
import time
import zlib
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Callable

from .errors import (
    BadPartitionCount,
    DuplicateTopic,
    NotAssigned,
    RewindRejected,
    UnknownMember,
    UnknownTopic,
)
from .policy import GeneralPolicy
from .reasoner import Reason, complies
from .splog import ComplianceRecord, Kind, LogEntry, from_json, record_json, to_json
from .vocab import Taxonomy

log = logging.getLogger(__name__)

# fixed per-record overhead charged by storage accounting
HEADER_BYTES = 16


def stable_hash(key: bytes) -> int:
    return zlib.crc32(key)


@dataclass(frozen=True)
class Record:
    key: bytes
    value: bytes
    partition: int
    offset: int
    enqueue_time: int  # ns on the broker clock


class Topic:
    def __init__(self, name: str, n_partitions: int, replication_factor: int = 1, clock=time.monotonic_ns):
        if n_partitions < 1:
            raise BadPartitionCount(f"a topic needs at least one partition, got {n_partitions}")
        if replication_factor < 1:
            raise ValueError("replication factor must be at least 1")
        self.name = name
        self.replication_factor = replication_factor
        self.partitions: list[list[Record]] = [[] for _ in range(n_partitions)]
        self.clock = clock
        self._lock = threading.Lock()
        self._raw_bytes = 0
        self.changed = threading.Condition(self._lock)

    @property
    def n_partitions(self) -> int:
        return len(self.partitions)

    def partition_for(self, key: bytes) -> int:
        return stable_hash(key) % len(self.partitions)

    def produce(self, key: bytes, value: bytes, enqueue_time: int | None = None) -> tuple[int, int]:
        p = self.partition_for(key)
        with self._lock:
            part = self.partitions[p]
            offset = len(part)
            stamp = self.clock() if enqueue_time is None else enqueue_time
            part.append(Record(key, value, p, offset, stamp))
            self._raw_bytes += len(key) + len(value) + HEADER_BYTES
            self.changed.notify_all()
        return p, offset

    def read(self, partition: int, start: int, max_records: int) -> list[Record]:
        # list slicing is atomic under the GIL; appends never move old records
        return self.partitions[partition][start:start + max_records]

    def end_offset(self, partition: int) -> int:
        return len(self.partitions[partition])

    def __len__(self) -> int:
        return sum(len(p) for p in self.partitions)

    def records(self):
        for part in self.partitions:
            yield from part

    def storage_bytes(self) -> int:
        return self._raw_bytes * self.replication_factor


def storage_bytes(t: Topic) -> int:
    """Σ (value + key + header) bytes, times the replication factor."""
    return t.storage_bytes()


class ConsumerGroup:
    def __init__(self, group_id: str, topic: Topic):
        self.group_id = group_id
        self.topic = topic
        self.members: list[str] = []
        self.assignment: dict[int, str] = {}
        self.committed: dict[int, int] = {p: -1 for p in range(topic.n_partitions)}
        self.position: dict[int, int] = {p: 0 for p in range(topic.n_partitions)}
        self.generation = 0
        self._lock = threading.RLock()
        self._cursor: dict[str, int] = {}

    def _rebalance(self) -> dict[int, str]:
        self.generation += 1
        self.assignment = {}
        if self.members:
            for p in range(self.topic.n_partitions):
                self.assignment[p] = self.members[p % len(self.members)]
        for p in self.position:
            self.position[p] = self.committed[p] + 1
        self._check_balanced()
        return dict(self.assignment)

    def _check_balanced(self) -> None:
        counts = {m: 0 for m in self.members}
        for m in self.assignment.values():
            counts[m] += 1
        if self.members:
            assert len(self.assignment) == self.topic.n_partitions
            assert max(counts.values()) - min(counts.values()) <= 1

    def join(self, consumer_id: str) -> dict[int, str]:
        with self._lock:
            if consumer_id in self.members:
                raise ValueError(f"{consumer_id} is already a member of {self.group_id}")
            bisect.insort(self.members, consumer_id)
            return self._rebalance()

    def leave(self, consumer_id: str) -> dict[int, str]:
        with self._lock:
            if consumer_id not in self.members:
                raise UnknownMember(consumer_id)
            self.members.remove(consumer_id)
            self._cursor.pop(consumer_id, None)
            return self._rebalance()

    def assigned(self, consumer_id: str) -> list[int]:
        with self._lock:
            return sorted(p for p, m in self.assignment.items() if m == consumer_id)

    def poll(self, consumer_id: str, max_records: int = 100, timeout: float = 0.0) -> list[Record]:
        """Up to ``max_records`` records past this group's fetch positions.

        Partitions are visited round-robin, starting after the one the
        previous poll of this consumer began with.
        """
        deadline = time.monotonic() + timeout
        while True:
            batch = self._poll_once(consumer_id, max_records)
            remaining = deadline - time.monotonic()
            if batch or remaining <= 0:
                return batch
            with self.topic.changed:
                self.topic.changed.wait(min(remaining, 0.05))

    def _poll_once(self, consumer_id: str, max_records: int) -> list[Record]:
        with self._lock:
            if consumer_id not in self.members:
                raise UnknownMember(consumer_id)
            mine = sorted(p for p, m in self.assignment.items() if m == consumer_id)
            if not mine:
                return []
            start = self._cursor.get(consumer_id, 0) % len(mine)
            self._cursor[consumer_id] = start + 1
            out: list[Record] = []
            for p in mine[start:] + mine[:start]:
                if len(out) >= max_records:
                    break
                chunk = self.topic.read(p, self.position[p], max_records - len(out))
                self.position[p] += len(chunk)
                out.extend(chunk)
            return out

    def commit(self, consumer_id: str, partition: int, offset: int) -> None:
        """Mark ``offset`` (and everything before it) as processed."""
        with self._lock:
            if consumer_id not in self.members:
                raise UnknownMember(consumer_id)
            if self.assignment.get(partition) != consumer_id:
                raise NotAssigned(f"partition {partition} is not assigned to {consumer_id}")
            if offset < self.committed[partition]:
                raise RewindRejected(
                    f"commit {offset} is behind committed offset {self.committed[partition]}"
                )
            if offset >= self.topic.end_offset(partition):
                raise ValueError(f"offset {offset} beyond end of partition {partition}")
            self.committed[partition] = offset
            self.position[partition] = max(self.position[partition], offset + 1)

    def lag(self) -> int:
        with self._lock:
            return sum(self.topic.end_offset(p) - self.committed[p] - 1 for p in self.committed)

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "members": list(self.members),
                "generation": self.generation,
                "assignment": {str(p): m for p, m in sorted(self.assignment.items())},
                "committed": {str(p): o for p, o in sorted(self.committed.items())},
            }


class Broker:
    def __init__(self, clock: Callable[[], int] = time.monotonic_ns):
        self.clock = clock
        self.topics: dict[str, Topic] = {}
        self.groups: dict[tuple[str, str], ConsumerGroup] = {}
        self._lock = threading.Lock()

    def create_topic(self, name: str, n_partitions: int, replication_factor: int = 1) -> Topic:
        with self._lock:
            if name in self.topics:
                raise DuplicateTopic(name)
            topic = Topic(name, n_partitions, replication_factor, self.clock)
            self.topics[name] = topic
            return topic

    def topic(self, name: str) -> Topic:
        try:
            return self.topics[name]
        except KeyError:
            raise UnknownTopic(name) from None

    def produce(self, topic: str, key: bytes, value: bytes) -> tuple[int, int]:
        return self.topic(topic).produce(key, value)

    def group(self, group_id: str, topic: str) -> ConsumerGroup:
        with self._lock:
            key = (group_id, topic)
            if key not in self.groups:
                self.groups[key] = ConsumerGroup(group_id, self.topic(topic))
            return self.groups[key]

    def inspect(self, topic: str) -> dict:
        t = self.topic(topic)
        return {
            "topic": t.name,
            "replicationFactor": t.replication_factor,
            "partitions": [len(p) for p in t.partitions],
            "storageBytes": t.storage_bytes(),
            "groups": {
                gid: g.snapshot() for (gid, tname), g in sorted(self.groups.items()) if tname == topic
            },
        }


def create_topic(broker: Broker, name: str, n_partitions: int, replication_factor: int = 1) -> Topic:
    return broker.create_topic(name, n_partitions, replication_factor)


def join_group(g: ConsumerGroup, consumer_id: str) -> dict[int, str]:
    return g.join(consumer_id)


def leave_group(g: ConsumerGroup, consumer_id: str) -> dict[int, str]:
    return g.leave(consumer_id)


class ConsentStore:
    """Per-user consent history ordered by validity time."""

    def __init__(self):
        self._history: dict[str, list[tuple[datetime, int, LogEntry]]] = {}
        self._seq = 0
        self._lock = threading.Lock()

    def apply(self, entry: LogEntry) -> None:
        if entry.kind not in (Kind.CONSENT_ASSERTION, Kind.CONSENT_REVOCATION):
            raise ValueError(f"not a policy entry: {entry.kind.value}")
        user = entry.data_subject or ""
        with self._lock:
            hist = self._history.setdefault(user, [])
            if any(e.entry_id == entry.entry_id for _, _, e in hist):
                return  # redelivered after a rebalance
            self._seq += 1
            bisect.insort(hist, (entry.validity_time, self._seq, entry))

    def lookup(self, user: str, at: datetime) -> LogEntry | Reason:
        with self._lock:
            hist = self._history.get(user, [])
            i = bisect.bisect_right(hist, (at, float("inf")))
            if i == 0:
                return Reason.NO_CONSENT
            entry = hist[i - 1][2]
        if entry.kind is Kind.CONSENT_REVOCATION:
            return Reason.REVOKED
        return entry

    def __len__(self) -> int:
        return sum(len(h) for h in self._history.values())


def resolve_consent(s: ConsentStore, user: str, at: datetime) -> GeneralPolicy | Reason:
    found = s.lookup(user, at)
    return found if isinstance(found, Reason) else found.content




def utc_now() -> datetime:
    return datetime.now(timezone.utc)


class Checker:
    """Compliance checking of one record at a time.

    ``clock`` must be the broker's clock (latency is measured against
    record enqueue times); ``sleep`` realizes the injected per-check delay
    and ``wallclock`` stamps check times.
    """

    def __init__(
        self,
        checker_id: str,
        store: ConsentStore,
        taxonomy: Taxonomy,
        compliance_topic: Topic,
        injected_delay: float | None = None,
        clock: Callable[[], int] = time.monotonic_ns,
        sleep: Callable[[float], None] = time.sleep,
        wallclock: Callable[[], datetime] = utc_now,
    ):
        self.checker_id = checker_id
        self.store = store
        self.taxonomy = taxonomy
        self.compliance_topic = compliance_topic
        self.injected_delay = injected_delay
        self.clock = clock
        self.sleep = sleep
        self.wallclock = wallclock
        self.processed = 0

    def verdict(self, entry: LogEntry) -> tuple[bool, Reason, str | None]:
        found = self.store.lookup(entry.data_subject or "", entry.validity_time)
        if isinstance(found, Reason):
            return False, found, None
        result = complies(entry.content, found.content, self.taxonomy)
        return result.compliant, result.reason, found.entry_id

    def handle(self, record: Record) -> ComplianceRecord | None:
        """Apply a consent entry, or check a data event and publish the result."""
        try:
            entry = from_json(record.value, self.taxonomy.prefixes)
            if not isinstance(entry, LogEntry):
                raise ValueError("application log records must be log entries")
        except Exception as exc:  # poison records must not halt the pipeline
            log.warning("unparseable record %d@%d: %s", record.offset, record.partition, exc)
            out = ComplianceRecord(
                entry=None,
                compliant=False,
                reason=Reason.NO_MATCH,
                checker_id=self.checker_id,
                check_time=self.wallclock(),
                latency_ns=max(0, self.clock() - record.enqueue_time),
                error=f"parse error at partition {record.partition} offset {record.offset}: {exc}",
            )
            self.compliance_topic.produce(record.key, to_json(out, self.taxonomy.prefixes))
            return out
        if not entry.kind.is_data_event:
            self.store.apply(entry)
            return None
        compliant, reason, consent_id = self.verdict(entry)
        if self.injected_delay:
            self.sleep(self.injected_delay)
        done = self.clock()
        out = ComplianceRecord(
            entry=entry,
            compliant=compliant,
            reason=reason,
            checker_id=self.checker_id,
            check_time=self.wallclock(),
            latency_ns=max(0, done - record.enqueue_time),
            consent_entry_id=consent_id,
        )
        payload = record_json(out, self.taxonomy.prefixes, entry_json=record.value)
        self.compliance_topic.produce(record.key, payload, enqueue_time=done)
        self.processed += 1
        return out


def run_checker(
    consumer_id: str,
    group: ConsumerGroup,
    compliance_topic: Topic,
    store: ConsentStore,
    taxonomy: Taxonomy,
    injected_delay: float | None = None,
    stop: threading.Event | None = None,
    max_records: int = 100,
    poll_timeout: float = 0.05,
    checker: Checker | None = None,
) -> Checker:
    """Poll, check and commit until ``stop`` is set.

    The consumer must already be a member of ``group``.  Offsets are
    committed only after the result is appended to the compliance topic;
    a batch is abandoned when a rebalance takes its partition away.
    """
    stop = stop or threading.Event()
    checker = checker or Checker(
        consumer_id, store, taxonomy, compliance_topic, injected_delay, clock=group.topic.clock
    )
    while not stop.is_set():
        batch = group.poll(consumer_id, max_records, timeout=poll_timeout)
        lost: set[int] = set()
        for record in batch:
            if record.partition in lost:
                continue
            checker.handle(record)
            try:
                group.commit(consumer_id, record.partition, record.offset)
            except (NotAssigned, RewindRejected):
                lost.add(record.partition)
            except UnknownMember:
                return checker
    return checker


def virtual_wallclock(base: datetime, clock: Callable[[], int]) -> Callable[[], datetime]:
    """Check-time stamps derived from a simulated ns clock."""
    return lambda: base + timedelta(microseconds=clock() // 1000)
