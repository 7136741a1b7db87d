"""Generator configuration, duration parsing and the benchmark task table."""

from __future__ import annotations

import re
from dataclasses import asdict, dataclass, replace

from ..errors import BadDuration, ConfigError

NS = {"ns": 1, "us": 1_000, "µs": 1_000, "ms": 1_000_000, "s": 1_000_000_000,
      "m": 60_000_000_000, "h": 3_600_000_000_000}

_PART = re.compile(r"(\d+)(ns|us|µs|ms|s|m|h)")


def parse_duration(s: str, allow_zero: bool = False) -> int:
    """Go-style duration ("1s", "10ms", "1m30s") to integer nanoseconds."""
    if not isinstance(s, str) or not s:
        raise BadDuration(f"empty duration {s!r}")
    total = 0
    pos = 0
    for m in _PART.finditer(s):
        if m.start() != pos:
            break
        total += int(m.group(1)) * NS[m.group(2)]
        pos = m.end()
    if pos != len(s):
        raise BadDuration(f"cannot parse duration {s!r} (units: ns, us, ms, s, m, h)")
    if total == 0 and not allow_zero:
        raise BadDuration(f"duration {s!r} must be positive")
    return total


def format_duration(ns: int) -> str:
    if ns == 0:
        return "0s"
    out = []
    for unit in ("h", "m", "s", "ms", "us", "ns"):
        q, ns = divmod(ns, NS[unit])
        if q:
            out.append(f"{q}{unit}")
    return "".join(out)


@dataclass(frozen=True)
class GenConfig:
    rate_ns: int = 10_000_000_000
    events: int = 0
    format: str = "json"
    type: str = "log"
    policies: int = 5
    users: int = 1000
    pass_ratio: float | None = None  # None: fair coin per event
    seed: int = 42
    test_time_ns: int | None = None

    def __post_init__(self):
        if self.users < 1:
            raise ConfigError("users must be at least 1")
        if self.policies < 1:
            raise ConfigError("policies must be at least 1")
        if self.rate_ns <= 0:
            raise ConfigError("rate must be positive")
        if self.format not in ("json", "ttl"):
            raise ConfigError(f"format must be json or ttl, got {self.format!r}")
        if self.type not in ("log", "consent"):
            raise ConfigError(f"type must be log or consent, got {self.type!r}")
        if self.pass_ratio is not None and not 0 <= self.pass_ratio <= 100:
            raise ConfigError("pass ratio must lie in [0, 100]")
        if self.test_time_ns is not None and self.test_time_ns < 0:
            raise ConfigError("test time must be non-negative")

    @property
    def bounded(self) -> bool:
        return self.events > 0 or self.test_time_ns is not None

    def event_count(self) -> int | None:
        """Number of events the stream will hold, or None when unbounded."""
        if self.events > 0:
            return self.events
        if self.test_time_ns is not None:
            return self.users * (self.test_time_ns // self.rate_ns)
        return None


STREAMING = "Streaming"
BATCH = "Batch"


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    scenario: str
    users: int
    policies: int
    rate_ns: int | None = None
    test_time_ns: int | None = None
    events: int | None = None
    pass_ratio: float | None = None
    choke_points: tuple[str, ...] = ()

    def event_count(self) -> int:
        if self.scenario == BATCH:
            return self.events
        return self.users * (self.test_time_ns // self.rate_ns)

    def gen_config(self, seed: int = 42) -> GenConfig:
        if self.scenario == BATCH:
            # batch events carry no pacing; the nominal rate only orders them
            return GenConfig(rate_ns=1_000_000, events=self.events, policies=self.policies,
                             users=self.users, pass_ratio=self.pass_ratio, seed=seed)
        return GenConfig(rate_ns=self.rate_ns, events=0, policies=self.policies, users=self.users,
                         pass_ratio=self.pass_ratio, seed=seed, test_time_ns=self.test_time_ns)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["choke_points"] = list(self.choke_points)
        return d

    def scaled(self, k: int) -> TaskSpec:
        """Desk-scale variant: users and test time (or event total) divided by ``k``."""
        if k < 1:
            raise ConfigError("scale factor must be at least 1")
        if k == 1:
            return self
        users = max(1, self.users // k)
        if self.scenario == BATCH:
            return replace(self, task_id=f"{self.task_id}@scale{k}", users=users,
                           events=max(1, self.events // k))
        return replace(self, task_id=f"{self.task_id}@scale{k}", users=users,
                       test_time_ns=self.test_time_ns // k)


_MIN = 60 * NS["s"]
_S = NS["s"]


def _table() -> dict[str, TaskSpec]:
    out = {}
    t20 = 20 * _MIN
    for i, pol in enumerate((1, 5, 10, 20, 30), start=1):
        out[f"C-T1-{i}"] = TaskSpec(f"C-T1-{i}", STREAMING, 1000, pol, 10 * _S, t20,
                                    choke_points=("CCP1", "CCP5"))
    for i, users in enumerate((100, 1_000, 10_000, 100_000, 1_000_000), start=1):
        out[f"C-T2-{i}"] = TaskSpec(f"C-T2-{i}", STREAMING, users, 5, 10 * _S, t20,
                                    choke_points=("CCP2", "CCP5"))
    for i, ratio in enumerate((0, 25, 50, 75, 100), start=1):
        out[f"C-T3-{i}"] = TaskSpec(f"C-T3-{i}", STREAMING, 1000, 5, 10 * _S, t20,
                                    pass_ratio=ratio, choke_points=("CCP3", "CCP5"))
    # C-T4-5 "10 ev./s" per user == one event every 100 ms
    rates = (60 * _S, 30 * _S, 10 * _S, _S, 100 * NS["ms"])
    for i, rate in enumerate(rates, start=1):
        out[f"C-T4-{i}"] = TaskSpec(f"C-T4-{i}", STREAMING, 1000, 5, rate, t20,
                                    choke_points=("CCP4", "CCP5"))
    sizes = ((100, 100_000), (1_000, 1_000_000), (10_000, 10_000_000),
             (100_000, 100_000_000), (1_000_000, 1_000_000_000))
    for i, (users, events) in enumerate(sizes, start=1):
        out[f"C-T5-{i}"] = TaskSpec(f"C-T5-{i}", BATCH, users, 5, events=events,
                                    choke_points=("CCP6",))
    return out


TASKS: dict[str, TaskSpec] = _table()

_TASK_ID = re.compile(r"(C-T[1-5]-[1-5])(?:@scale(\d+))?")


def get_task(task_id: str) -> TaskSpec:
    """Look up ``C-Tx-y`` or its desk-scaled form ``C-Tx-y@scaleK``."""
    m = _TASK_ID.fullmatch(task_id)
    if not m or m.group(1) not in TASKS:
        raise ConfigError(f"unknown task {task_id!r}")
    spec = TASKS[m.group(1)]
    return spec.scaled(int(m.group(2))) if m.group(2) else spec
