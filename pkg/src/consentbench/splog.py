"""Log entries, compliance records and entry groups, with canonical JSON.

JSON layout of a log entry (keys always in this order, absent optionals
omitted)::

    {"id", "log", "kind", "dataSubject", "validityTime", "transactionTime",
     "message", "content", "revokes", "recipientInstances",
     "immutableRecord", "bpm": {"activity", "case"}}

``content`` is an object for data events and a list of such objects (the
basic policies) for consent assertions.  A content object is
``{"data": [...], "processing", "purpose", "storage": {"location", ...},
"recipient"}`` where ``data`` is always a list (a union when longer than
one) and every other class attribute is a compact class name, a list
(union) or ``{"and": [...]}`` (intersection).  ``spl:Null`` is the empty
filler.  Storage duration is one of ``durationDays`` (a point),
``minDays``/``maxDays`` (``maxDays`` omitted when unbounded) or
``durationClass``.  Timestamps are RFC 3339 UTC with a ``Z`` suffix and
milliseconds only when non-zero.

Compliance records and groups carry an ``@type`` key
(``ComplianceRecord`` / ``LogEntryGroup``); plain entries do not.
"""

from __future__ import annotations

import enum
import json
import logging
import re
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Iterator, Mapping
from urllib.parse import quote

from .errors import ParseError, ValidationError
from .policy import (
    Atom,
    BasicPolicy,
    ClassExpr,
    DurationClass,
    GeneralPolicy,
    Intersection,
    Interval,
    Null,
    StorageExpr,
    Top,
    Union,
    normalize_content,
)
from .reasoner import Reason
from .vocab import BUILTIN_PREFIXES, NULL, Category, compact, expand

log = logging.getLogger(__name__)


class Kind(enum.Enum):
    CONSENT_ASSERTION = "ConsentAssertion"
    CONSENT_REVOCATION = "ConsentRevocation"
    PROCESSING_EVENT = "ProcessingEvent"
    SHARING_EVENT = "SharingEvent"

    @property
    def is_data_event(self) -> bool:
        return self in (Kind.PROCESSING_EVENT, Kind.SHARING_EVENT)


def _utc_ms(dt: datetime) -> datetime:
    if dt.tzinfo is timezone.utc and not dt.microsecond % 1000:
        return dt
    if dt.tzinfo is None:
        raise ValidationError(f"timestamp {dt.isoformat()} has no timezone")
    dt = dt.astimezone(timezone.utc)
    return dt.replace(microsecond=dt.microsecond // 1000 * 1000)


def format_ts(dt: datetime) -> str:
    out = dt.strftime("%Y-%m-%dT%H:%M:%S")
    ms = dt.microsecond // 1000
    return f"{out}.{ms:03d}Z" if ms else out + "Z"


def parse_ts(s: str) -> datetime:
    if not isinstance(s, str):
        raise ValidationError(f"timestamp must be a string, got {s!r}")
    text = s[:-1] + "+00:00" if s.endswith("Z") else s
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        raise ValidationError(f"bad RFC 3339 timestamp {s!r}") from None
    return _utc_ms(dt)


def _freeze_time(obj, *names):
    for name in names:
        value = getattr(obj, name)
        if value is not None:
            object.__setattr__(obj, name, _utc_ms(value))


@dataclass(frozen=True)
class LogEntry:
    entry_id: str
    kind: Kind
    validity_time: datetime
    log_id: str | None = None
    data_subject: str | None = None
    transaction_time: datetime | None = None
    message: str | None = None
    content: BasicPolicy | GeneralPolicy | None = None
    revokes: str | None = None
    recipient_instances: tuple[str, ...] | None = None
    immutable_record: str | None = None
    bpm_activity: str | None = None
    bpm_case: str | None = None
    # unknown top-level JSON fields kept by lenient parsing: (key, json text)
    extra: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        _freeze_time(self, "validity_time", "transaction_time")
        self.validate()

    def validate(self) -> None:
        if not self.entry_id:
            raise ValidationError("entry id required")
        if self.validity_time is None:
            raise ValidationError("validity time required")
        if self.kind.is_data_event:
            if not isinstance(self.content, BasicPolicy):
                raise ValidationError("content required")
        elif self.kind is Kind.CONSENT_ASSERTION:
            if not isinstance(self.content, GeneralPolicy):
                raise ValidationError("content required")
        elif self.content is not None:
            raise ValidationError("a consent revocation carries no content")
        if self.recipient_instances is not None and self.kind is not Kind.SHARING_EVENT:
            raise ValidationError("recipient instances are only allowed on sharing events")
        if self.transaction_time is not None and self.transaction_time < self.validity_time:
            log.warning("entry %s recorded before it occurred", self.entry_id)


@dataclass(frozen=True)
class ComplianceRecord:
    entry: LogEntry | None
    compliant: bool
    reason: Reason
    checker_id: str
    check_time: datetime
    latency_ns: int
    consent_entry_id: str | None = None
    # set for records that could not be parsed; entry is then None
    error: str | None = None

    def __post_init__(self):
        _freeze_time(self, "check_time")
        if self.latency_ns < 0:
            raise ValidationError("latency must be non-negative")
        if self.compliant != (self.reason is Reason.MATCH):
            raise ValidationError("compliant flag disagrees with reason")
        if self.entry is None and self.error is None:
            raise ValidationError("a record without an entry needs an error message")


@dataclass(frozen=True)
class LogEntryGroup:
    group_id: str
    validity_start: datetime
    validity_end: datetime
    dimension: BasicPolicy
    subject_group: tuple[str, ...] = ()
    entry_members: tuple[str, ...] | None = None

    def __post_init__(self):
        _freeze_time(self, "validity_start", "validity_end")
        if self.validity_start > self.validity_end:
            raise ValidationError("group validity start is after its end")


# -- JSON encoding -----------------------------------------------------------

class _Codec:
    def __init__(self, prefixes: Mapping[str, str] | None, strict: bool = True):
        self.prefixes = dict(prefixes or BUILTIN_PREFIXES)
        self.strict = strict
        self._names: dict[str, str] = {}
        self._iris: dict[str, str] = {}

    # encoding
    def name(self, iri: str) -> str:
        out = self._names.get(iri)
        if out is None:
            out = self._names[iri] = compact(iri, self.prefixes)
        return out

    def expr(self, e: ClassExpr):
        if isinstance(e, Atom):
            return self.name(e.cls)
        if isinstance(e, Null):
            return self.name(NULL)
        if isinstance(e, Top):
            return self.name(e.category.root)
        if isinstance(e, Union):
            return [self.expr(x) for x in e.items]
        return {"and": [self.expr(x) for x in e.items]}

    def content(self, c: BasicPolicy) -> dict:
        data = [self.expr(x) for x in c.data.items] if isinstance(c.data, Union) else [self.expr(c.data)]
        storage: dict = {"location": self.expr(c.storage.location)}
        d = c.storage.duration
        if isinstance(d, DurationClass):
            storage["durationClass"] = self.name(d.cls)
        elif d.max_days is not None and d.max_days == d.min_days:
            storage["durationDays"] = d.min_days
        else:
            storage["minDays"] = d.min_days
            if d.max_days is not None:
                storage["maxDays"] = d.max_days
        return {
            "data": data,
            "processing": self.expr(c.processing),
            "purpose": self.expr(c.purpose),
            "storage": storage,
            "recipient": self.expr(c.recipient),
        }

    def entry(self, e: LogEntry) -> dict:
        out: dict = {"id": e.entry_id}
        if e.log_id is not None:
            out["log"] = e.log_id
        out["kind"] = e.kind.value
        if e.data_subject is not None:
            out["dataSubject"] = e.data_subject
        out["validityTime"] = format_ts(e.validity_time)
        if e.transaction_time is not None:
            out["transactionTime"] = format_ts(e.transaction_time)
        if e.message is not None:
            out["message"] = e.message
        if isinstance(e.content, GeneralPolicy):
            out["content"] = [self.content(b) for b in e.content.basics]
        elif e.content is not None:
            out["content"] = self.content(e.content)
        if e.revokes is not None:
            out["revokes"] = e.revokes
        if e.recipient_instances is not None:
            out["recipientInstances"] = list(e.recipient_instances)
        if e.immutable_record is not None:
            out["immutableRecord"] = e.immutable_record
        if e.bpm_activity is not None or e.bpm_case is not None:
            bpm = {}
            if e.bpm_activity is not None:
                bpm["activity"] = e.bpm_activity
            if e.bpm_case is not None:
                bpm["case"] = e.bpm_case
            out["bpm"] = bpm
        for key, text in e.extra:
            out[key] = json.loads(text)
        return out

    def record(self, r: ComplianceRecord, with_entry: bool = True) -> dict:
        out = {
            "@type": "ComplianceRecord",
            "entry": None if r.entry is None or not with_entry else self.entry(r.entry),
            "compliant": r.compliant,
            "reason": r.reason.value,
        }
        if r.consent_entry_id is not None:
            out["consentEntryId"] = r.consent_entry_id
        out["checkerId"] = r.checker_id
        out["checkTime"] = format_ts(r.check_time)
        out["latencyNs"] = r.latency_ns
        if r.error is not None:
            out["error"] = r.error
        return out

    def group(self, g: LogEntryGroup) -> dict:
        out = {
            "@type": "LogEntryGroup",
            "id": g.group_id,
            "validityStartTime": format_ts(g.validity_start),
            "validityEndTime": format_ts(g.validity_end),
            "dimension": self.content(g.dimension),
            "subjectGroup": list(g.subject_group),
        }
        if g.entry_members is not None:
            out["entryMembers"] = list(g.entry_members)
        return out

    # decoding
    def _keys(self, obj: dict, allowed: Iterable[str], where: str) -> None:
        if not self.strict:
            return
        unknown = sorted(set(obj) - set(allowed))
        if unknown:
            raise ValidationError(f"{where}: unknown field(s) {', '.join(unknown)}")

    def iri(self, s) -> str:
        if not isinstance(s, str) or not s:
            raise ValidationError(f"expected a class name, got {s!r}")
        out = self._iris.get(s)
        if out is None:
            try:
                out = expand(s, self.prefixes)
            except ValueError:
                # unknown prefix: keep the name as an opaque IRI
                out = s
            self._iris[s] = out
        return out

    def parse_expr(self, v, cat: Category) -> ClassExpr:
        if isinstance(v, str):
            iri = self.iri(v)
            return Null(cat) if iri == NULL else Atom(iri)
        if isinstance(v, list):
            items = tuple(self.parse_expr(x, cat) for x in v)
            return Union(items)
        if isinstance(v, dict):
            self._keys(v, ("and",), "intersection")
            items = v.get("and")
            if not isinstance(items, list):
                raise ValidationError("intersection needs an 'and' list")
            return Intersection(tuple(self.parse_expr(x, cat) for x in items))
        raise ValidationError(f"bad class expression {v!r}")

    def parse_content(self, obj) -> BasicPolicy:
        if not isinstance(obj, dict):
            raise ValidationError("content must be an object")
        self._keys(obj, ("data", "processing", "purpose", "storage", "recipient"), "content")
        for key in ("data", "processing", "purpose", "storage", "recipient"):
            if key not in obj:
                raise ValidationError(f"content.{key} required")
        data = obj["data"]
        if not isinstance(data, list):
            raise ValidationError("content.data must be a list")
        if len(data) == 1:
            data_expr = self.parse_expr(data[0], Category.DATA)
        else:
            data_expr = self.parse_expr(data, Category.DATA)
        st = obj["storage"]
        if not isinstance(st, dict) or "location" not in st:
            raise ValidationError("content.storage.location required")
        self._keys(st, ("location", "durationDays", "durationClass", "minDays", "maxDays"), "storage")
        forms = [k for k in ("durationDays", "durationClass", "minDays") if k in st]
        if len(forms) > 1 or ("maxDays" in st and "minDays" not in st):
            raise ValidationError("storage: exactly one duration form allowed")
        if "durationClass" in st:
            duration = DurationClass(self.iri(st["durationClass"]))
        elif "durationDays" in st:
            duration = Interval.point(_days(st["durationDays"]))
        elif "minDays" in st:
            hi = st.get("maxDays")
            duration = Interval(_days(st["minDays"]), None if hi is None else _days(hi))
        else:
            duration = Interval()
        return BasicPolicy(
            data_expr,
            self.parse_expr(obj["processing"], Category.PROCESSING),
            self.parse_expr(obj["purpose"], Category.PURPOSE),
            self.parse_expr(obj["recipient"], Category.RECIPIENT),
            StorageExpr(self.parse_expr(st["location"], Category.LOCATION), duration),
        )

    def parse_entry(self, obj: dict) -> LogEntry:
        known = (
            "id", "log", "kind", "dataSubject", "validityTime", "transactionTime",
            "message", "content", "revokes", "recipientInstances", "immutableRecord", "bpm",
        )
        self._keys(obj, known, "entry")
        if "validityTime" not in obj:
            raise ValidationError("validity time required")
        try:
            kind = Kind(obj.get("kind"))
        except ValueError:
            raise ValidationError(f"unknown entry kind {obj.get('kind')!r}") from None
        content = obj.get("content")
        if content is not None:
            if kind is Kind.CONSENT_ASSERTION:
                if not isinstance(content, list) or not content:
                    raise ValidationError("consent content must be a non-empty list of basic policies")
                content = GeneralPolicy(tuple(self.parse_content(b) for b in content))
            else:
                content = self.parse_content(content)
        bpm = obj.get("bpm") or {}
        if not isinstance(bpm, dict):
            raise ValidationError("bpm must be an object")
        self._keys(bpm, ("activity", "case"), "bpm")
        recipients = obj.get("recipientInstances")
        if recipients is not None:
            if not isinstance(recipients, list) or not all(isinstance(x, str) for x in recipients):
                raise ValidationError("recipientInstances must be a list of strings")
            recipients = tuple(recipients)
        extra = tuple(
            (k, json.dumps(obj[k], ensure_ascii=False, separators=(",", ":"), sort_keys=True))
            for k in sorted(set(obj) - set(known))
        )
        return LogEntry(
            entry_id=_str(obj.get("id"), "id"),
            kind=kind,
            validity_time=parse_ts(obj["validityTime"]),
            log_id=_opt_str(obj.get("log"), "log"),
            data_subject=_opt_str(obj.get("dataSubject"), "dataSubject"),
            transaction_time=None if obj.get("transactionTime") is None else parse_ts(obj["transactionTime"]),
            message=_opt_str(obj.get("message"), "message"),
            content=content,
            revokes=_opt_str(obj.get("revokes"), "revokes"),
            recipient_instances=recipients,
            immutable_record=_opt_str(obj.get("immutableRecord"), "immutableRecord"),
            bpm_activity=_opt_str(bpm.get("activity"), "bpm.activity"),
            bpm_case=_opt_str(bpm.get("case"), "bpm.case"),
            extra=extra,
        )

    def parse_record(self, obj: dict) -> ComplianceRecord:
        self._keys(obj, ("@type", "entry", "compliant", "reason", "consentEntryId",
                         "checkerId", "checkTime", "latencyNs", "error"), "record")
        entry = obj.get("entry")
        try:
            reason = Reason(obj.get("reason"))
        except ValueError:
            raise ValidationError(f"unknown reason {obj.get('reason')!r}") from None
        latency = obj.get("latencyNs")
        if not isinstance(latency, int) or isinstance(latency, bool):
            raise ValidationError("latencyNs must be an integer")
        compliant = obj.get("compliant")
        if not isinstance(compliant, bool):
            raise ValidationError("compliant must be a boolean")
        return ComplianceRecord(
            entry=None if entry is None else self.parse_entry(entry),
            compliant=compliant,
            reason=reason,
            checker_id=_str(obj.get("checkerId"), "checkerId"),
            check_time=parse_ts(obj.get("checkTime")),
            latency_ns=latency,
            consent_entry_id=_opt_str(obj.get("consentEntryId"), "consentEntryId"),
            error=_opt_str(obj.get("error"), "error"),
        )

    def parse_group(self, obj: dict) -> LogEntryGroup:
        self._keys(obj, ("@type", "id", "validityStartTime", "validityEndTime",
                         "dimension", "subjectGroup", "entryMembers"), "group")
        members = obj.get("entryMembers")
        subjects = obj.get("subjectGroup") or []
        if not isinstance(subjects, list):
            raise ValidationError("subjectGroup must be a list")
        return LogEntryGroup(
            group_id=_str(obj.get("id"), "id"),
            validity_start=parse_ts(obj.get("validityStartTime")),
            validity_end=parse_ts(obj.get("validityEndTime")),
            dimension=self.parse_content(obj.get("dimension")),
            subject_group=tuple(subjects),
            entry_members=None if members is None else tuple(members),
        )


_CODECS: dict[tuple, _Codec] = {}


def _codec(prefixes: Mapping[str, str] | None, strict: bool = True) -> _Codec:
    """Shared codec per prefix map, so name lookups stay memoized across calls."""
    key = (tuple((prefixes or BUILTIN_PREFIXES).items()), strict)
    codec = _CODECS.get(key)
    if codec is None:
        if len(_CODECS) > 64:
            _CODECS.clear()
        codec = _CODECS[key] = _Codec(prefixes, strict)
    return codec


def _str(v, name: str) -> str:
    if not isinstance(v, str) or not v:
        raise ValidationError(f"{name} required")
    return v


def _opt_str(v, name: str) -> str | None:
    if v is not None and not isinstance(v, str):
        raise ValidationError(f"{name} must be a string")
    return v


def _days(v) -> int:
    if not isinstance(v, int) or isinstance(v, bool):
        raise ValidationError(f"duration days must be an integer, got {v!r}")
    return v


def to_obj(e, prefixes: Mapping[str, str] | None = None) -> dict:
    codec = _codec(prefixes)
    if isinstance(e, LogEntry):
        return codec.entry(e)
    if isinstance(e, ComplianceRecord):
        return codec.record(e)
    if isinstance(e, LogEntryGroup):
        return codec.group(e)
    if isinstance(e, BasicPolicy):
        return codec.content(e)
    raise TypeError(f"cannot serialize {type(e).__name__}")


def to_json(e, prefixes: Mapping[str, str] | None = None) -> bytes:
    return json.dumps(to_obj(e, prefixes), ensure_ascii=False, separators=(",", ":")).encode("utf-8")


_RECORD_HEAD = '{"@type":"ComplianceRecord","entry":'


def record_json(r: ComplianceRecord, prefixes: Mapping[str, str] | None = None,
                entry_json: bytes | None = None) -> bytes:
    """Encode a compliance record around the entry's existing JSON bytes.

    Saves re-encoding an entry that arrived as JSON; without ``entry_json``
    this is plain ``to_json``.
    """
    if entry_json is None or r.entry is None:
        return to_json(r, prefixes)
    text = json.dumps(_codec(prefixes).record(r, with_entry=False), ensure_ascii=False, separators=(",", ":"))
    head = _RECORD_HEAD + "null"
    assert text.startswith(head)
    return _RECORD_HEAD.encode() + entry_json.strip() + text[len(head):].encode("utf-8")


def from_json(b: bytes | str, prefixes: Mapping[str, str] | None = None, strict: bool = True):
    """Parse one JSON document into an entry, compliance record or group."""
    if isinstance(b, bytes):
        try:
            text = b.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"invalid UTF-8: {exc.reason}", offset=exc.start) from None
    else:
        text = b
    if not text.strip():
        raise ParseError("empty input", offset=0)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise ParseError(exc.msg, offset=offset) from None
    if not isinstance(obj, dict):
        raise ParseError("top-level JSON value must be an object", offset=0)
    codec = _codec(prefixes, strict)
    kind = obj.get("@type")
    if kind == "ComplianceRecord":
        return codec.parse_record(obj)
    if kind == "LogEntryGroup":
        return codec.parse_group(obj)
    if kind is not None:
        raise ValidationError(f"unknown @type {kind!r}")
    return codec.parse_entry(obj)


def content_from_json(b: bytes | str, prefixes: Mapping[str, str] | None = None) -> BasicPolicy:
    return _Codec(prefixes).parse_content(json.loads(b))


def policy_from_json(b: bytes | str, prefixes: Mapping[str, str] | None = None) -> GeneralPolicy:
    """A consent policy file: one content object or a list of them."""
    obj = json.loads(b)
    codec = _Codec(prefixes)
    if isinstance(obj, dict):
        obj = [obj]
    return GeneralPolicy(tuple(codec.parse_content(x) for x in obj))


def write_jsonl(path: str | Path, items: Iterable, prefixes: Mapping[str, str] | None = None) -> int:
    n = 0
    with open(path, "wb") as fh:
        for item in items:
            fh.write(item if isinstance(item, bytes) else to_json(item, prefixes))
            fh.write(b"\n")
            n += 1
    return n


def read_jsonl(path: str | Path, prefixes: Mapping[str, str] | None = None) -> Iterator:
    with open(path, "rb") as fh:
        for line in fh:
            if line.strip():
                yield from_json(line, prefixes)


# -- grouping ----------------------------------------------------------------

def content_key(c: BasicPolicy) -> bytes:
    return to_json(normalize_content(c))


def group_entries(
    entries: Iterable[LogEntry], keep_members: bool = False, id_prefix: str = "group"
) -> list[LogEntryGroup]:
    """One group per distinct (normalized) content, in order of first appearance."""
    groups: dict[bytes, list[LogEntry]] = {}
    for e in entries:
        if not e.kind.is_data_event:
            raise ValidationError(f"only data events can be grouped, got {e.kind.value}")
        groups.setdefault(content_key(e.content), []).append(e)
    out = []
    for i, members in enumerate(groups.values()):
        subjects = dict.fromkeys(m.data_subject for m in members if m.data_subject is not None)
        out.append(LogEntryGroup(
            group_id=f"{id_prefix}-{i}",
            validity_start=min(m.validity_time for m in members),
            validity_end=max(m.validity_time for m in members),
            dimension=members[0].content,
            subject_group=tuple(subjects),
            entry_members=tuple(m.entry_id for m in members) if keep_members else None,
        ))
    return out


# -- Turtle (emit only) ------------------------------------------------------

_TTL_PREFIXES = {
    "xsd": "http://www.w3.org/2001/XMLSchema#",
    "owl": "http://www.w3.org/2002/07/owl#",
    "rdf": "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
    "dct": "http://purl.org/dc/terms/",
    "rdfs": "http://www.w3.org/2000/01/rdf-schema#",
}
_SAFE_LOCAL = re.compile(r"[A-Za-z0-9][A-Za-z0-9_-]*")


def _ttl_string(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"')
    out = out.replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t")
    return f'"{out}"'


class _Turtle:
    def __init__(self, prefixes: Mapping[str, str]):
        self.prefixes = {**prefixes, **_TTL_PREFIXES}

    def node(self, s: str) -> str:
        """A prefixed name when safe, else an IRI; bare ids become URNs."""
        prefix = s.split(":", 1)[0] if ":" in s else None
        if prefix in self.prefixes:
            iri = expand(s, self.prefixes)
        elif "://" in s or s.startswith("urn:"):
            iri = s
        else:
            iri = "urn:splog:" + s
        name = compact(iri, self.prefixes)
        prefix, _, local = name.partition(":")
        if prefix in self.prefixes and _SAFE_LOCAL.fullmatch(local):
            return name
        return "<" + quote(iri, safe=":/#?=&%+;,@!$'()*~._-") + ">"

    def expr(self, e: ClassExpr) -> str:
        if isinstance(e, Atom):
            return self.node(e.cls)
        if isinstance(e, Null):
            return "spl:Null"
        if isinstance(e, Top):
            return self.node(e.category.root)
        op = "owl:unionOf" if isinstance(e, Union) else "owl:intersectionOf"
        return f"[ a owl:Class ; {op} ( {' '.join(self.expr(x) for x in e.items)} ) ]"

    def duration(self, d) -> str:
        if isinstance(d, DurationClass):
            return f"spl:hasDuration {self.node(d.cls)}"
        if d.max_days is not None and d.max_days == d.min_days:
            return f'spl:durationInDays "{d.min_days}"^^xsd:integer'
        bounds = f'[ xsd:minInclusive "{d.min_days}"^^xsd:integer ]'
        if d.max_days is not None:
            bounds += f' [ xsd:maxInclusive "{d.max_days}"^^xsd:integer ]'
        return (
            "spl:durationInDays [ a rdfs:Datatype ; owl:onDatatype xsd:integer ; "
            f"owl:withRestrictions ( {bounds} ) ]"
        )

    def content(self, c: BasicPolicy, indent: str) -> str:
        lines = [
            "a splog:LogEntryContent",
            f"spl:hasData {self.expr(c.data)}",
            f"spl:hasProcessing {self.expr(c.processing)}",
            f"spl:hasPurpose {self.expr(c.purpose)}",
            f"spl:hasStorage [ spl:hasLocation {self.expr(c.storage.location)} ; {self.duration(c.storage.duration)} ]",
            f"spl:hasRecipient {self.expr(c.recipient)}",
        ]
        return "[\n" + "".join(f"{indent}  {x} ;\n" for x in lines[:-1]) + f"{indent}  {lines[-1]}\n{indent}]"


def to_ttl(e: LogEntry, prefixes: Mapping[str, str] | None = None, header: bool = True) -> bytes:
    """Render one entry as Turtle using the splog/spl vocabulary."""
    ttl = _Turtle(prefixes or BUILTIN_PREFIXES)
    out = []
    if header:
        for p, iri in sorted(ttl.prefixes.items()):
            out.append(f"@prefix {p}: <{iri}> .")
        out.append("")
    props = [f"a splog:{e.kind.value}"]
    if e.data_subject is not None:
        props.append(f"splog:dataSubject {ttl.node(e.data_subject)}")
    if e.transaction_time is not None:
        props.append(f'splog:transactionTime "{format_ts(e.transaction_time)}"^^xsd:dateTimeStamp')
    props.append(f'splog:validityTime "{format_ts(e.validity_time)}"^^xsd:dateTimeStamp')
    if e.message is not None:
        props.append(f"splog:message {_ttl_string(e.message)}")
    if isinstance(e.content, BasicPolicy):
        props.append(f"splog:eventContent {ttl.content(e.content, '  ')}")
    elif isinstance(e.content, GeneralPolicy):
        basics = " ".join(ttl.content(b, "    ") for b in e.content.basics)
        props.append(f"splog:consentPolicy [ a owl:Class ; owl:unionOf ( {basics} ) ]")
    if e.revokes is not None:
        props.append(f"splog:revoke {ttl.node(e.revokes)}")
    for r in e.recipient_instances or ():
        props.append(f"splog:recipient {ttl.node(r)}")
    if e.immutable_record is not None:
        props.append(f"splog:inmutableRecord {ttl.node(e.immutable_record)}")
    if e.bpm_activity is not None:
        props.append(f"splog:activity {ttl.node(e.bpm_activity)}")
    if e.bpm_case is not None:
        props.append(f"splog:case {ttl.node(e.bpm_case)}")
    subject = ttl.node(e.entry_id)
    if e.log_id is not None:
        out.append(f"{ttl.node(e.log_id)} splog:logEntry {subject} .")
    out.append(f"{subject} " + " ;\n  ".join(props) + " .")
    return ("\n".join(out) + "\n").encode("utf-8")


def timestamp_ms(ms: int) -> datetime:
    return datetime(1970, 1, 1, tzinfo=timezone.utc) + timedelta(milliseconds=ms)


def epoch_ms(dt: datetime) -> int:
    return (dt - datetime(1970, 1, 1, tzinfo=timezone.utc)) // timedelta(milliseconds=1)
