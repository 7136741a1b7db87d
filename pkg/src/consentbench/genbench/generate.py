"""Synthetic consents and data events with known compliance labels.

Every user gets one consent with 1..``policies`` basic policies.  Events are
scheduled round-robin over users: the k-th event of user u is due at
``k*rate + u*rate/users`` after the start.  A compliant event specializes one
of the user's basics (a descendant for every attribute, a single day within
the storage bound); a violating event is drawn at random and confirmed with
the reasoner, falling back to a systematic search over one-attribute edits.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from fractions import Fraction
from typing import Iterator

from ..errors import GenerationStuck
from ..policy import Atom, BasicPolicy, GeneralPolicy, Interval, StorageExpr
from ..reasoner import complies
from ..splog import Kind, LogEntry
from ..vocab import Category, Taxonomy
from .config import GenConfig

# consents are valid from BASE_TIME; events start one second later
BASE_TIME = datetime(2019, 1, 1, tzinfo=timezone.utc)
EVENT_START = BASE_TIME + timedelta(seconds=1)
LOG_ID = "log-bench"
MAX_DAYS = 730
RANDOM_TRIES = 20

_CLASS_CATS = (Category.DATA, Category.PROCESSING, Category.PURPOSE,
               Category.RECIPIENT, Category.LOCATION)


@dataclass(frozen=True)
class GeneratedEvent:
    entry: LogEntry
    compliant: bool  # ground-truth label
    offset_ns: int  # due time relative to the start of the stream
    index: int


def user_id(u: int) -> str:
    return f"user{u}"


def _pools(t: Taxonomy) -> dict[Category, tuple[str, ...]]:
    return {cat: t.by_category[cat] for cat in _CLASS_CATS}


def _random_basic(rng: random.Random, pools) -> BasicPolicy:
    d, pr, pu, r, loc = (Atom(rng.choice(pools[cat])) for cat in _CLASS_CATS)
    if rng.random() < 0.5:
        dur = Interval(0, None)
    else:
        dur = Interval(0, rng.randint(1, MAX_DAYS))
    return BasicPolicy(d, pr, pu, r, StorageExpr(loc, dur))


def gen_consents(cfg: GenConfig, t: Taxonomy) -> list[tuple[str, LogEntry]]:
    """(user id, consent assertion) for every user, valid from :data:`BASE_TIME`."""
    rng = random.Random(f"{cfg.seed}:consents")
    pools = _pools(t)
    out = []
    for u in range(cfg.users):
        n = rng.randint(1, cfg.policies)
        basics = tuple(_random_basic(rng, pools) for _ in range(n))
        out.append((user_id(u), LogEntry(
            entry_id=f"consent-{user_id(u)}",
            kind=Kind.CONSENT_ASSERTION,
            validity_time=BASE_TIME,
            log_id=LOG_ID,
            data_subject=user_id(u),
            transaction_time=BASE_TIME,
            content=GeneralPolicy(basics),
        )))
    return out


def _specialize(b: BasicPolicy, rng: random.Random, t: Taxonomy) -> BasicPolicy:
    picks = [Atom(rng.choice(sorted(t.descendants[e.cls]))) for e in b.attributes()]
    dur = b.storage.duration
    hi = dur.max_days if dur.max_days is not None else dur.min_days + MAX_DAYS
    day = rng.randint(dur.min_days, hi)
    return BasicPolicy(*picks[:4], StorageExpr(picks[4], Interval.point(day)))


def _with_attr(c: BasicPolicy, i: int, value) -> BasicPolicy:
    attrs = list(c.attributes())
    if i < 5:
        attrs[i] = value
        dur = c.storage.duration
    else:
        dur = value
    return BasicPolicy(*attrs[:4], StorageExpr(attrs[4], dur))


def _violation(consent: GeneralPolicy, rng: random.Random, t: Taxonomy, pools) -> BasicPolicy:
    base = _specialize(rng.choice(consent.basics), rng, t)
    for _ in range(RANDOM_TRIES):
        i = rng.randrange(6)
        if i < 5:
            value = Atom(rng.choice(pools[_CLASS_CATS[i]]))
        else:
            value = Interval.point(rng.randint(0, 2 * MAX_DAYS))
        cand = _with_attr(base, i, value)
        if not complies(cand, consent, t).compliant:
            return cand
    # systematic: every single-attribute edit of the base content
    bounds = [b.storage.duration.max_days for b in consent.basics]
    if all(x is not None for x in bounds):
        days = [Interval.point(max(bounds) + 1)]
    else:
        days = []
    edits = [(i, Atom(x)) for i in range(5) for x in pools[_CLASS_CATS[i]]]
    edits += [(5, d) for d in days]
    rng.shuffle(edits)
    for i, value in edits:
        cand = _with_attr(base, i, value)
        if not complies(cand, consent, t).compliant:
            return cand
    raise GenerationStuck("every content reachable by one edit is authorized by the consent")


def is_compliant_slot(i: int, ratio: Fraction) -> bool:
    """Exact fixed-ratio labelling: the first n slots hold floor(n*ratio/100) passes."""
    return (i + 1) * ratio // 100 > i * ratio // 100


def gen_events(cfg: GenConfig, consents: list[tuple[str, LogEntry]], t: Taxonomy) -> Iterator[GeneratedEvent]:
    """Data events in due order; unbounded when ``cfg`` sets neither events nor test time."""
    rng = random.Random(f"{cfg.seed}:events")
    pools = _pools(t)
    by_user = {user: e.content for user, e in consents}
    ratio = None if cfg.pass_ratio is None else Fraction(str(cfg.pass_ratio))
    total = cfg.event_count()
    users = cfg.users
    i = 0
    while total is None or i < total:
        k, u = divmod(i, users)
        offset = k * cfg.rate_ns + u * cfg.rate_ns // users
        user = user_id(u)
        consent = by_user[user]
        label = rng.random() < 0.5 if ratio is None else is_compliant_slot(i, ratio)
        if label:
            content = _specialize(rng.choice(consent.basics), rng, t)
        else:
            content = _violation(consent, rng, t, pools)
        when = EVENT_START + timedelta(microseconds=offset // 1000)
        sharing = rng.random() < 0.2
        entry = LogEntry(
            entry_id=f"ev-{i}",
            kind=Kind.SHARING_EVENT if sharing else Kind.PROCESSING_EVENT,
            validity_time=when,
            log_id=LOG_ID,
            data_subject=user,
            transaction_time=when,
            content=content,
            recipient_instances=(f"org-{rng.randrange(100)}",) if sharing else None,
        )
        yield GeneratedEvent(entry, label, offset, i)
        i += 1

