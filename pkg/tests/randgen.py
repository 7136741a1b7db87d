"""Seeded random taxonomies, expressions and (content, consent) pairs for tests.

Consents are often derived from the content (generalized classes, widened
or split durations, coverage spread over several basics) so that compliant
and borderline cases are common, not just random misses.
"""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

from consentbench.policy import (
    Atom,
    BasicPolicy,
    DurationClass,
    GeneralPolicy,
    Intersection,
    Interval,
    Null,
    StorageExpr,
    Top,
    Union,
    normalize_content,
    normalize_policy,
)
from consentbench.splog import Kind, LogEntry
from consentbench.vocab import ROOTS, Category, Taxonomy, taxonomy_from_edges

NS = "http://example.org/rand#"
CLASS_CATS = (Category.DATA, Category.PROCESSING, Category.PURPOSE, Category.RECIPIENT, Category.LOCATION)
MAX_DAYS = 730


def random_taxonomy(rng: random.Random, max_classes: int = 40, multi: float = 0.3) -> Taxonomy:
    """A DAG per category, with roots; a class gets a second parent with probability ``multi``."""
    category_of = dict(ROOTS)
    members = {cat: [cat.root] for cat in Category}
    edges = set()
    for i in range(rng.randint(0, max_classes - len(ROOTS))):
        cat = rng.choice(list(Category))
        c = f"{NS}C{i}"
        pool = members[cat]
        parents = {rng.choice(pool)}
        if len(pool) > 1 and rng.random() < multi:
            parents.add(rng.choice(pool))
        edges.update((c, p) for p in parents)
        category_of[c] = cat
        pool.append(c)
    return taxonomy_from_edges(edges, category_of)


def random_expr(rng: random.Random, t: Taxonomy, cat: Category, depth: int = 2):
    roll = rng.random()
    pool = t.by_category[cat]
    if depth == 0 or roll < 0.55:
        return Atom(rng.choice(pool))
    if roll < 0.6:
        return Top(cat)
    if roll < 0.63:
        return Null(cat)
    kind = Union if roll < 0.85 else Intersection
    return kind(tuple(random_expr(rng, t, cat, depth - 1) for _ in range(rng.randint(2, 3))))


def random_interval(rng: random.Random) -> Interval:
    lo = rng.randint(0, MAX_DAYS)
    if rng.random() < 0.25:
        return Interval(lo, None)
    return Interval(lo, rng.randint(lo, MAX_DAYS))


def random_duration(rng: random.Random, t: Taxonomy):
    if rng.random() < 0.15:
        return DurationClass(rng.choice(t.by_category[Category.DURATION]))
    return random_interval(rng)


def random_basic(rng: random.Random, t: Taxonomy) -> BasicPolicy:
    d, pr, pu, r, loc = (random_expr(rng, t, cat) for cat in CLASS_CATS)
    return BasicPolicy(d, pr, pu, r, StorageExpr(loc, random_duration(rng, t)))


def _generalize(rng: random.Random, e, t: Taxonomy, cat: Category):
    """An expression likely (not certainly) to contain ``e``."""
    roll = rng.random()
    if isinstance(e, Atom) and roll < 0.6:
        return Atom(rng.choice(sorted(t.ancestors[e.cls])))
    if roll < 0.75:
        return e
    if roll < 0.9:
        return Union((e, random_expr(rng, t, cat, 1)))
    return random_expr(rng, t, cat)


def _widen(rng: random.Random, d, t: Taxonomy):
    if isinstance(d, DurationClass):
        if rng.random() < 0.7:
            return DurationClass(rng.choice(sorted(t.ancestors[d.cls])))
        return random_duration(rng, t)
    roll = rng.random()
    if roll < 0.5:
        lo = rng.randint(0, d.min_days)
        hi = None if d.max_days is None or rng.random() < 0.3 else rng.randint(d.max_days, MAX_DAYS)
        return Interval(lo, hi)
    if roll < 0.7:
        return d
    return random_interval(rng)


def _split(rng: random.Random, d: Interval) -> tuple[Interval, Interval]:
    """Two intervals whose union is ``d``, possibly with a one-day gap or overlap."""
    hi = d.max_days if d.max_days is not None else d.min_days + rng.randint(0, 50)
    cut = rng.randint(d.min_days, hi)
    jitter = rng.choice((0, 0, 0, 1, -1))
    first = Interval(d.min_days, cut)
    start = max(0, min(cut + 1 + jitter, MAX_DAYS + 1))
    second = Interval(start, d.max_days if d.max_days is None else max(d.max_days, start))
    return first, second


def related_consent(rng: random.Random, c: BasicPolicy, t: Taxonomy) -> GeneralPolicy:
    basics = []
    for _ in range(rng.randint(1, 3)):
        if rng.random() < 0.3:
            basics.append(random_basic(rng, t))
            continue
        attrs = [_generalize(rng, e, t, cat) for e, cat in zip(c.attributes(), CLASS_CATS)]
        dur = _widen(rng, c.storage.duration, t)
        basics.append(BasicPolicy(*attrs[:4], StorageExpr(attrs[4], dur)))
    b0 = basics[0]
    if isinstance(c.storage.duration, Interval) and rng.random() < 0.25:
        # spread the duration over two basics with otherwise identical classes
        first, second = _split(rng, c.storage.duration)
        attrs = list(b0.attributes())
        basics[0] = BasicPolicy(*attrs[:4], StorageExpr(attrs[4], first))
        basics.append(BasicPolicy(*attrs[:4], StorageExpr(attrs[4], second)))
    if isinstance(c.data, Union) and rng.random() < 0.3:
        # one basic per data disjunct
        rest = list(b0.attributes())[1:]
        for item in c.data.items:
            basics.append(BasicPolicy(_generalize(rng, item, t, Category.DATA), *rest[:3],
                                      StorageExpr(rest[3], b0.storage.duration)))
    rng.shuffle(basics)
    return GeneralPolicy(tuple(basics))


def random_case(rng: random.Random, max_classes: int = 40) -> tuple[BasicPolicy, GeneralPolicy, Taxonomy]:
    t = random_taxonomy(rng, max_classes)
    c = random_basic(rng, t)
    if rng.random() < 0.2:
        consent = GeneralPolicy(tuple(random_basic(rng, t) for _ in range(rng.randint(1, 3))))
    else:
        consent = related_consent(rng, c, t)
    return c, consent, t


_TEXT = "abc xyz\"\\\n\té ümlaut 漢字 🙂"


def _text(rng: random.Random) -> str:
    return "".join(rng.choice(_TEXT) for _ in range(rng.randint(1, 24)))


def random_entry(rng: random.Random, t: Taxonomy, n: int = 0) -> LogEntry:
    """A log entry of random kind with most optional fields exercised.

    Contents are normalized (Top written as its root class), the form a
    JSON round trip reproduces exactly.
    """
    kind = rng.choice(list(Kind))
    at = datetime(2018, 1, 1, tzinfo=timezone.utc) + timedelta(milliseconds=rng.randrange(10**11))
    content = None
    if kind is Kind.CONSENT_ASSERTION:
        content = normalize_policy(GeneralPolicy(tuple(random_basic(rng, t) for _ in range(rng.randint(1, 3)))))
    elif kind.is_data_event:
        content = normalize_content(random_basic(rng, t))
    maybe = lambda v: v if rng.random() < 0.5 else None  # noqa: E731
    return LogEntry(
        entry_id=f"entry-{n}",
        kind=kind,
        validity_time=at,
        log_id=maybe("log-a"),
        data_subject=maybe(f"user{rng.randrange(100)}"),
        transaction_time=maybe(at + timedelta(milliseconds=rng.randrange(5000))),
        message=maybe(_text(rng)),
        content=content,
        revokes=f"entry-{rng.randrange(n + 1)}" if kind is Kind.CONSENT_REVOCATION else None,
        recipient_instances=tuple(f"org-{i}" for i in range(rng.randint(0, 3)))
        if kind is Kind.SHARING_EVENT else None,
        immutable_record=maybe(f"block-{rng.randrange(10**6)}"),
        bpm_activity=maybe("activity-1"),
        bpm_case=maybe(f"case-{rng.randrange(50)}"),
    )
