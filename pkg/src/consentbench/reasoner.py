"""Compliance checking by structural subsumption.

Every class expression denotes a down-closed set of classes (the classes
reachable upward to it).  Such a set is the union of the principal down-sets
of its maximal elements, its *frontier*; so ``c ⊑ d`` holds iff every
frontier class of ``c`` lies in ``d``.  Intersections are reduced to the
frontier of their common descendants, which keeps the procedure exact under
multiple inheritance.

Content complies with a consent iff its authorization tuples are all
authorized by some basic policy.  Most content is covered by one basic; the
remaining cases split content into principal products and check each
product's duration against the union of the basics covering its classes.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

from .errors import CategoryMismatch
from .policy import (
    Atom,
    BasicPolicy,
    ClassExpr,
    DurationClass,
    DurationExpr,
    GeneralPolicy,
    Intersection,
    Interval,
    Null,
    Top,
    Union,
    dnf,
    validate,
)
from .vocab import Category, ClassId, Taxonomy


class Reason(enum.Enum):
    MATCH = "Match"
    NO_MATCH = "NoMatch"
    NO_CONSENT = "NoConsent"
    REVOKED = "Revoked"


@dataclass(frozen=True)
class ComplianceResult:
    compliant: bool
    matched_basic: int | None
    reason: Reason

    def __post_init__(self):
        assert self.compliant == (self.reason is Reason.MATCH)
        assert (self.matched_basic is not None) == self.compliant


def _cache(t: Taxonomy) -> dict:
    return t.__dict__.setdefault("_reasoner_cache", {})


def _maximal(classes, t: Taxonomy) -> frozenset[ClassId]:
    s = set(classes)
    return frozenset(x for x in s if not any(a in s for a in t.ancestors[x] if a != x))


def _meet_atoms(a: ClassId, b: ClassId, t: Taxonomy) -> frozenset[ClassId]:
    cache = _cache(t)
    key = (a, b) if a <= b else (b, a)
    hit = cache.get(key)
    if hit is None:
        if b in t.ancestors[a]:
            hit = frozenset((a,))
        elif a in t.ancestors[b]:
            hit = frozenset((b,))
        else:
            hit = _maximal(t.descendants[a] & t.descendants[b], t)
        cache[key] = hit
    return hit


def frontier(e: ClassExpr, t: Taxonomy) -> frozenset[ClassId]:
    """Maximal classes of the extension of ``e`` (empty iff ``e`` is empty)."""
    if isinstance(e, Atom):
        return frozenset((e.cls,))
    if isinstance(e, Top):
        return frozenset((e.category.root,))
    if isinstance(e, Null):
        return frozenset()
    if isinstance(e, Union):
        return _maximal(itertools.chain.from_iterable(frontier(x, t) for x in e.items), t)
    acc = frontier(e.items[0], t)
    for item in e.items[1:]:
        if not acc:
            break
        other = frontier(item, t)
        acc = _maximal(
            itertools.chain.from_iterable(_meet_atoms(a, b, t) for a in acc for b in other), t
        )
    return acc


def _atom_in(m: ClassId, d: ClassExpr, t: Taxonomy) -> bool:
    if isinstance(d, Atom):
        return d.cls in t.ancestors[m]
    if isinstance(d, Top):
        return True
    if isinstance(d, Null):
        return False
    if isinstance(d, Union):
        return any(_atom_in(m, x, t) for x in d.items)
    return all(_atom_in(m, x, t) for x in d.items)


def _subsumed(c: ClassExpr, d: ClassExpr, t: Taxonomy) -> bool:
    if type(c) is Atom and type(d) is Atom:
        return d.cls in t.ancestors[c.cls]
    if isinstance(d, Top):
        return True
    if isinstance(c, Null):
        return True
    if isinstance(c, Union):
        return all(_subsumed(x, d, t) for x in c.items)
    if isinstance(d, Intersection):
        return all(_subsumed(c, y, t) for y in d.items)
    if isinstance(c, Intersection):
        return all(_atom_in(m, d, t) for m in frontier(c, t))
    m = c.category.root if isinstance(c, Top) else c.cls
    return _atom_in(m, d, t)


def expr_category(e: ClassExpr, t: Taxonomy) -> Category:
    if isinstance(e, (Top, Null)):
        return e.category
    if isinstance(e, Atom):
        return t.category(e.cls)
    cats = {expr_category(x, t) for x in e.items}
    if len(cats) != 1:
        raise CategoryMismatch(f"expression mixes categories: {sorted(c.value for c in cats)}")
    return cats.pop()


def subsumes_expr(c: ClassExpr, d: ClassExpr, t: Taxonomy) -> bool:
    """True iff every class denoted by ``c`` is denoted by ``d``."""
    if expr_category(c, t) is not expr_category(d, t):
        raise CategoryMismatch("expressions belong to different categories")
    return _subsumed(c, d, t)


def duration_contained(c: DurationExpr, p: DurationExpr, t: Taxonomy | None = None) -> bool:
    if isinstance(c, Interval) and isinstance(p, Interval):
        if c.min_days < p.min_days:
            return False
        if p.max_days is None:
            return True
        return c.max_days is not None and c.max_days <= p.max_days
    if isinstance(c, DurationClass) and isinstance(p, DurationClass):
        if t is None:
            return c.cls == p.cls
        return t.is_subclass(c.cls, p.cls)
    return False


def _empty(c: BasicPolicy, t: Taxonomy) -> bool:
    return any(type(e) is not Atom and not frontier(e, t) for e in c.attributes())


def _fits(c: BasicPolicy, p: BasicPolicy, t: Taxonomy) -> bool:
    return (
        all(_subsumed(x, y, t) for x, y in zip(c.attributes(), p.attributes()))
        and duration_contained(c.storage.duration, p.storage.duration, t)
    )


def basic_subsumed(c: BasicPolicy, p: BasicPolicy, t: Taxonomy) -> bool:
    """Does the single basic ``p`` authorize all of the union-free content ``c``?"""
    return _empty(c, t) or _fits(c, p, t)


def _intervals_cover(target: Interval, parts: list[Interval]) -> bool:
    """Integer-day coverage of ``target`` by the union of ``parts``."""
    cur = target.min_days
    for iv in sorted(parts, key=lambda iv: iv.min_days):
        if iv.min_days > cur:
            break
        if iv.max_days is None:
            return True
        cur = max(cur, iv.max_days + 1)
        if target.max_days is not None and cur > target.max_days:
            return True
    return target.max_days is not None and cur > target.max_days


def _cover_term(term: BasicPolicy, basics: tuple[BasicPolicy, ...], t: Taxonomy) -> set[int] | None:
    """Indices of basics jointly covering the non-empty ``term``, or None if it is not covered."""
    used: set[int] = set()
    fronts = [frontier(e, t) for e in term.attributes()]
    dur = term.storage.duration
    for principal in itertools.product(*fronts):
        covering = [
            i for i, b in enumerate(basics)
            if all(_atom_in(m, y, t) for m, y in zip(principal, b.attributes()))
        ]
        if isinstance(dur, Interval):
            parts = [i for i in covering if isinstance(basics[i].storage.duration, Interval)]
            if not _intervals_cover(dur, [basics[i].storage.duration for i in parts]):
                return None
            used.update(parts)
        else:
            hit = next(
                (i for i in covering if duration_contained(dur, basics[i].storage.duration, t)),
                None,
            )
            if hit is None:
                return None
            used.add(hit)
    return used


def complies(c: BasicPolicy, consent: GeneralPolicy, t: Taxonomy, check: bool = False) -> ComplianceResult:
    """Decide whether the content ``c`` is authorized by ``consent``.

    ``matched_basic`` is the lowest-indexed basic that authorizes the whole
    content alone; when only a combination does, the lowest index used.
    """
    if check:
        validate(c, t)
        validate(consent, t)
    basics = consent.basics
    terms = [x for x in dnf(c) if not _empty(x, t)]
    if not terms:
        return ComplianceResult(True, 0, Reason.MATCH)
    for i, b in enumerate(basics):
        if all(_fits(term, b, t) for term in terms):
            return ComplianceResult(True, i, Reason.MATCH)
    used: set[int] = set()
    for term in terms:
        single = next((i for i, b in enumerate(basics) if _fits(term, b, t)), None)
        cover = {single} if single is not None else _cover_term(term, basics, t)
        if cover is None:
            return ComplianceResult(False, None, Reason.NO_MATCH)
        used |= cover
    return ComplianceResult(True, min(used), Reason.MATCH)
