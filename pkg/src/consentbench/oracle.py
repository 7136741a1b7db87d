"""Brute-force compliance by enumerating authorization tuples.

Kept deliberately naive and independent of :mod:`consentbench.reasoner`:
class extensions come from a fresh walk over the taxonomy edges, content is
expanded into explicit (data, processing, purpose, recipient, location,
duration) tuples and each tuple is looked up in the consent's basics.

Durations are sampled at every interval endpoint and its two neighbours,
plus one sentinel above every finite bound that only unbounded intervals
contain.  Interval containment over integer days is decided by those points.
"""

from __future__ import annotations

import itertools
from collections import deque

from .errors import UniverseTooLarge
from .policy import (
    Atom,
    BasicPolicy,
    ClassExpr,
    DurationClass,
    GeneralPolicy,
    Intersection,
    Interval,
    Null,
    Top,
    Union,
)
from .vocab import ClassId, Taxonomy

DEFAULT_MAX_UNIVERSE = 200_000


def _down_sets(t: Taxonomy) -> dict[ClassId, frozenset[ClassId]]:
    below: dict[ClassId, list[ClassId]] = {c: [] for c in t.classes}
    for child, parent in t.edges:
        below[parent].append(child)
    out = {}
    for c in t.classes:
        seen = {c}
        todo = deque([c])
        while todo:
            for x in below[todo.popleft()]:
                if x not in seen:
                    seen.add(x)
                    todo.append(x)
        out[c] = frozenset(seen)
    return out


class _Extensions:
    def __init__(self, t: Taxonomy):
        self.down = _down_sets(t)

    def of(self, e: ClassExpr) -> frozenset:
        if isinstance(e, Atom):
            return self.down[e.cls]
        if isinstance(e, Top):
            return self.down[e.category.root]
        if isinstance(e, Null):
            return frozenset()
        parts = [self.of(x) for x in e.items]
        if isinstance(e, Union):
            return frozenset().union(*parts)
        assert isinstance(e, Intersection)
        return frozenset.intersection(*parts)

    def duration(self, d, samples: list[int]) -> frozenset:
        if isinstance(d, DurationClass):
            return frozenset(("class", x) for x in self.down[d.cls])
        return frozenset(
            x for x in samples
            if d.min_days <= x and (d.max_days is None or x <= d.max_days)
        )


def duration_samples(durations) -> list[int]:
    points = {0}
    for d in durations:
        if isinstance(d, Interval):
            for e in (d.min_days, d.max_days):
                if e is not None:
                    points.update(x for x in (e - 1, e, e + 1) if x >= 0)
    sentinel = max(points) + 2
    return sorted(points) + [sentinel]


def _tuple_sets(b: BasicPolicy, ext: _Extensions, samples: list[int]) -> list[frozenset]:
    return [ext.of(e) for e in b.attributes()] + [ext.duration(b.storage.duration, samples)]


def oracle_complies(
    c: BasicPolicy,
    consent: GeneralPolicy,
    t: Taxonomy,
    max_universe: int = DEFAULT_MAX_UNIVERSE,
) -> bool:
    """tuple-set(c) ⊆ tuple-set(consent), by explicit enumeration."""
    ext = _Extensions(t)
    samples = duration_samples(
        [c.storage.duration] + [b.storage.duration for b in consent.basics]
    )
    content = _tuple_sets(c, ext, samples)
    size = 1
    for s in content:
        size *= len(s)
    if size > max_universe:
        raise UniverseTooLarge(f"{size} content tuples exceed the guard of {max_universe}")
    policy = [_tuple_sets(b, ext, samples) for b in consent.basics]
    for tup in itertools.product(*content):
        if not any(all(x in s for x, s in zip(tup, sets)) for sets in policy):
            return False
    return True


def content_tuples(c: BasicPolicy, t: Taxonomy, samples: list[int]) -> set[tuple]:
    """Explicit tuple set of ``c``; for checking normalizations on small inputs."""
    ext = _Extensions(t)
    return set(itertools.product(*_tuple_sets(c, ext, samples)))
