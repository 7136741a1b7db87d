"""Usage policies and log-entry content over the five-attribute model.

Class expressions are immutable trees of ``Atom``, ``Union``,
``Intersection``, ``Top`` and ``Null`` nodes.  A ``BasicPolicy`` fixes one
expression per attribute; a ``GeneralPolicy`` is a union of basics.  Log
entry content has the same shape as a basic policy (``LogContent``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import BadInterval, CategoryMismatch, EmptyUnion, UnknownClass, ValidationError
from .vocab import NULL, Category, ClassId, Taxonomy


@dataclass(frozen=True)
class Atom:
    cls: ClassId


@dataclass(frozen=True)
class Union:
    items: tuple

    def __post_init__(self):
        if len(self.items) < 2:
            raise EmptyUnion(f"Union needs at least two members, got {len(self.items)}")


@dataclass(frozen=True)
class Intersection:
    items: tuple

    def __post_init__(self):
        if len(self.items) < 2:
            raise EmptyUnion(f"Intersection needs at least two members, got {len(self.items)}")


@dataclass(frozen=True)
class Top:
    category: Category


@dataclass(frozen=True)
class Null:
    category: Category


ClassExpr = Atom | Union | Intersection | Top | Null


@dataclass(frozen=True)
class DurationClass:
    cls: ClassId


@dataclass(frozen=True)
class Interval:
    """Closed day interval; ``max_days=None`` means unbounded."""

    min_days: int = 0
    max_days: int | None = None

    def __post_init__(self):
        if self.min_days < 0 or (self.max_days is not None and self.max_days < self.min_days):
            raise BadInterval(f"bad interval [{self.min_days}, {self.max_days}]")

    @classmethod
    def point(cls, days: int) -> Interval:
        return cls(days, days)


DurationExpr = DurationClass | Interval


@dataclass(frozen=True)
class StorageExpr:
    location: ClassExpr
    duration: DurationExpr = Interval()


@dataclass(frozen=True)
class BasicPolicy:
    data: ClassExpr
    processing: ClassExpr
    purpose: ClassExpr
    recipient: ClassExpr
    storage: StorageExpr

    def attributes(self) -> tuple[ClassExpr, ...]:
        """Class-valued attributes in canonical order (location last)."""
        return (self.data, self.processing, self.purpose, self.recipient, self.storage.location)


# Event content uses exactly the policy shape.
LogContent = BasicPolicy


@dataclass(frozen=True)
class GeneralPolicy:
    basics: tuple[BasicPolicy, ...]

    def __post_init__(self):
        if not self.basics:
            raise EmptyUnion("a general policy needs at least one basic policy")


ATTRIBUTES: tuple[tuple[str, Category], ...] = (
    ("data", Category.DATA),
    ("processing", Category.PROCESSING),
    ("purpose", Category.PURPOSE),
    ("recipient", Category.RECIPIENT),
    ("location", Category.LOCATION),
)


def union_of(items: Sequence[ClassExpr]) -> ClassExpr:
    items = tuple(items)
    return items[0] if len(items) == 1 else Union(items)


def intersection_of(items: Sequence[ClassExpr]) -> ClassExpr:
    items = tuple(items)
    return items[0] if len(items) == 1 else Intersection(items)


def normalize(e: ClassExpr) -> ClassExpr:
    """Rewrite Top to its root atom and flatten nested same-kind nodes."""
    if isinstance(e, Top):
        return Atom(e.category.root)
    if isinstance(e, (Union, Intersection)):
        kind = type(e)
        flat = []
        for item in e.items:
            item = normalize(item)
            flat.extend(item.items if isinstance(item, kind) else (item,))
        return kind(tuple(flat))
    return e


def normalize_content(c: BasicPolicy) -> BasicPolicy:
    return BasicPolicy(
        normalize(c.data),
        normalize(c.processing),
        normalize(c.purpose),
        normalize(c.recipient),
        StorageExpr(normalize(c.storage.location), c.storage.duration),
    )


def normalize_policy(p: GeneralPolicy) -> GeneralPolicy:
    return GeneralPolicy(tuple(normalize_content(b) for b in p.basics))


def disjuncts(e: ClassExpr) -> list[ClassExpr]:
    """Union-free expressions whose union is ``e`` (distributes over intersections)."""
    if isinstance(e, Union):
        return [d for item in e.items for d in disjuncts(item)]
    if isinstance(e, Intersection):
        out = []
        for combo in itertools.product(*(disjuncts(item) for item in e.items)):
            flat = []
            for part in combo:
                flat.extend(part.items if isinstance(part, Intersection) else (part,))
            out.append(Intersection(tuple(flat)))
        return out
    return [e]


def dnf(c: BasicPolicy) -> list[BasicPolicy]:
    """Expand every union in ``c`` into a list of union-free contents."""
    branches = [disjuncts(e) for e in c.attributes()]
    if all(len(b) == 1 for b in branches):
        return [c]
    return [
        BasicPolicy(d, pr, pu, r, StorageExpr(loc, c.storage.duration))
        for d, pr, pu, r, loc in itertools.product(*branches)
    ]


def atoms(e: ClassExpr) -> Iterator[ClassId]:
    if isinstance(e, Atom):
        yield e.cls
    elif isinstance(e, (Union, Intersection)):
        for item in e.items:
            yield from atoms(item)


def _check_expr(e: ClassExpr, cat: Category, t: Taxonomy, where: str) -> None:
    if isinstance(e, Atom):
        if e.cls not in t.category_of:
            raise UnknownClass(f"{where}: {t.compact(e.cls)}")
        if t.category_of[e.cls] is not cat:
            raise CategoryMismatch(
                f"{where}: {t.compact(e.cls)} is a {t.category_of[e.cls].value} class, expected {cat.value}"
            )
    elif isinstance(e, (Top, Null)):
        if e.category is not cat:
            raise CategoryMismatch(f"{where}: {e.category.value} filler, expected {cat.value}")
    elif isinstance(e, (Union, Intersection)):
        if len(e.items) < 2:
            raise EmptyUnion(where)
        for item in e.items:
            _check_expr(item, cat, t, where)
    else:
        raise ValidationError(f"{where}: not a class expression: {e!r}")


def _check_duration(d: DurationExpr, t: Taxonomy) -> None:
    if isinstance(d, Interval):
        if d.min_days < 0 or (d.max_days is not None and d.max_days < d.min_days):
            raise BadInterval(f"[{d.min_days}, {d.max_days}]")
    elif isinstance(d, DurationClass):
        _check_expr(Atom(d.cls), Category.DURATION, t, "storage.duration")
    else:
        raise ValidationError(f"storage.duration: not a duration: {d!r}")


def validate(p: GeneralPolicy | BasicPolicy, t: Taxonomy) -> None:
    """Raise the first problem found; return None when ``p`` is well-formed."""
    basics: Iterable[BasicPolicy] = p.basics if isinstance(p, GeneralPolicy) else (p,)
    for i, b in enumerate(basics):
        prefix = f"basic[{i}]." if isinstance(p, GeneralPolicy) else ""
        for (name, cat), e in zip(ATTRIBUTES, b.attributes()):
            _check_expr(e, cat, t, prefix + name)
        _check_duration(b.storage.duration, t)


def make_basic(
    t: Taxonomy,
    data,
    processing,
    purpose,
    recipient,
    location,
    duration: DurationExpr | str | None = None,
) -> BasicPolicy:
    """Build a basic policy from compact names.

    Each attribute may be a name, a list of names (union) or an expression.
    """

    def expr(v, cat: Category) -> ClassExpr:
        if isinstance(v, (Atom, Union, Intersection, Top, Null)):
            return v
        if isinstance(v, (list, tuple)):
            return union_of([expr(x, cat) for x in v])
        iri = t.expand(v)
        return Null(cat) if iri == NULL else Atom(iri)

    if duration is None:
        duration = Interval()
    elif isinstance(duration, str):
        duration = DurationClass(t.expand(duration))
    out = BasicPolicy(
        expr(data, Category.DATA),
        expr(processing, Category.PROCESSING),
        expr(purpose, Category.PURPOSE),
        expr(recipient, Category.RECIPIENT),
        StorageExpr(expr(location, Category.LOCATION), duration),
    )
    validate(out, t)
    return out


def top_policy() -> BasicPolicy:
    """Authorizes every content whose duration is an interval."""
    return BasicPolicy(
        Atom(Category.DATA.root),
        Atom(Category.PROCESSING.root),
        Atom(Category.PURPOSE.root),
        Atom(Category.RECIPIENT.root),
        StorageExpr(Atom(Category.LOCATION.root), Interval(0, None)),
    )
