"""Class taxonomies for the five-attribute usage model.

A taxonomy is a DAG of named classes, each belonging to one of six
categories.  The built-in vocabulary holds the category roots and the
example classes of the SPECIAL auxiliary vocabularies; use cases extend it
with line-oriented taxonomy files::

    # comments start with '#'
    @prefix befit: <http://example.org/befit#>
    befit:SensorGathering subClassOf svpr:Collect

Grammar (one statement per line, blank lines ignored):

    prefix-line := "@prefix" NAME[":"] IRI ["."]
    axiom-line  := CLASS ("subClassOf" | "rdfs:subClassOf") CLASS ["."]
    IRI         := "<" absolute-iri ">" | absolute-iri
    CLASS       := prefix ":" local | "<" absolute-iri ">" | absolute-iri

Classes declared by a file must be new; the built-in classes are closed.
"""

from __future__ import annotations

import enum
import graphlib
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from .errors import (
    CategoryMismatch,
    CycleDetected,
    DuplicateClass,
    ParseError,
    UnknownClass,
    UnknownParent,
    ValidationError,
)

ClassId = str

SPECIAL = "http://www.specialprivacy.eu"
SPL = SPECIAL + "/langs/usage-policy#"
SPLOG = SPECIAL + "/langs/splog#"

BUILTIN_PREFIXES: dict[str, str] = {
    "spl": SPL,
    "splog": SPLOG,
    "svd": SPECIAL + "/vocabs/data#",
    "svpr": SPECIAL + "/vocabs/processing#",
    "svpu": SPECIAL + "/vocabs/purposes#",
    "svr": SPECIAL + "/vocabs/recipients#",
    "svl": SPECIAL + "/vocabs/locations#",
    "svdu": SPECIAL + "/vocabs/duration#",
}

# Bottom filler; not a member of any taxonomy (see policy.Null).
NULL: ClassId = SPL + "Null"


class Category(enum.Enum):
    DATA = "Data"
    PROCESSING = "Processing"
    PURPOSE = "Purpose"
    RECIPIENT = "Recipient"
    LOCATION = "Location"
    DURATION = "Duration"

    @property
    def root(self) -> ClassId:
        return SPL + "Any" + self.value


ROOTS: dict[ClassId, Category] = {c.root: c for c in Category}

_EXAMPLE_CLASSES: dict[Category, tuple[str, ...]] = {
    Category.DATA: (
        "svd:Activity", "svd:Anonymized", "svd:Financial", "svd:Health",
        "svd:Location", "svd:Navigation", "svd:Preference", "svd:Profile",
    ),
    Category.PROCESSING: (
        "svpr:Aggregate", "svpr:Analyze", "svpr:Anonymize", "svpr:Collect",
        "svpr:Copy", "svpr:Derive", "svpr:Move", "svpr:Query", "svpr:Transfer",
    ),
    Category.PURPOSE: (
        "svpu:Account", "svpu:Arts", "svpu:Delivery", "svpu:Education",
        "svpu:Feedback", "svpu:Gaming", "svpu:Health", "svpu:Marketing",
        "svpu:Payment", "svpu:Search",
    ),
    Category.RECIPIENT: (
        "svr:Delivery", "svr:OtherRecipient", "svr:Ours", "svr:Public",
        "svr:Same", "svr:Unrelated",
    ),
    Category.LOCATION: (
        "svl:ControllerServer", "svl:EU", "svl:EULike", "svl:ThirdCountries",
        "svl:OurServers", "svl:ProcessorServers", "svl:ThirdParty",
    ),
    Category.DURATION: (
        "svdu:BusinessPractices", "svdu:Indefinitely", "svdu:LegalRequirement",
        "svdu:StatedPurpose",
    ),
}


def expand(name: str, prefixes: Mapping[str, str]) -> ClassId:
    """Expand a compact name (``svd:Health``) to its absolute IRI.

    Absolute IRIs (with or without angle brackets) are returned unchanged.
    """
    if name.startswith("<") and name.endswith(">"):
        return name[1:-1]
    prefix, sep, local = name.partition(":")
    if not sep:
        raise ValueError(f"not a compact or absolute IRI: {name!r}")
    if prefix in prefixes:
        return prefixes[prefix] + local
    if local.startswith("//") or prefix in ("urn", "http", "https"):
        return name
    raise ValueError(f"unknown prefix {prefix!r} in {name!r}")


def compact(iri: ClassId, prefixes: Mapping[str, str]) -> str:
    """Inverse of :func:`expand`; longest matching namespace wins."""
    best = None
    for prefix, base in prefixes.items():
        if iri.startswith(base) and (best is None or len(base) > len(prefixes[best])):
            best = prefix
    if best is None:
        return iri
    return f"{best}:{iri[len(prefixes[best]):]}"


@dataclass(frozen=True)
class Taxonomy:
    classes: frozenset[ClassId]
    edges: frozenset[tuple[ClassId, ClassId]]
    category_of: Mapping[ClassId, Category]
    prefixes: Mapping[str, str] = field(default_factory=lambda: dict(BUILTIN_PREFIXES))

    def __post_init__(self):
        self.validate()

    def __hash__(self):
        return hash((self.classes, self.edges))

    def validate(self) -> None:
        for c in ROOTS:
            if c not in self.classes:
                raise ValidationError(f"missing category root {c}")
        for c in self.classes:
            if c not in self.category_of:
                raise ValidationError(f"class {c} has no category")
        for child, parent in self.edges:
            for c in (child, parent):
                if c not in self.classes:
                    raise UnknownClass(c)
            if self.category_of[child] is not self.category_of[parent]:
                raise CategoryMismatch(f"{child} subClassOf {parent} crosses categories")
            if child in ROOTS:
                raise ValidationError(f"category root {child} cannot have a parent")
        try:
            tuple(graphlib.TopologicalSorter(self.parents).static_order())
        except graphlib.CycleError as exc:
            raise CycleDetected(" -> ".join(exc.args[1])) from None
        for c in self.classes:
            root = self.category_of[c].root
            if root not in self.ancestors[c]:
                raise ValidationError(f"{c} does not reach its root {root}")

    @cached_property
    def parents(self) -> dict[ClassId, frozenset[ClassId]]:
        out: dict[ClassId, set[ClassId]] = {c: set() for c in self.classes}
        for child, parent in self.edges:
            out[child].add(parent)
        return {c: frozenset(ps) for c, ps in out.items()}

    @cached_property
    def children(self) -> dict[ClassId, frozenset[ClassId]]:
        out: dict[ClassId, set[ClassId]] = {c: set() for c in self.classes}
        for child, parent in self.edges:
            out[parent].add(child)
        return {c: frozenset(cs) for c, cs in out.items()}

    @cached_property
    def ancestors(self) -> dict[ClassId, frozenset[ClassId]]:
        """Reflexive-transitive superclasses of every class."""
        order = graphlib.TopologicalSorter(self.parents).static_order()
        out: dict[ClassId, frozenset[ClassId]] = {}
        for c in order:  # parents come first
            acc = {c}
            for p in self.parents[c]:
                acc |= out[p]
            out[c] = frozenset(acc)
        return out

    @cached_property
    def descendants(self) -> dict[ClassId, frozenset[ClassId]]:
        out: dict[ClassId, set[ClassId]] = {c: set() for c in self.classes}
        for c, ancs in self.ancestors.items():
            for a in ancs:
                out[a].add(c)
        return {c: frozenset(ds) for c, ds in out.items()}

    @cached_property
    def by_category(self) -> dict[Category, tuple[ClassId, ...]]:
        out: dict[Category, list[ClassId]] = {c: [] for c in Category}
        for c in sorted(self.classes):
            out[self.category_of[c]].append(c)
        return {k: tuple(v) for k, v in out.items()}

    def category(self, c: ClassId) -> Category:
        try:
            return self.category_of[c]
        except KeyError:
            raise UnknownClass(c) from None

    def is_subclass(self, a: ClassId, b: ClassId) -> bool:
        if self.category(a) is not self.category(b):
            raise CategoryMismatch(f"{a} and {b} belong to different categories")
        return b in self.ancestors[a]

    def extension_of(self, c: ClassId) -> frozenset[ClassId]:
        self.category(c)
        return self.descendants[c]

    def expand(self, name: str) -> ClassId:
        return expand(name, self.prefixes)

    def compact(self, iri: ClassId) -> str:
        return compact(iri, self.prefixes)


def is_subclass(a: ClassId, b: ClassId, t: Taxonomy) -> bool:
    return t.is_subclass(a, b)


def extension_of(c: ClassId, t: Taxonomy) -> frozenset[ClassId]:
    return t.extension_of(c)


def builtin_special() -> Taxonomy:
    """Category roots plus a handful of example classes, all one level deep."""
    return _BUILTIN


def _make_builtin() -> Taxonomy:
    classes = set(ROOTS)
    edges = set()
    category_of = dict(ROOTS)
    for cat, names in _EXAMPLE_CLASSES.items():
        for name in names:
            iri = expand(name, BUILTIN_PREFIXES)
            classes.add(iri)
            edges.add((iri, cat.root))
            category_of[iri] = cat
    return Taxonomy(frozenset(classes), frozenset(edges), category_of)


_BUILTIN = _make_builtin()


# '#' only opens a comment at line start or after whitespace (IRIs contain '#')
_COMMENT = re.compile(r"(^|\s)#.*$")


def parse_taxonomy(source: str) -> tuple[dict[str, str], list[tuple[str, str, int]]]:
    """Parse a taxonomy file into (prefixes, [(child, parent, line_no)])."""
    prefixes = dict(BUILTIN_PREFIXES)
    declared: dict[str, str] = {}
    raw_axioms: list[tuple[str, str, int]] = []
    for lineno, line in enumerate(source.splitlines(), start=1):
        text = _COMMENT.sub("", line).strip()
        if not text:
            continue
        if text.endswith("."):
            text = text[:-1].rstrip()
        tokens = text.split()
        if tokens[0] == "@prefix":
            if len(tokens) != 3:
                raise ParseError("expected '@prefix <name> <iri>'", line=lineno)
            name = tokens[1].rstrip(":")
            iri = tokens[2]
            if iri.startswith("<"):
                if not iri.endswith(">"):
                    raise ParseError(f"unterminated IRI {iri!r}", line=lineno)
                iri = iri[1:-1]
            if not iri or ":" not in iri:
                raise ParseError(f"prefix IRI must be absolute: {iri!r}", line=lineno)
            if name in declared and declared[name] != iri:
                raise ParseError(f"prefix {name!r} redefined", line=lineno)
            if name in BUILTIN_PREFIXES and BUILTIN_PREFIXES[name] != iri:
                raise ParseError(f"built-in prefix {name!r} cannot be rebound", line=lineno)
            declared[name] = iri
            prefixes[name] = iri
            continue
        if len(tokens) != 3 or tokens[1] not in ("subClassOf", "rdfs:subClassOf"):
            raise ParseError(f"expected '<child> subClassOf <parent>', got {text!r}", line=lineno)
        raw_axioms.append((tokens[0], tokens[2], lineno))

    axioms = []
    for child, parent, lineno in raw_axioms:
        try:
            axioms.append((expand(child, prefixes), expand(parent, prefixes), lineno))
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
    return prefixes, axioms


def load_taxonomy(source: str, base: Taxonomy | None = None) -> Taxonomy:
    """Merge the classes declared in ``source`` into ``base`` (default built-in)."""
    base = base or builtin_special()
    prefixes, axioms = parse_taxonomy(source)
    prefixes = {**base.prefixes, **prefixes}

    new_parents: dict[ClassId, set[ClassId]] = {}
    first_line: dict[ClassId, int] = {}
    for child, parent, lineno in axioms:
        if child in base.classes:
            raise DuplicateClass(f"line {lineno}: {child} is already defined")
        new_parents.setdefault(child, set()).add(parent)
        first_line.setdefault(child, lineno)
    for child, parent, lineno in axioms:
        if parent not in base.classes and parent not in new_parents:
            raise UnknownParent(f"line {lineno}: {parent} is not a known class")

    try:
        order = list(graphlib.TopologicalSorter(
            {c: {p for p in ps if p in new_parents} for c, ps in new_parents.items()}
        ).static_order())
    except graphlib.CycleError as exc:
        raise CycleDetected(" -> ".join(exc.args[1])) from None

    category_of = dict(base.category_of)
    for c in order:
        cats = {category_of[p] for p in new_parents[c]}
        if len(cats) != 1:
            names = ", ".join(sorted(x.value for x in cats))
            raise CategoryMismatch(f"line {first_line[c]}: {c} has parents in {names}")
        category_of[c] = cats.pop()

    edges = set(base.edges)
    for c, ps in new_parents.items():
        edges.update((c, p) for p in ps)
    return Taxonomy(
        base.classes | frozenset(new_parents), frozenset(edges), category_of, prefixes
    )


def taxonomy_from_edges(
    edges: Iterable[tuple[ClassId, ClassId]], category_of: Mapping[ClassId, Category]
) -> Taxonomy:
    """Build a taxonomy directly; used for randomized testing."""
    classes = frozenset(category_of)
    return Taxonomy(classes, frozenset(edges), dict(category_of))
