import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURES
from consentbench.errors import CategoryMismatch, UniverseTooLarge
from consentbench.oracle import oracle_complies
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
    dnf,
    make_basic,
    top_policy,
)
from consentbench.reasoner import (
    ComplianceResult,
    Reason,
    basic_subsumed,
    complies,
    duration_contained,
    subsumes_expr,
)
from consentbench.splog import content_from_json, policy_from_json
from consentbench.vocab import Category, builtin_special, load_taxonomy, taxonomy_from_edges
from randgen import random_basic, random_case, random_expr, random_taxonomy

T = builtin_special()


def befit_content(t, purpose="befit:HealthTracking"):
    return make_basic(t, "svd:Location", "befit:SensorGathering", purpose, "svr:Ours", "svl:OurServers")


def collect_policy(t):
    return GeneralPolicy((make_basic(t, "svd:Location", "svpr:Collect", "svpu:Health", "svr:Ours", "svl:OurServers"),))


def test_befit_event_complies(befit):
    res = complies(befit_content(befit), collect_policy(befit), befit)
    assert res == ComplianceResult(True, 0, Reason.MATCH)
    assert oracle_complies(befit_content(befit), collect_policy(befit), befit)


def test_marketing_variant_does_not_comply(befit):
    c = befit_content(befit, purpose="svpu:Marketing")
    assert not basic_subsumed(c, collect_policy(befit).basics[0], befit)
    assert complies(c, collect_policy(befit), befit) == ComplianceResult(False, None, Reason.NO_MATCH)
    assert not oracle_complies(c, collect_policy(befit), befit)


def test_subclass_atoms(befit):
    assert subsumes_expr(Atom(befit.expand("befit:SensorGathering")), Atom(befit.expand("svpr:Collect")), befit)
    assert not subsumes_expr(Atom(befit.expand("svpr:Collect")), Atom(befit.expand("befit:SensorGathering")), befit)


def test_cross_category_expressions_rejected():
    with pytest.raises(CategoryMismatch):
        subsumes_expr(Atom(T.expand("svd:Health")), Atom(T.expand("svpu:Health")), T)


def test_duration_containment():
    assert duration_contained(Interval(30, 30), Interval(0, None))
    assert duration_contained(Interval(3, 9), Interval(3, 9))
    assert not duration_contained(Interval(0, None), Interval(0, 365))
    assert not duration_contained(Interval(0, 10), DurationClass(T.expand("svdu:Indefinitely")), T)
    d = DurationClass(T.expand("svdu:Indefinitely"))
    assert duration_contained(d, DurationClass(T.expand("spl:AnyDuration")), T)


def test_top_policy_authorizes_interval_content():
    rng = random.Random(7)
    for _ in range(200):
        c = random_basic(rng, T)
        if isinstance(c.storage.duration, Interval):
            assert complies(c, GeneralPolicy((top_policy(),)), T).compliant


def test_null_content_is_vacuously_compliant():
    c = make_basic(T, "spl:Null", "svpr:Collect", "svpu:Health", "svr:Ours", "svl:EU")
    narrow = GeneralPolicy((make_basic(T, "svd:Health", "svpr:Copy", "svpu:Arts", "svr:Same", "svl:EU",
                                       Interval(0, 1)),))
    assert complies(c, narrow, T).compliant
    assert oracle_complies(c, narrow, T)


def test_null_policy_attribute_authorizes_only_null():
    p = GeneralPolicy((make_basic(T, "svd:Health", "spl:AnyProcessing", "svpu:Arts", "spl:Null", "spl:Null"),))
    stored = make_basic(T, "svd:Health", "svpr:Copy", "svpu:Arts", "svr:Ours", "svl:EU")
    unstored = make_basic(T, "svd:Health", "svpr:Copy", "svpu:Arts", "spl:Null", "spl:Null")
    assert not complies(stored, p, T).compliant
    assert complies(unstored, p, T).compliant


def test_multiple_inheritance_intersection():
    # c sits below both a and b; a ⊓ b is therefore not empty and lies within c's parents
    t = load_taxonomy("""
    @prefix ex: <http://example.org/mi#>
    ex:a subClassOf svd:Health
    ex:b subClassOf svd:Health
    ex:c subClassOf ex:a
    ex:c subClassOf ex:b
    ex:d subClassOf svd:Health
    ex:d subClassOf ex:c
    """)
    a, b, c = (Atom(t.expand(f"ex:{x}")) for x in "abc")
    both = Intersection((a, b))
    assert subsumes_expr(both, c, t)
    assert subsumes_expr(c, both, t)
    assert not subsumes_expr(a, both, t)


def test_disjoint_intersection_is_empty():
    both = Intersection((Atom(T.expand("svl:OurServers")), Atom(T.expand("svl:EU"))))
    assert subsumes_expr(both, Null(Category.LOCATION), T)


def test_union_content_covered_by_two_basics():
    c = make_basic(T, ["svd:Health", "svd:Location"], "svpr:Collect", "svpu:Health", "svr:Ours", "svl:EU",
                   Interval(5, 5))
    p = GeneralPolicy((
        make_basic(T, "svd:Location", "svpr:Collect", "svpu:Health", "svr:Ours", "svl:EU"),
        make_basic(T, "svd:Health", "svpr:Collect", "svpu:Health", "svr:Ours", "svl:EU"),
    ))
    res = complies(c, p, T)
    assert res.compliant and res.matched_basic == 0
    assert oracle_complies(c, p, T)


def test_duration_split_across_basics():
    c = make_basic(T, "svd:Health", "svpr:Collect", "svpu:Health", "svr:Ours", "svl:EU", Interval(0, 100))
    halves = [make_basic(T, "svd:Health", "svpr:Collect", "svpu:Health", "svr:Ours", "svl:EU", iv)
              for iv in (Interval(51, 200), Interval(0, 50))]
    assert complies(c, GeneralPolicy(tuple(halves)), T) == ComplianceResult(True, 0, Reason.MATCH)
    gap = [make_basic(T, "svd:Health", "svpr:Collect", "svpu:Health", "svr:Ours", "svl:EU", iv)
           for iv in (Interval(52, 200), Interval(0, 50))]
    assert not complies(c, GeneralPolicy(tuple(gap)), T).compliant
    assert not oracle_complies(c, GeneralPolicy(tuple(gap)), T)


def test_matched_basic_is_lowest_index():
    c = make_basic(T, "svd:Health", "svpr:Collect", "svpu:Health", "svr:Ours", "svl:EU", Interval(1, 1))
    wide = make_basic(T, "spl:AnyData", "svpr:Collect", "svpu:Health", "svr:Ours", "svl:EU")
    narrow = make_basic(T, "svd:Location", "svpr:Collect", "svpu:Health", "svr:Ours", "svl:EU")
    assert complies(c, GeneralPolicy((narrow, wide, wide)), T).matched_basic == 1


def test_oracle_guard():
    c = random_basic(random.Random(0), T)
    big = BasicPolicy(Top(Category.DATA), Top(Category.PROCESSING), Top(Category.PURPOSE),
                      Top(Category.RECIPIENT), StorageExpr(Top(Category.LOCATION), Interval(0, 700)))
    with pytest.raises(UniverseTooLarge):
        oracle_complies(big, GeneralPolicy((c,)), T, max_universe=1000)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32))
def test_expression_subsumption_matches_extensions(seed):
    rng = random.Random(seed)
    t = random_taxonomy(rng, 40)
    cat = rng.choice(list(Category))
    c, d = random_expr(rng, t, cat, 3), random_expr(rng, t, cat, 3)

    def ext(e):
        if isinstance(e, Atom):
            return t.descendants[e.cls]
        if isinstance(e, Top):
            return t.descendants[e.category.root]
        if isinstance(e, Null):
            return frozenset()
        parts = [ext(x) for x in e.items]
        return frozenset.union(*parts) if isinstance(e, Union) else frozenset.intersection(*parts)

    assert subsumes_expr(c, d, t) == (ext(c) <= ext(d))
    assert subsumes_expr(c, c, t)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32))
def test_complies_matches_oracle(seed):
    c, consent, t = random_case(random.Random(seed))
    assert complies(c, consent, t).compliant == oracle_complies(c, consent, t)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_reflexivity(seed):
    rng = random.Random(seed)
    t = random_taxonomy(rng, 40)
    for term in dnf(random_basic(rng, t)):
        assert complies(term, GeneralPolicy((term,)), t).compliant


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_adding_a_basic_never_revokes(seed):
    rng = random.Random(seed)
    c, consent, t = random_case(rng)
    before = complies(c, consent, t).compliant
    after = complies(c, GeneralPolicy(consent.basics + (random_basic(rng, t),)), t).compliant
    assert after or not before


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_specialization_preserves_compliance(seed):
    rng = random.Random(seed)
    c, consent, t = random_case(rng)
    if not complies(c, consent, t).compliant:
        return
    attrs = list(c.attributes())
    i = rng.randrange(5)
    e = attrs[i]
    if not isinstance(e, Atom):
        return
    attrs[i] = Atom(rng.choice(sorted(t.descendants[e.cls])))
    special = BasicPolicy(*attrs[:4], StorageExpr(attrs[4], c.storage.duration))
    assert complies(special, consent, t).compliant


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_dnf_soundness(seed):
    c, consent, t = random_case(random.Random(seed))
    whole = complies(c, consent, t).compliant
    assert whole == all(complies(term, consent, t).compliant for term in dnf(c))


def test_compliant_iff_matched_basic():
    for seed in range(300):
        c, consent, t = random_case(random.Random(seed))
        res = complies(c, consent, t)
        assert (res.matched_basic is not None) == res.compliant
        if res.compliant:
            assert 0 <= res.matched_basic < len(consent.basics)


def _corpus():
    with open(FIXTURES / "oracle_corpus.jsonl") as fh:
        return [json.loads(line) for line in fh]


def test_oracle_regression_corpus():
    cases = _corpus()
    assert len(cases) == 1000
    for case in cases:
        t = taxonomy_from_edges(
            [tuple(e) for e in case["edges"]],
            {c: Category(v) for c, v in case["categories"].items()},
        )
        c = content_from_json(json.dumps(case["content"]), t.prefixes)
        consent = policy_from_json(json.dumps(case["consent"]), t.prefixes)
        assert oracle_complies(c, consent, t) == case["oracle"], case["case"]
        assert complies(c, consent, t).compliant == case["oracle"], case["case"]
