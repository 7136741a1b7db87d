import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from consentbench.errors import BadInterval, CategoryMismatch, EmptyUnion, UnknownClass
from consentbench.oracle import content_tuples, duration_samples
from consentbench.policy import (
    Atom,
    BasicPolicy,
    GeneralPolicy,
    Intersection,
    Interval,
    Null,
    StorageExpr,
    Top,
    Union,
    disjuncts,
    dnf,
    make_basic,
    normalize,
    validate,
)
from consentbench.vocab import Category, builtin_special, load_taxonomy
from randgen import random_basic, random_taxonomy

SUE_EXTENSION = """
@prefix ex: <http://example.org/sue#>
ex:HeartRate subClassOf svd:Health
ex:Profiling subClassOf svpr:Analyze
ex:Recommendation subClassOf svpu:Marketing
"""


@pytest.fixture(scope="module")
def sue():
    return load_taxonomy(SUE_EXTENSION)


def sue_policy(t):
    return make_basic(
        t,
        data=["ex:HeartRate", "svd:Location"],
        processing="ex:Profiling",
        purpose="ex:Recommendation",
        recipient="spl:AnyRecipient",
        location=Intersection((Atom(t.expand("svl:OurServers")), Atom(t.expand("svl:EU")))),
        duration=Interval(0, None),
    )


def test_factorised_policy_validates(sue):
    p = sue_policy(sue)
    validate(GeneralPolicy((p,)), sue)
    assert isinstance(p.data, Union)


def test_dnf_splits_data_union(sue):
    p = sue_policy(sue)
    terms = dnf(p)
    assert [t.data for t in terms] == [Atom(sue.expand("ex:HeartRate")), Atom(sue.expand("svd:Location"))]
    for term in terms:
        assert term.attributes()[1:] == p.attributes()[1:]
        assert term.storage == p.storage


def test_dnf_identity_on_union_free():
    t = builtin_special()
    c = make_basic(t, "svd:Location", "svpr:Collect", "svpu:Health", "svr:Ours", "svl:OurServers")
    assert dnf(c) == [c]


def test_validate_rejects_unknown_class():
    t = builtin_special()
    c = BasicPolicy(Atom("http://example.org/nope"), Top(Category.PROCESSING), Top(Category.PURPOSE),
                    Top(Category.RECIPIENT), StorageExpr(Top(Category.LOCATION)))
    with pytest.raises(UnknownClass):
        validate(c, t)


def test_validate_rejects_wrong_category():
    t = builtin_special()
    with pytest.raises(CategoryMismatch):
        make_basic(t, "svpu:Health", "svpr:Collect", "svpu:Health", "svr:Ours", "svl:OurServers")
    with pytest.raises(CategoryMismatch):
        validate(BasicPolicy(Null(Category.PURPOSE), Top(Category.PROCESSING), Top(Category.PURPOSE),
                             Top(Category.RECIPIENT), StorageExpr(Top(Category.LOCATION))), t)


def test_bad_interval_and_empty_union():
    with pytest.raises(BadInterval):
        Interval(10, 5)
    with pytest.raises(BadInterval):
        Interval(-1, None)
    with pytest.raises(EmptyUnion):
        Union((Atom("x"),))
    with pytest.raises(EmptyUnion):
        GeneralPolicy(())


def test_null_filler_from_name():
    t = builtin_special()
    p = make_basic(t, "svd:Location", "spl:AnyProcessing", "svpu:Health", "spl:Null", "spl:Null")
    assert p.recipient == Null(Category.RECIPIENT)
    assert p.storage.location == Null(Category.LOCATION)


def test_normalize_top_and_flatten():
    a, b, c = (Atom(x) for x in "abc")
    assert normalize(Top(Category.DATA)) == Atom(Category.DATA.root)
    assert normalize(Union((a, Union((b, c))))) == Union((a, b, c))
    assert normalize(Intersection((Intersection((a, b)), c))) == Intersection((a, b, c))


def _branches(e):
    return len(disjuncts(e))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32))
def test_dnf_length_is_product_of_branches(seed):
    rng = random.Random(seed)
    t = random_taxonomy(rng, 25)
    c = random_basic(rng, t)
    expected = 1
    for e in c.attributes():
        expected *= _branches(e)
    assert len(dnf(c)) == expected


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32))
def test_dnf_preserves_authorization_set(seed):
    rng = random.Random(seed)
    t = random_taxonomy(rng, 25)
    c = random_basic(rng, t)
    samples = duration_samples([c.storage.duration])
    union = set(itertools.chain.from_iterable(content_tuples(x, t, samples) for x in dnf(c)))
    assert union == content_tuples(c, t, samples)


def test_two_way_unions_give_four_terms():
    t = builtin_special()
    c = make_basic(t, ["svd:Location", "svd:Health"], "svpr:Collect", ["svpu:Health", "svpu:Arts"],
                   "svr:Ours", "svl:EU")
    terms = dnf(c)
    assert len(terms) == 4
    samples = duration_samples([c.storage.duration])
    assert set().union(*(content_tuples(x, t, samples) for x in terms)) == content_tuples(c, t, samples)

