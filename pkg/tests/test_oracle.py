import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import empty_lang, leq_lang, one_in_three_lang, or_lang, xor3_lang
from consdich.csp import make_instance
from consdich.dichotomy import BLUE, RED, NPComplete, Tractable
from consdich.language import is_conservative
from consdich.oracle import (
    LanguageGenSpec,
    OracleError,
    brute_force_coloured_graph,
    brute_force_pair_colour,
    brute_force_solutions,
    count_conservative_ops,
    enumerate_conservative_ops,
    random_language,
    structured_language,
)


def test_enumeration_counts():
    assert len(list(enumerate_conservative_ops("01", 2))) == 4
    assert len(list(enumerate_conservative_ops("01", 3))) == 64
    assert len(list(enumerate_conservative_ops("0", 3))) == 1
    assert all(is_conservative(t) for t in enumerate_conservative_ops("012", 2))


def test_enumeration_cap():
    assert count_conservative_ops(3, 3) > 100_000
    with pytest.raises(OracleError):
        next(enumerate_conservative_ops("012", 3))


@given(st.integers(1, 4), st.integers(1, 3))
def test_count_formula(d, k):
    # inputs with j distinct values contribute a factor j each
    expected = math.prod(len(set(a)) for a in itertools.product(range(d), repeat=k))
    assert count_conservative_ops(d, k) == expected


def test_pair_colour_examples():
    assert brute_force_pair_colour(or_lang(), 0, 1) == RED
    assert brute_force_pair_colour(xor3_lang(), 1, 0) == BLUE
    assert brute_force_pair_colour(one_in_three_lang(), 0, 1) is None


def test_coloured_graph_examples():
    g = brute_force_coloured_graph(or_lang())
    assert g.graph.red_directions == {(0, 1): {(0, 1)}}
    assert brute_force_coloured_graph(leq_lang()).graph.red_directions == {(0, 1): {(0, 1), (1, 0)}}
    r = brute_force_coloured_graph(one_in_three_lang())
    assert isinstance(r, NPComplete) and r.witness_pair == (0, 1)
    assert r.graph.edges == {(0, 1): None}


def test_coloured_graph_trivial_alphabet():
    v = brute_force_coloured_graph(empty_lang(1))
    assert isinstance(v, Tractable) and v.graph.edges == {}


def test_coloured_graph_refuses_large_alphabets():
    with pytest.raises(OracleError):
        brute_force_coloured_graph(empty_lang(5))


def test_brute_force_solutions():
    inst = make_instance(["x", "y"], 2, [(("x", "y"), ((0, 1), (1, 0)))])
    assert brute_force_solutions(inst) == [{"x": 0, "y": 1}, {"x": 1, "y": 0}]
    assert len(brute_force_solutions(inst, limit=1)) == 1


def test_random_language_deterministic():
    spec = LanguageGenSpec(seed=3, domain_size=3, relation_count=2, max_arity=2, tuples_per_relation=4)
    a, b = random_language(spec), random_language(spec)
    assert a == b
    assert a.d == 3 and len(a.relations) == 2
    for r in a.relations:
        assert 1 <= r.arity <= 2 and len(r.tuples) == min(4, 3**r.arity)


@pytest.mark.parametrize(
    "spec",
    [
        LanguageGenSpec(0, 5, 1, 2, 2),
        LanguageGenSpec(0, 2, 1, 2, 5),
        LanguageGenSpec(0, 0, 1, 2, 1),
        LanguageGenSpec(0, 2, 0, 2, 1),
    ],
)
def test_random_language_errors(spec):
    with pytest.raises(OracleError):
        random_language(spec)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_structured_language_shape(seed):
    lang = structured_language(seed)
    assert lang.d in (2, 3) and lang.relations
    assert structured_language(seed) == lang
