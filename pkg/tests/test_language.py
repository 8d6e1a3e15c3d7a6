import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import first, max2, median_op, min2, one_in_three_lang, op, or_lang, xor3_op
from consdich.language import (
    ConstraintLanguage,
    LanguageError,
    OperationTable,
    Relation,
    apply_componentwise,
    classify_on_pair,
    is_conservative,
    is_polymorphism,
    language_to_dict,
    parse_language,
    projection,
    serialize_language,
    table_from_dict,
    table_to_dict,
)


def test_parse_or_document():
    doc = '{"domain":["0","1"],"relations":[{"name":"OR","arity":2,"tuples":[["0","1"],["1","0"],["1","1"]]}]}'
    lang = parse_language(doc)
    assert lang.d == 2
    assert len(lang.relations) == 1
    assert lang.relation("OR").tuples == ((0, 1), (1, 0), (1, 1))


def test_value_not_in_alphabet():
    doc = {"domain": ["0", "1"], "relations": [{"name": "S", "arity": 2, "tuples": [["0", "2"]]}]}
    with pytest.raises(LanguageError, match="value not in alphabet"):
        parse_language(json.dumps(doc))


@pytest.mark.parametrize(
    "doc",
    [
        "not json",
        "[]",
        '{"relations": []}',
        '{"domain": ["0", "0"]}',
        '{"domain": ["0"], "relations": [{"name": "S", "arity": 2, "tuples": [["0"]]}]}',
        '{"domain": ["0"], "relations": [{"name": "S", "arity": 1, "tuples": []},'
        ' {"name": "S", "arity": 1, "tuples": []}]}',
    ],
)
def test_malformed_documents(doc):
    with pytest.raises(LanguageError):
        parse_language(doc)


def test_canonical_sort_and_dedupe():
    doc = {"domain": ["a", "b"], "relations": [{"name": "S", "arity": 1, "tuples": [["b"], ["a"], ["b"]]}]}
    lang = parse_language(json.dumps(doc))
    assert lang.relation("S").tuples == ((0,), (1,))


def test_round_trip_one_in_three():
    lang = one_in_three_lang()
    assert parse_language(serialize_language(lang)) == lang


def test_empty_relation_is_legal():
    lang = parse_language('{"domain":["0","1"],"relations":[{"name":"E","arity":3,"tuples":[]}]}')
    assert len(lang.relation("E")) == 0
    assert is_polymorphism(op("c", 2, 2, lambda x, y: 0), lang)


def test_apply_componentwise_examples():
    assert apply_componentwise(max2(), [(0, 1), (1, 0)]) == (1, 1)
    assert apply_componentwise(first(), [(0, 1), (1, 0)]) == (0, 1)
    assert apply_componentwise(xor3_op(), [(0, 0, 0), (0, 1, 1), (1, 0, 1)]) == (1, 1, 0)


def test_apply_componentwise_errors():
    with pytest.raises(LanguageError):
        apply_componentwise(max2(), [(0, 1)])
    with pytest.raises(LanguageError):
        apply_componentwise(max2(), [(0, 1), (1,)])


def test_is_polymorphism_examples():
    OR = or_lang()
    assert is_polymorphism(max2(), OR)
    assert not is_polymorphism(min2(), OR)
    for k in (1, 2, 3):
        for i in range(k):
            assert is_polymorphism(projection(k, i, 2), OR)
            assert is_polymorphism(projection(k, i, 2), one_in_three_lang())


def test_is_polymorphism_alphabet_mismatch():
    with pytest.raises(LanguageError):
        is_polymorphism(max2(3), or_lang())


def test_is_conservative_examples():
    assert is_conservative(max2())
    assert not is_conservative(op("zero", 2, 2, lambda x, y: 0))
    assert is_conservative(xor3_op())


def test_classify_examples():
    assert classify_on_pair(max2(), (0, 1)) == "semilattice-toward-1"
    assert classify_on_pair(min2(), (0, 1)) == "semilattice-toward-0"
    assert classify_on_pair(first(), (0, 1)) == "projection-1st"
    assert classify_on_pair(op("p2", 2, 2, lambda x, y: y), (0, 1)) == "projection-2nd"
    assert classify_on_pair(xor3_op(), (0, 1)) == {"minority"}
    assert classify_on_pair(median_op(), (0, 1)) == {"majority"}
    assert classify_on_pair(first(3), (0, 1)) == {"projection"}


def test_classify_not_closed_and_errors():
    assert classify_on_pair(op("c", 2, 3, lambda x, y: 2), (0, 1)) == "not-closed"
    with pytest.raises(LanguageError):
        classify_on_pair(max2(), (0, 0))
    with pytest.raises(LanguageError):
        classify_on_pair(first(1), (0, 1))
    with pytest.raises(LanguageError):
        classify_on_pair(max2(), (0, 5))


def test_table_dict_round_trip():
    t = max2()
    doc = table_to_dict(t, ("0", "1"))
    assert doc["rows"][1] == ["0", "1", "1"]
    assert table_from_dict(doc, ("0", "1")) == t
    doc["rows"].pop()
    with pytest.raises(LanguageError):
        table_from_dict(doc, ("0", "1"))


def test_operation_table_validation():
    with pytest.raises(LanguageError):
        OperationTable("f", 2, 2, (0, 1, 1))
    with pytest.raises(LanguageError):
        OperationTable("f", 1, 2, (0, 2))


# -- properties ---------------------------------------------------------------------

values = st.integers(0, 2)


@st.composite
def languages(draw):
    d = draw(st.integers(1, 3))
    rels = []
    for i in range(draw(st.integers(0, 3))):
        arity = draw(st.integers(1, 3))
        tuples = draw(st.sets(st.tuples(*[st.integers(0, d - 1)] * arity), max_size=6))
        rels.append(Relation(f"R{i}", arity, tuple(tuples)))
    return ConstraintLanguage(tuple(str(v) for v in range(d)), tuple(rels))


@settings(max_examples=60, deadline=None)
@given(languages())
def test_parse_serialize_identity(lang):
    again = parse_language(serialize_language(lang))
    assert again == lang
    assert language_to_dict(again) == language_to_dict(lang)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(1, 4), st.data())
def test_projection_returns_row(k, r, data):
    rows = data.draw(st.lists(st.tuples(*[st.integers(0, 2)] * r), min_size=k, max_size=k))
    for i in range(k):
        assert apply_componentwise(projection(k, i, 3), rows) == rows[i]


@st.composite
def binary_or_ternary_ops(draw):
    arity = draw(st.sampled_from([2, 3]))
    table = [draw(st.sampled_from(sorted(set(args)))) for args in itertools.product(range(2), repeat=arity)]
    return OperationTable("f", arity, 2, tuple(table))


@settings(max_examples=80, deadline=None)
@given(binary_or_ternary_ops())
def test_classify_swap_invariance(f):
    swap = lambda v: 1 - v
    g = OperationTable.from_function("g", f.arity, 2, lambda *xs: swap(f(*map(swap, xs))))
    a, b = classify_on_pair(f, (0, 1)), classify_on_pair(g, (0, 1))
    if f.arity == 3:
        assert a == b
    elif a.startswith("semilattice"):
        assert b == f"semilattice-toward-{1 - int(a[-1])}"
    else:
        assert a == b
