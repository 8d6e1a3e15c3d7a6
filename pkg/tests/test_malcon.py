import itertools
import json
import random

import pytest

from conftest import empty_lang, max2, one_in_three_lang, or_lang, xor3_lang
from corpus import containment_probe, random_corpus, random_restriction
from consdich.csp import UNSAT, bits, enforce_one_minimality, solve
from consdich.language import OperationTable, is_conservative, is_polymorphism
from consdich.malcon import (
    ConditionError,
    Identity,
    MalCondition,
    Term,
    Var,
    build_condition_instance,
    build_indicator,
    builtin_condition,
    condition_from_dict,
    condition_to_dict,
    conservative_binary_condition,
    identity_violations,
    parse_condition,
    satisfies,
    solution_to_operations,
)
from consdich.oracle import brute_force_solutions


def test_parse_majority():
    M = parse_condition("f(x,x,y)=x; f(x,y,x)=x; f(y,x,x)=x")
    assert M.symbols == (("f", 3),)
    assert len(M.identities) == 3
    assert M == builtin_condition("majority")


def test_nested_is_not_linear():
    with pytest.raises(ConditionError, match="not linear"):
        parse_condition("f(x,f(y,z))=f(f(x,y),z)")


def test_minority_and_multiline():
    M = parse_condition("f(x,x,y)=y\nf(x,y,x)=y\nf(y,x,x)=y")
    assert M == builtin_condition("minority")


@pytest.mark.parametrize(
    "text",
    ["f(x,y)=x; f(x)=x", "x=y", "f(x,y)", "f(x,y)=x=y", "f(x;y)=x", "f(x,y=x"],
)
def test_parse_errors(text):
    with pytest.raises(ConditionError):
        parse_condition(text)


def test_unknown_symbol_and_arity_in_document():
    with pytest.raises(ConditionError):
        condition_from_dict({"symbols": [{"name": "f", "arity": 2}], "identities": ["g(x,y)=x"]})
    with pytest.raises(ConditionError):
        condition_from_dict({"symbols": [{"name": "f", "arity": 2}], "identities": ["f(x,y,z)=x"]})
    with pytest.raises(ConditionError):
        condition_from_dict({"identities": []})


def test_condition_document_round_trip():
    M = builtin_condition("edge:3")
    assert parse_condition(json.dumps(condition_to_dict(M))) == M


def test_edge_builtins():
    e2 = builtin_condition("edge:2")
    assert [str(i) for i in e2.identities] == ["e(x,x,y)=y", "e(x,y,x)=y"]
    assert e2 == builtin_condition("edge-std:2")
    e3 = builtin_condition("edge:3")
    assert e3.arity == {"e": 4} and len(e3.identities) == 3
    assert str(e3.identities[2]) == "e(x,y,y,x)=y"
    assert str(builtin_condition("edge-std:3").identities[2]) == "e(y,y,y,x)=y"
    with pytest.raises(ConditionError):
        builtin_condition("edge:1")
    with pytest.raises(ConditionError):
        builtin_condition("semilattice")


def test_identity_variables_order():
    idn = Identity(Term("f", ("x", "y")), Term("g", ("z", "x")))
    assert idn.variables() == ("x", "y", "z")


def test_indicator_counts():
    inst = build_indicator(or_lang(), 2)
    assert len(inst.variables) == 4 and len(inst.constraints) == 9
    empty = build_indicator(empty_lang(), 3)
    assert len(empty.variables) == 8 and not empty.constraints
    r = build_indicator(one_in_three_lang(), 3)
    assert len(r.variables) == 8 and len(r.constraints) == 27


def test_majority_instance_pins():
    inst = build_condition_instance(or_lang(), builtin_condition("majority"), True)
    assert len(inst.variables) == 8
    assert inst.domain(Var("f", (0, 0, 1))) == {0}
    pinned = [v for v in inst.variables if len(inst.domain(v)) == 1]
    assert len(pinned) == 8


def test_binary_conservative_instance():
    inst = build_condition_instance(or_lang(), conservative_binary_condition(), True)
    assert inst.domain(Var("f", (0, 1))) == {0, 1}
    assert inst.domain(Var("f", (1, 1))) == {1}


def test_edge2_xor3_satisfiable():
    inst = build_condition_instance(xor3_lang(), builtin_condition("edge:2"), True)
    assert solve(inst) is not None


def test_identity_equalities_tagged():
    M = parse_condition("f(x,y)=f(y,x)")
    inst = build_condition_instance(or_lang(), M, True)
    tagged = [c for c in inst.constraints if c.tags == ("identity-equality",)]
    assert len(tagged) == 1


def test_solution_to_operations_examples():
    M = conservative_binary_condition()
    proj = {Var("f", a): a[0] for a in itertools.product(range(2), repeat=2)}
    (t,) = solution_to_operations(M, proj, 2)
    assert t.table == (0, 0, 1, 1)
    mx = {Var("f", a): max(a) for a in itertools.product(range(2), repeat=2)}
    assert solution_to_operations(M, mx, 2)[0].table == max2().table
    with pytest.raises(ConditionError):
        solution_to_operations(M, {}, 2)


def test_majority_solution_over_or():
    M = builtin_condition("majority")
    inst = build_condition_instance(or_lang(), M, True)
    tables = solution_to_operations(M, solve(inst), 2)
    assert satisfies(tables, M)
    assert is_polymorphism(tables[0], or_lang())


def test_identity_violations_reports():
    M = builtin_condition("majority")
    first = OperationTable.from_function("f", 3, 2, lambda x, y, z: x)
    bad = identity_violations([first], M, limit=None)
    assert bad and all(b[0] == "f(y,x,x)=x" for b in bad)


# -- properties --------------------------------------------------------------------------


def _all_tables(d, k):
    for values in itertools.product(range(d), repeat=d**k):
        yield OperationTable("f", k, d, values)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_indicator_solutions_are_polymorphisms(k):
    for lang in random_corpus(12, seed0=100, sizes=(2,)):
        inst = build_indicator(lang, k)
        found = {solution_to_operations(MalCondition((("f", k),), ()), s, 2)[0].table
                 for s in brute_force_solutions(inst)}
        expected = {t.table for t in _all_tables(2, k) if is_polymorphism(t, lang)}
        assert found == expected


def test_conservative_domains_after_one_minimality():
    for lang in random_corpus(20, seed0=200):
        for name in ("majority", "edge:2", "edge-std:3"):
            M = builtin_condition(name)
            P = enforce_one_minimality(build_condition_instance(lang, M, True))
            if P is UNSAT:
                continue
            for v, m in zip(P.variables, P.domains):
                assert set(bits(m)) <= set(v.args)
                assert len(bits(m)) <= M.max_arity


def test_identity_encoding_soundness():
    for lang in random_corpus(20, seed0=300):
        for name in ("majority", "minority", "edge:2"):
            M = builtin_condition(name)
            sol = solve(build_condition_instance(lang, M, True))
            if sol is None:
                continue
            tables = solution_to_operations(M, sol, lang.d)
            assert satisfies(tables, M)
            assert all(is_conservative(t) and is_polymorphism(t, lang) for t in tables)


def test_containment_sample():
    rng = random.Random(7)
    M = builtin_condition("edge:2")
    for lang in random_corpus(10, seed0=400):
        P = enforce_one_minimality(build_condition_instance(lang, M, True))
        if P is UNSAT:
            continue
        for _ in range(10):
            Q = random_restriction(P, rng)
            if Q is UNSAT:
                continue
            assert containment_probe(Q, M.arity, rng)[1] is None
