import itertools

import pytest

from consdich.language import ConstraintLanguage, OperationTable, Relation, make_language

BOOL = ["0", "1"]


def or_lang():
    return make_language(BOOL, {"OR": [("0", "1"), ("1", "0"), ("1", "1")]})


def leq_lang():
    return make_language(BOOL, {"LEQ": [("0", "0"), ("0", "1"), ("1", "1")]})


def xor3_lang():
    tuples = [t for t in itertools.product(BOOL, repeat=3) if t.count("1") % 2 == 1]
    return make_language(BOOL, {"XOR3": tuples})


def one_in_three_lang():
    return make_language(BOOL, {"R": [("0", "0", "1"), ("0", "1", "0"), ("1", "0", "0")]})


def median_lang():
    return make_language(
        BOOL,
        {
            "LE": [("0", "0"), ("0", "1"), ("1", "1")],
            "GE": [("0", "0"), ("1", "0"), ("1", "1")],
        },
    )


def empty_lang(d=2):
    return ConstraintLanguage(tuple(str(v) for v in range(d)), ())


def op(name, arity, d, fn):
    return OperationTable.from_function(name, arity, d, fn)


def max2(d=2):
    return op("max", 2, d, max)


def min2(d=2):
    return op("min", 2, d, min)


def xor3_op():
    return op("xor", 3, 2, lambda x, y, z: x ^ y ^ z)


def median_op():
    return op("med", 3, 2, lambda x, y, z: (x & y) | (y & z) | (x & z))


def first(arity=2, d=2):
    return op("p1", arity, d, lambda *xs: xs[0])


def lang_from_relations(d, rels):
    return ConstraintLanguage(
        tuple(str(v) for v in range(d)),
        tuple(Relation(f"R{i}", len(r[0]) if r else 1, tuple(r)) for i, r in enumerate(rels)),
    )


@pytest.fixture
def OR():
    return or_lang()


@pytest.fixture
def XOR3():
    return xor3_lang()


@pytest.fixture
def R13():
    return one_in_three_lang()


@pytest.fixture
def LEQ():
    return leq_lang()


# one line per acceptance criterion, filled by test_acceptance
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
