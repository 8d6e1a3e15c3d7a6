"""Finite relations, constraint languages and operation tables.

Values are strings on the outside and alphabet indices (``int``) inside.
Every ordering (tuples, pairs, subsets) is lexicographic in alphabet order.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence


class LanguageError(ValueError):
    """Malformed language, relation or operation table."""


Tuple_ = tuple[int, ...]


@dataclass(frozen=True)
class Relation:
    name: str
    arity: int
    tuples: tuple[Tuple_, ...]

    def __post_init__(self):
        if self.arity < 1:
            raise LanguageError(f"relation {self.name!r}: arity must be positive")
        for t in self.tuples:
            if len(t) != self.arity:
                raise LanguageError(
                    f"relation {self.name!r}: arity mismatch in tuple {t!r}"
                )
        object.__setattr__(self, "tuples", tuple(sorted(set(map(tuple, self.tuples)))))

    def __len__(self) -> int:
        return len(self.tuples)

    def __contains__(self, t) -> bool:
        return tuple(t) in self._set

    @property
    def _set(self) -> frozenset:
        s = self.__dict__.get("_tupleset")
        if s is None:
            s = frozenset(self.tuples)
            object.__setattr__(self, "_tupleset", s)
        return s


@dataclass(frozen=True)
class ConstraintLanguage:
    alphabet: tuple[str, ...]
    relations: tuple[Relation, ...] = ()

    def __post_init__(self):
        alphabet = tuple(self.alphabet)
        if not alphabet:
            raise LanguageError("domain must contain at least one value")
        if len(set(alphabet)) != len(alphabet):
            raise LanguageError("domain values must be distinct")
        object.__setattr__(self, "alphabet", alphabet)
        names = set()
        d = len(alphabet)
        for rel in self.relations:
            if rel.name in names:
                raise LanguageError(f"duplicate relation name {rel.name!r}")
            names.add(rel.name)
            for t in rel.tuples:
                if any(not 0 <= v < d for v in t):
                    raise LanguageError(
                        f"relation {rel.name!r}: value not in alphabet"
                    )
        object.__setattr__(self, "relations", tuple(self.relations))

    @property
    def d(self) -> int:
        return len(self.alphabet)

    def relation(self, name: str) -> Relation:
        for rel in self.relations:
            if rel.name == name:
                return rel
        raise KeyError(name)

    def index(self, value: str) -> int:
        try:
            return self.alphabet.index(value)
        except ValueError:
            raise LanguageError(f"value not in alphabet: {value!r}") from None

    def pairs(self) -> list[tuple[int, int]]:
        """All 2-element subsets in canonical order, as ``(a, b)`` with ``a < b``."""
        return list(itertools.combinations(range(self.d), 2))


def make_language(
    alphabet: Sequence[str], relations: dict[str, Iterable[Sequence[str]]]
) -> ConstraintLanguage:
    """Build a language from string-valued tuples, e.g. in tests."""
    alphabet = tuple(alphabet)
    pos = {v: i for i, v in enumerate(alphabet)}
    rels = []
    for name, tuples in relations.items():
        tuples = [tuple(t) for t in tuples]
        try:
            coded = [tuple(pos[v] for v in t) for t in tuples]
        except KeyError as e:
            raise LanguageError(f"value not in alphabet: {e.args[0]!r}") from None
        arity = len(tuples[0]) if tuples else 1
        rels.append(Relation(name, arity, tuple(coded)))
    return ConstraintLanguage(alphabet, tuple(rels))


def parse_language(text: str) -> ConstraintLanguage:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise LanguageError(f"malformed document: {e}") from None
    return language_from_dict(doc)


def language_from_dict(doc) -> ConstraintLanguage:
    if not isinstance(doc, dict) or "domain" not in doc:
        raise LanguageError("malformed document: expected an object with 'domain'")
    domain = doc["domain"]
    if not isinstance(domain, list) or not all(isinstance(v, str) for v in domain):
        raise LanguageError("malformed document: 'domain' must be a list of strings")
    pos = {v: i for i, v in enumerate(domain)}
    rels = []
    for item in doc.get("relations", []):
        try:
            name, arity, tuples = item["name"], item["arity"], item["tuples"]
        except (KeyError, TypeError):
            raise LanguageError("malformed document: relation needs name/arity/tuples") from None
        if not isinstance(arity, int) or isinstance(arity, bool):
            raise LanguageError(f"relation {name!r}: arity must be an integer")
        coded = []
        for t in tuples:
            if not isinstance(t, list) or len(t) != arity:
                raise LanguageError(f"relation {name!r}: arity mismatch in tuple {t!r}")
            try:
                coded.append(tuple(pos[v] for v in t))
            except (KeyError, TypeError):
                raise LanguageError(
                    f"relation {name!r}: value not in alphabet in tuple {t!r}"
                ) from None
        rels.append(Relation(name, arity, tuple(coded)))
    return ConstraintLanguage(tuple(domain), tuple(rels))


def language_to_dict(lang: ConstraintLanguage) -> dict:
    a = lang.alphabet
    return {
        "domain": list(a),
        "relations": [
            {
                "name": r.name,
                "arity": r.arity,
                "tuples": [[a[v] for v in t] for t in r.tuples],
            }
            for r in lang.relations
        ],
    }


def serialize_language(lang: ConstraintLanguage) -> str:
    return json.dumps(language_to_dict(lang))


# -- operations ---------------------------------------------------------------


def _radix_index(args: Sequence[int], d: int) -> int:
    i = 0
    for v in args:
        i = i * d + v
    return i


@dataclass(frozen=True)
class OperationTable:
    """A total k-ary operation stored densely, indexed in mixed radix ``d``."""

    symbol: str
    arity: int
    d: int
    table: tuple[int, ...]
    alphabet: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.arity < 1:
            raise LanguageError("operation arity must be positive")
        if len(self.table) != self.d**self.arity:
            raise LanguageError("operation table is not total")
        if any(not 0 <= v < self.d for v in self.table):
            raise LanguageError("operation value not in alphabet")
        object.__setattr__(self, "table", tuple(self.table))

    def __call__(self, *args: int) -> int:
        return self.table[_radix_index(args, self.d)]

    def inputs(self) -> Iterator[Tuple_]:
        return itertools.product(range(self.d), repeat=self.arity)

    @classmethod
    def from_function(cls, symbol, arity, d, fn, alphabet=None) -> "OperationTable":
        table = tuple(fn(*args) for args in itertools.product(range(d), repeat=arity))
        return cls(symbol, arity, d, table, alphabet)

    @classmethod
    def from_mapping(cls, symbol, arity, d, mapping, alphabet=None) -> "OperationTable":
        table = tuple(mapping[args] for args in itertools.product(range(d), repeat=arity))
        return cls(symbol, arity, d, table, alphabet)


def projection(arity: int, i: int, d: int, symbol: str = "pi") -> OperationTable:
    """The ``arity``-ary projection onto argument ``i`` (0-based)."""
    return OperationTable.from_function(symbol, arity, d, lambda *xs: xs[i])


def table_to_dict(op: OperationTable, alphabet: Sequence[str] | None = None) -> dict:
    a = alphabet or op.alphabet or tuple(str(v) for v in range(op.d))
    rows = [[a[v] for v in args] + [a[op(*args)]] for args in op.inputs()]
    return {"symbol": op.symbol, "arity": op.arity, "rows": rows}


def table_from_dict(doc, alphabet: Sequence[str]) -> OperationTable:
    pos = {v: i for i, v in enumerate(alphabet)}
    d, k = len(alphabet), doc["arity"]
    mapping = {}
    for row in doc["rows"]:
        if len(row) != k + 1:
            raise LanguageError("operation row has wrong length")
        try:
            coded = [pos[v] for v in row]
        except KeyError:
            raise LanguageError(f"value not in alphabet in row {row!r}") from None
        mapping[tuple(coded[:-1])] = coded[-1]
    if len(mapping) != d**k:
        raise LanguageError("operation table is not total")
    return OperationTable.from_mapping(doc["symbol"], k, d, mapping, tuple(alphabet))


def apply_componentwise(op: OperationTable, rows: Sequence[Sequence[int]]) -> Tuple_:
    if len(rows) != op.arity:
        raise LanguageError(f"expected {op.arity} rows, got {len(rows)}")
    r = len(rows[0])
    if any(len(row) != r for row in rows):
        raise LanguageError("rows have different arities")
    return tuple(op(*col) for col in zip(*rows))


def is_polymorphism(op: OperationTable, lang: ConstraintLanguage) -> bool:
    if op.d != lang.d:
        raise LanguageError("operation and language have different alphabets")
    tbl, d, k = op.table, op.d, op.arity
    for rel in lang.relations:
        members = rel._set
        for rows in itertools.product(rel.tuples, repeat=k):
            image = tuple(tbl[_radix_index(col, d)] for col in zip(*rows))
            if image not in members:
                return False
    return True


def is_conservative(op: OperationTable) -> bool:
    return all(op(*args) in args for args in op.inputs())


def classify_on_pair(op: OperationTable, B: Sequence[int]):
    """Classify ``op`` restricted to the 2-element set ``B``.

    Binary operations yield one of ``"projection-1st"``, ``"projection-2nd"``,
    ``"semilattice-toward-<v>"`` (``v`` an alphabet index) or ``"other"``.
    Ternary operations yield a frozenset of flags among ``"majority"``,
    ``"minority"`` and ``"projection"``. ``"not-closed"`` is returned when
    ``op`` leaves ``B``.
    """
    B = tuple(B)
    if len(B) != 2 or B[0] == B[1]:
        raise LanguageError("B must be a 2-element subset")
    if op.arity not in (2, 3):
        raise LanguageError("classification needs a binary or ternary operation")
    if any(not 0 <= v < op.d for v in B):
        raise LanguageError("B must be a subset of the alphabet")
    if any(op(*args) not in B for args in itertools.product(B, repeat=op.arity)):
        return "not-closed"
    a, b = B
    if op.arity == 2:
        ab, ba = op(a, b), op(b, a)
        if op(a, a) != a or op(b, b) != b:
            return "other"
        if ab == a and ba == b:
            return "projection-1st"
        if ab == b and ba == a:
            return "projection-2nd"
        return f"semilattice-toward-{ab}"
    flags = set()
    cube = list(itertools.product(B, repeat=3))
    if all(op(x, y, z) == (x if x in (y, z) else y) for x, y, z in cube):
        flags.add("majority")
    if all(op(x, y, z) == _minority(x, y, z) for x, y, z in cube):
        flags.add("minority")
    if any(all(op(*t) == t[i] for t in cube) for i in range(3)):
        flags.add("projection")
    return frozenset(flags)


def _minority(x, y, z):
    if x == y:
        return z
    if x == z:
        return y
    return x
