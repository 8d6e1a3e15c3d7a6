"""Linear strong Mal'tsev conditions and indicator-problem instances.

An indicator variable ``Var(symbol, args)`` decides the value of ``symbol``
on the argument tuple ``args``. A solution of the condition instance is
a family of operation tables, one per symbol.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .csp import Constraint, CspInstance, bits, mask_of
from .language import ConstraintLanguage, LanguageError, OperationTable


class ConditionError(ValueError):
    pass


class Var(NamedTuple):
    symbol: str
    args: tuple[int, ...]

    def __str__(self):
        return f"{self.symbol}({','.join(map(str, self.args))})"


class Term(NamedTuple):
    symbol: str
    args: tuple[str, ...]

    def __str__(self):
        return f"{self.symbol}({','.join(self.args)})"


@dataclass(frozen=True)
class Identity:
    """``lhs ≈ rhs`` where ``rhs`` is a term or an abstract variable name."""

    lhs: Term
    rhs: Term | str

    def variables(self) -> tuple[str, ...]:
        seen = list(dict.fromkeys(self.lhs.args))
        extra = self.rhs.args if isinstance(self.rhs, Term) else (self.rhs,)
        for v in extra:
            if v not in seen:
                seen.append(v)
        return tuple(seen)

    def __str__(self):
        return f"{self.lhs}={self.rhs}"


@dataclass(frozen=True)
class MalCondition:
    symbols: tuple[tuple[str, int], ...]
    identities: tuple[Identity, ...]

    def __post_init__(self):
        names = [s for s, _ in self.symbols]
        if len(set(names)) != len(names):
            raise ConditionError("duplicate operation symbol")
        ar = dict(self.symbols)
        for idn in self.identities:
            for t in (idn.lhs, idn.rhs):
                if isinstance(t, Term):
                    if t.symbol not in ar:
                        raise ConditionError(f"unknown symbol {t.symbol!r}")
                    if len(t.args) != ar[t.symbol]:
                        raise ConditionError(f"arity mismatch for {t.symbol!r} in {idn}")

    @property
    def arity(self) -> dict[str, int]:
        return dict(self.symbols)

    @property
    def max_arity(self) -> int:
        return max((a for _, a in self.symbols), default=0)


# -- parsing -------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|(.))")


def _tokenize(s: str):
    out = []
    for name, punct in _TOKEN.findall(s):
        if name:
            out.append(name)
        elif punct.strip():
            if punct not in "(),=":
                raise ConditionError(f"unexpected character {punct!r}")
            out.append(punct)
    return out


def _parse_term(tokens, i):
    """Parse a (possibly nested) term; nesting is reported by the caller."""
    if i >= len(tokens) or tokens[i] in "(),=":
        raise ConditionError("expected a term")
    name = tokens[i]
    i += 1
    if i < len(tokens) and tokens[i] == "(":
        i += 1
        args = []
        while True:
            sub, i = _parse_term(tokens, i)
            args.append(sub)
            if i < len(tokens) and tokens[i] == ",":
                i += 1
                continue
            if i < len(tokens) and tokens[i] == ")":
                i += 1
                break
            raise ConditionError("expected ',' or ')'")
        return ("app", name, args), i
    return ("var", name), i


def _linear(node) -> Term | str:
    if node[0] == "var":
        return node[1]
    _, name, args = node
    if any(a[0] != "var" for a in args):
        raise ConditionError("not linear: nested operation symbols")
    return Term(name, tuple(a[1] for a in args))


def parse_identity(s: str) -> Identity:
    tokens = _tokenize(s)
    lhs, i = _parse_term(tokens, 0)
    if i >= len(tokens) or tokens[i] != "=":
        raise ConditionError(f"expected '=' in identity {s!r}")
    rhs, j = _parse_term(tokens, i + 1)
    if j != len(tokens):
        raise ConditionError(f"trailing input in identity {s!r}")
    left, right = _linear(lhs), _linear(rhs)
    if isinstance(left, str):
        left, right = right, left
    if isinstance(left, str):
        raise ConditionError(f"identity {s!r} mentions no operation symbol")
    return Identity(left, right)


def parse_condition(text: str) -> MalCondition:
    """Parse a condition document (JSON) or ``;``/newline separated identities.

    In the plain form symbols and arities are inferred from first use.
    """
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(stripped)
        except json.JSONDecodeError as e:
            raise ConditionError(f"malformed condition document: {e}") from None
        return condition_from_dict(doc)
    idents = [parse_identity(p) for p in re.split(r"[;\n]", stripped) if p.strip()]
    symbols: dict[str, int] = {}
    for idn in idents:
        for t in (idn.lhs, idn.rhs):
            if isinstance(t, Term):
                if symbols.setdefault(t.symbol, len(t.args)) != len(t.args):
                    raise ConditionError(f"arity mismatch for {t.symbol!r}")
    return MalCondition(tuple(symbols.items()), tuple(idents))


def condition_from_dict(doc) -> MalCondition:
    try:
        symbols = tuple((s["name"], int(s["arity"])) for s in doc["symbols"])
        idents = tuple(parse_identity(s) for s in doc.get("identities", []))
    except (KeyError, TypeError) as e:
        raise ConditionError(f"malformed condition document: {e}") from None
    return MalCondition(symbols, idents)


def condition_to_dict(M: MalCondition) -> dict:
    return {
        "symbols": [{"name": s, "arity": a} for s, a in M.symbols],
        "identities": [str(i) for i in M.identities],
    }


def _edge_identities(k: int, standard: bool) -> list[Identity]:
    out = []
    for i in range(1, k + 1):
        args = ["y"] * (k + 1)
        args[i] = "x"
        if i <= 2 or not standard:
            args[0] = "x"
        out.append(Identity(Term("e", tuple(args)), "y"))
    return out


def builtin_condition(name: str) -> MalCondition:
    """``majority``, ``minority``, ``edge:k`` (x leads every identity) or ``edge-std:k``."""
    if name == "majority":
        return parse_condition("f(x,x,y)=x; f(x,y,x)=x; f(y,x,x)=x")
    if name == "minority":
        return parse_condition("f(x,x,y)=y; f(x,y,x)=y; f(y,x,x)=y")
    m = re.fullmatch(r"(edge|edge-std):(\d+)", name)
    if m:
        k = int(m.group(2))
        if k < 2:
            raise ConditionError("edge conditions need k >= 2")
        return MalCondition((("e", k + 1),), tuple(_edge_identities(k, m.group(1) == "edge-std")))
    raise ConditionError(f"unknown builtin condition {name!r}")


# -- indicator instances -------------------------------------------------------


class _Layout:
    """Dense numbering of indicator variables: symbols in order, args in radix order."""

    def __init__(self, symbols: Sequence[tuple[str, int]], d: int):
        self.d = d
        self.offset = {}
        self.variables = []
        for sym, k in symbols:
            self.offset[sym] = len(self.variables)
            self.variables.extend(Var(sym, args) for args in itertools.product(range(d), repeat=k))

    def index(self, sym, args) -> int:
        i = 0
        for v in args:
            i = i * self.d + v
        return self.offset[sym] + i


def _indicator_constraints(lang: ConstraintLanguage, layout: _Layout, sym: str, k: int):
    off, d = layout.offset[sym], layout.d
    found: dict = {}
    for rel in lang.relations:
        if not rel.tuples:
            continue
        for rows in itertools.product(rel.tuples, repeat=k):
            scope = []
            for col in zip(*rows):
                i = 0
                for v in col:
                    i = i * d + v
                scope.append(off + i)
            key = (rel.name, tuple(scope))
            tag = (rel.name, sym, rows)
            if key in found:
                found[key][1].append(tag)
            else:
                found[key] = (rel.tuples, [tag])
    return [Constraint(scope, tuples, tuple(tags)) for (_, scope), (tuples, tags) in found.items()]


def build_indicator(lang: ConstraintLanguage, k: int, symbol: str = "f") -> CspInstance:
    """The order-``k`` indicator problem: its solutions are the k-ary polymorphisms."""
    if k < 1:
        raise ConditionError("k must be positive")
    layout = _Layout([(symbol, k)], lang.d)
    cons = _indicator_constraints(lang, layout, symbol, k)
    full = (1 << lang.d) - 1
    return CspInstance(
        tuple(layout.variables), (full,) * len(layout.variables), tuple(cons), lang.d, lang.alphabet
    )


def build_condition_instance(
    lang: ConstraintLanguage, M: MalCondition, conservative: bool = True
) -> CspInstance:
    d = lang.d
    layout = _Layout(M.symbols, d)
    cons = []
    for sym, k in M.symbols:
        cons.extend(_indicator_constraints(lang, layout, sym, k))
    full = (1 << d) - 1
    doms = [full] * len(layout.variables)
    if conservative:
        for i, v in enumerate(layout.variables):
            doms[i] = mask_of(v.args)
    eqs = set()
    for idn in M.identities:
        names = idn.variables()
        for phi in itertools.product(range(d), repeat=len(names)):
            val = dict(zip(names, phi))
            u = layout.index(idn.lhs.symbol, tuple(val[x] for x in idn.lhs.args))
            if isinstance(idn.rhs, Term):
                w = layout.index(idn.rhs.symbol, tuple(val[x] for x in idn.rhs.args))
                if u != w:
                    eqs.add((min(u, w), max(u, w)))
            else:
                doms[u] &= 1 << val[idn.rhs]
    for u, w in sorted(eqs):
        shared = bits(doms[u] & doms[w])
        cons.append(Constraint((u, w), tuple((v, v) for v in shared), ("identity-equality",)))
    return CspInstance(tuple(layout.variables), tuple(doms), tuple(cons), d, lang.alphabet)


def conservative_binary_condition(symbol: str = "f") -> MalCondition:
    """One binary symbol, no identities: its conservative instance describes every conservative binary polymorphism."""
    return MalCondition(((symbol, 2),), ())


def solution_to_operations(M: MalCondition, a, d: int, alphabet=None) -> list[OperationTable]:
    tables = []
    for sym, k in M.symbols:
        mapping = {}
        for args in itertools.product(range(d), repeat=k):
            key = Var(sym, args)
            if key not in a:
                raise ConditionError(f"assignment is not total (missing {key})")
            mapping[args] = a[key]
        tables.append(OperationTable.from_mapping(sym, k, d, mapping, alphabet))
    return tables


def identity_violations(tables: Sequence[OperationTable], M: MalCondition, limit: int | None = 1):
    """Inputs on which the tables break an identity of ``M`` (pointwise check)."""
    by_sym = {t.symbol: t for t in tables}
    if not tables:
        return []
    d = tables[0].d
    out = []
    for idn in M.identities:
        names = idn.variables()
        for phi in itertools.product(range(d), repeat=len(names)):
            val = dict(zip(names, phi))
            left = by_sym[idn.lhs.symbol](*(val[x] for x in idn.lhs.args))
            if isinstance(idn.rhs, Term):
                right = by_sym[idn.rhs.symbol](*(val[x] for x in idn.rhs.args))
            else:
                right = val[idn.rhs]
            if left != right:
                out.append((str(idn), val, left, right))
                if limit is not None and len(out) >= limit:
                    return out
    return out


def satisfies(tables: Sequence[OperationTable], M: MalCondition) -> bool:
    return not identity_violations(tables, M)


def check_alphabet(lang: ConstraintLanguage, tables: Sequence[OperationTable]):
    for t in tables:
        if t.d != lang.d:
            raise LanguageError("operation and language have different alphabets")
