"""Independent brute-force reference for small languages.

Nothing here uses hierarchies, Reduce or the binary-assignment shortcut:
pair colours come from exhaustive enumeration of conservative operation
tables (or, past the enumeration cap, from plain search on the pinned
indicator problem).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .csp import UNSAT, CspInstance, bits, enforce_one_minimality, pin, solve
from .dichotomy import BLUE, RED, YELLOW, ColouredGraph, NPComplete, Tractable
from .language import ConstraintLanguage, OperationTable, Relation, is_polymorphism
from .malcon import MalCondition, Var, build_condition_instance, identity_violations

MAX_ORACLE_D = 4
# enumeration caps on the number of conservative tables
_ENUM_CAP = 100_000


class OracleError(ValueError):
    pass


def count_conservative_ops(d: int, arity: int) -> int:
    n = 1
    for args in itertools.product(range(d), repeat=arity):
        n *= len(set(args))
    return n


def enumerate_conservative_ops(alphabet, arity: int, cap: int = _ENUM_CAP):
    """Every conservative operation of ``arity`` on ``alphabet`` (a generator)."""
    d = len(alphabet)
    total = count_conservative_ops(d, arity)
    if total > cap:
        raise OracleError(f"{total} conservative {arity}-ary tables exceed the cap of {cap}")
    inputs = list(itertools.product(range(d), repeat=arity))
    choices = [sorted(set(args)) for args in inputs]
    for values in itertools.product(*choices):
        yield OperationTable(f"op{arity}", arity, d, tuple(values), tuple(alphabet))


def _pair_wanted(a, b, kind):
    out = {}
    for x, y in ((a, b), (b, a)):
        for args in ((x, x, y), (x, y, x), (y, x, x)):
            out[args] = x if kind == "majority" else y
    return out


def _search(lang, arity, pins) -> bool:
    P = enforce_one_minimality(
        build_condition_instance(lang, MalCondition((("f", arity),), ()), True)
    )
    if P is UNSAT:
        return False
    P = pin(P, {Var("f", k): v for k, v in pins.items()})
    return P is not UNSAT and solve(P) is not None


class _PairOracle:
    def __init__(self, lang: ConstraintLanguage):
        self.lang = lang
        d = lang.d
        self.enum2 = self.enum3 = None
        if d <= 3:
            self.enum2 = [t for t in enumerate_conservative_ops(lang.alphabet, 2) if is_polymorphism(t, lang)]
        if d <= 2:
            self.enum3 = [t for t in enumerate_conservative_ops(lang.alphabet, 3) if is_polymorphism(t, lang)]

    def exists(self, arity, pins) -> bool:
        pool = self.enum2 if arity == 2 else self.enum3
        if pool is None:
            return _search(self.lang, arity, pins)
        return any(all(t(*k) == v for k, v in pins.items()) for t in pool)

    def directions(self, a, b):
        return frozenset(
            (src, dst) for src, dst in ((a, b), (b, a)) if self.exists(2, {(a, b): dst, (b, a): dst})
        )

    def colour(self, a, b):
        if self.directions(a, b):
            return RED
        if self.exists(3, _pair_wanted(a, b, "majority")):
            return YELLOW
        if self.exists(3, _pair_wanted(a, b, "minority")):
            return BLUE
        return None


def brute_force_pair_colour(lang: ConstraintLanguage, a: int, b: int):
    """``"red"``, ``"yellow"``, ``"blue"`` or None (uncoloured)."""
    return _PairOracle(lang).colour(min(a, b), max(a, b))


def brute_force_coloured_graph(lang: ConstraintLanguage, max_d: int = MAX_ORACLE_D):
    """Tractable(graph) when every pair is coloured, else NPComplete at the
    lexicographically first uncoloured pair."""
    if lang.d > max_d:
        raise OracleError(f"oracle refuses alphabets larger than {max_d}")
    orc = _PairOracle(lang)
    edges, dirs = {}, {}
    first = None
    for a, b in lang.pairs():
        dd = orc.directions(a, b)
        if dd:
            edges[a, b] = RED
            dirs[a, b] = dd
            continue
        col = orc.colour(a, b)
        edges[a, b] = col
        if col is None and first is None:
            first = (a, b)
    graph = ColouredGraph(lang.alphabet, edges, dirs)
    if first is not None:
        return NPComplete(first, graph, lang.alphabet)
    return Tractable(graph)


def brute_force_condition(lang: ConstraintLanguage, M: MalCondition) -> bool:
    """Whether conservative polymorphisms satisfying ``M`` exist.

    Single-symbol conditions with few conservative tables are decided by
    enumeration; everything else by plain search on the condition instance.
    """
    if len(M.symbols) == 1:
        sym, k = M.symbols[0]
        if count_conservative_ops(lang.d, k) <= _ENUM_CAP:
            for t in enumerate_conservative_ops(lang.alphabet, k):
                t = OperationTable(sym, k, t.d, t.table, t.alphabet)
                if not identity_violations([t], M) and is_polymorphism(t, lang):
                    return True
            return False
    return solve(build_condition_instance(lang, M, True)) is not None


def brute_force_solutions(inst: CspInstance, limit: int | None = None):
    """All solutions by enumerating the product of the domains."""
    doms = [bits(m) for m in inst.domains]
    cons = [(c.scope, frozenset(c.tuples)) for c in inst.constraints]
    out = []
    for vals in itertools.product(*doms):
        if all(tuple(vals[i] for i in scope) in rel for scope, rel in cons):
            out.append(dict(zip(inst.variables, vals)))
            if limit is not None and len(out) >= limit:
                break
    return out


# -- random languages -----------------------------------------------------------


@dataclass(frozen=True)
class LanguageGenSpec:
    seed: int
    domain_size: int
    relation_count: int
    max_arity: int
    tuples_per_relation: int


def random_language(spec: LanguageGenSpec, max_d: int = MAX_ORACLE_D) -> ConstraintLanguage:
    """Deterministic random language.

    Each relation draws its arity uniformly from 1..max_arity, then
    ``min(tuples_per_relation, d**arity)`` distinct tuples. Languages whose
    relations are all full are rejected and redrawn from the same stream.
    """
    d, k, n = spec.domain_size, spec.max_arity, spec.tuples_per_relation
    if min(d, k, spec.relation_count, n) < 1:
        raise OracleError("domain size, arity, relation count and tuple count must be positive")
    if d > max_d:
        raise OracleError(f"domain size {d} exceeds the cap of {max_d}")
    if n > d**k:
        raise OracleError(f"{n} tuples requested but only {d**k} exist at arity {k}")
    rng = random.Random(spec.seed)
    alphabet = tuple(str(v) for v in range(d))
    for _ in range(1000):
        rels = []
        for r in range(spec.relation_count):
            arity = rng.randint(1, k)
            space = d**arity
            codes = sorted(rng.sample(range(space), min(n, space)))
            tuples = tuple(_decode(c, arity, d) for c in codes)
            rels.append(Relation(f"R{r}", arity, tuples))
        if any(len(r.tuples) < d**r.arity for r in rels):
            return ConstraintLanguage(alphabet, tuple(rels))
    raise OracleError("every draw produced only full relations")


def _decode(code: int, arity: int, d: int) -> tuple:
    t = []
    for _ in range(arity):
        code, v = divmod(code, d)
        t.append(v)
    return tuple(reversed(t))


def structured_language(seed: int, domain_sizes=(2, 3)) -> ConstraintLanguage:
    """Random mix of parity relations on 2-subsets, permutations and binary
    relations; unlike :func:`random_language` it regularly yields blue pairs."""
    rng = random.Random(seed)
    d = rng.choice(list(domain_sizes))
    rels = []
    for r in range(rng.randint(1, 3)):
        kind = rng.choice(["parity", "parity", "binary", "permutation"])
        if kind == "parity" and d >= 2:
            a, b = rng.sample(range(d), 2)
            c = rng.randint(0, 1)
            tuples = tuple(
                t for t in itertools.product((a, b), repeat=3) if sum(v == b for v in t) % 2 == c
            )
            rels.append(Relation(f"R{r}", 3, tuples))
        elif kind == "permutation":
            p = list(range(d))
            rng.shuffle(p)
            rels.append(Relation(f"R{r}", 2, tuple((v, p[v]) for v in range(d))))
        else:
            pool = list(itertools.product(range(d), repeat=2))
            rels.append(Relation(f"R{r}", 2, tuple(rng.sample(pool, rng.randint(1, max(1, d * d - 1))))))
    return ConstraintLanguage(tuple(str(v) for v in range(d)), tuple(rels))
