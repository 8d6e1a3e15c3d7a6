"""Detect conservative polymorphisms satisfying a linear condition.

The condition instance is solved one closed set of variables at a time.
Each step pins every newly added variable, restricts, and hands the
residual instance to a semiuniform solver together with the previous
partial solution, which is a family of polymorphisms of that residual.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .csp import (
    CspInstance,
    bits,
    check_solution,
    enforce_one_minimality,
    is_one_minimal,
    packed,
    project_instance,
    solve,
    UNSAT,
)
from .language import ConstraintLanguage, OperationTable, is_conservative, is_polymorphism
from .malcon import (
    MalCondition,
    Var,
    build_condition_instance,
    identity_violations,
    solution_to_operations,
)


class HierarchyError(ValueError):
    pass


class WitnessError(AssertionError):
    """A produced witness failed re-verification (an internal bug if raised)."""


# certificate: symbol -> {args: value}, possibly partial
Certificate = Mapping[str, Mapping[tuple, int]]
SemiuniformSolver = Callable[[CspInstance, object], "dict | None"]


class _CachedDecision:
    """Decision oracle backed by complete search, reusing its last witness."""

    def __init__(self):
        self.witness = None

    def __call__(self, inst: CspInstance) -> bool:
        w = self.witness
        if w is not None and check_solution(inst, w):
            return True
        w = solve(inst)
        if w is not None:
            self.witness = w
        return w is not None


def reference_solver(inst: CspInstance, certificate=None):
    """Reference semiuniform solver: one-level search over a complete oracle.

    The certificate is accepted for interface compatibility; a
    compact-representation solver would use it, this one does not need to.
    """
    return solve(inst, oracle=_CachedDecision())


@dataclass(frozen=True)
class ClosedSetHierarchy:
    sets: tuple[frozenset, ...]
    pair_order: tuple[tuple[int, ...], ...]

    @property
    def alpha(self) -> int:
        return len(self.pair_order)


def _symbols_of(inst: CspInstance) -> dict[str, int]:
    out: dict[str, int] = {}
    for v in inst.variables:
        out.setdefault(v.symbol, len(v.args))
    return out


def triangle_holds(inst: CspInstance, X1: Iterable, X2: Iterable, symbols=None) -> bool:
    """``X1 ◁ X2``: every indicator variable over a tuple drawn from the
    domain of some ``x`` in ``X2`` lies in ``X1``."""
    X1, X2 = set(X1), set(X2)
    known = inst.index
    for x in X1 | X2:
        if x not in known:
            raise HierarchyError(f"unknown variable {x}")
    symbols = symbols or _symbols_of(inst)
    seen = set()
    for x in X2:
        dom = inst.domains[known[x]]
        if dom in seen:
            continue
        seen.add(dom)
        values = bits(dom)
        for sym, k in symbols.items():
            for t in itertools.product(values, repeat=k):
                if Var(sym, t) not in X1:
                    return False
    return True


def build_hierarchy(inst: CspInstance, M: MalCondition | None = None) -> ClosedSetHierarchy:
    if not is_one_minimal(inst):
        raise HierarchyError("instance must be 1-minimal")
    symbols = M.arity if M is not None else _symbols_of(inst)
    if not symbols:
        return ClosedSetHierarchy((frozenset(inst.variables),), ())
    a = max(symbols.values())
    d = inst.d
    X = {Var(s, (v,) * k) for s, k in symbols.items() for v in range(d)}
    sets = [frozenset(X)]
    order = tuple(itertools.combinations(range(d), min(a, d)))
    for D in order:
        X = X | {Var(s, t) for s, k in symbols.items() for t in itertools.product(D, repeat=k)}
        sets.append(frozenset(X))
    if sets[-1] != frozenset(inst.variables):
        raise HierarchyError("hierarchy does not reach every variable")
    h = ClosedSetHierarchy(tuple(sets), order)
    check_hierarchy(inst, h, symbols)
    return h


def check_hierarchy(inst: CspInstance, h: ClosedSetHierarchy, symbols=None):
    """Re-verify closedness and the step-size bound; raise on violation."""
    symbols = symbols or _symbols_of(inst)
    a = max(symbols.values())
    bound = len(symbols) * a**a
    singles = {Var(s, (v,) * k) for s, k in symbols.items() for v in range(inst.d)}
    if h.sets[0] != singles:
        raise HierarchyError("level 0 is not the set of singleton variables")
    for i, X in enumerate(h.sets):
        if not triangle_holds(inst, X, X, symbols):
            raise HierarchyError(f"level {i} is not closed")
        if i and len(X - h.sets[i - 1]) > bound:
            raise HierarchyError(f"level {i} adds more than {bound} variables")


def certificate_of(assignment: Mapping) -> dict:
    cert: dict = {}
    for v, val in assignment.items():
        cert.setdefault(v.symbol, {})[v.args] = val
    return cert


def _pin_all(pk, dom, alive, idx: Sequence[int]):
    """Yield propagated states fixing every variable in ``idx``, lexicographically."""
    if not idx:
        yield dom, alive
        return
    i, rest = idx[0], idx[1:]
    for v in bits(dom[i]):
        st = pk.pin(dom, alive, i, v)
        if st is not None:
            yield from _pin_all(pk, st[0], st[1], rest)


def extend_partial(
    inst: CspInstance,
    hierarchy: ClosedSetHierarchy,
    i: int,
    phi: Mapping,
    solver: SemiuniformSolver | None = None,
):
    """Extend a solution on level ``i`` to one on level ``i + 1``, or return None."""
    solver = solver or reference_solver
    Xi, Xn = hierarchy.sets[i], hierarchy.sets[i + 1]
    if any(x not in phi for x in Xi) or not check_solution(
        project_instance(inst, Xi), {x: phi[x] for x in Xi}
    ):
        raise ValueError("phi does not solve the projection onto level i")
    cert = certificate_of({x: phi[x] for x in Xi})
    new = [k for k, v in enumerate(inst.variables) if v in Xn and v not in Xi]
    pk = packed(inst)
    dom, alive = pk.fresh()
    if not pk.propagate(dom, alive):
        return None
    for st in _pin_all(pk, dom, alive, new):
        Pj = pk.to_instance(*st)
        Pj._cache["one_minimal"] = True
        if not triangle_holds(Pj, Xi, Xn):
            raise HierarchyError(f"level {i + 1} is not closed over level {i} after pinning")
        sol = solver(project_instance(Pj, Xn), cert)
        if sol is not None:
            return sol
    return None


def detect_conservative(
    lang: ConstraintLanguage,
    M: MalCondition,
    solver: SemiuniformSolver | None = None,
    stats: dict | None = None,
) -> list[OperationTable] | None:
    """Conservative polymorphisms of ``lang`` satisfying ``M``, or None.

    Returned tables are re-verified (polymorphism, conservative, identities).
    ``stats``, when given, receives the hierarchy used.
    """
    P = enforce_one_minimality(build_condition_instance(lang, M, conservative=True))
    if P is UNSAT:
        return None
    h = build_hierarchy(P, M)
    if stats is not None:
        stats["hierarchy"] = h
        stats["instance"] = P
    phi = {x: bits(P.domains[P.index[x]])[0] for x in h.sets[0]}
    if not check_solution(project_instance(P, h.sets[0]), phi):
        return None
    for i in range(h.alpha):
        phi = extend_partial(P, h, i, phi, solver)
        if phi is None:
            return None
    tables = solution_to_operations(M, phi, lang.d, lang.alphabet)
    verify_witnesses(lang, M, tables)
    return tables


def verify_witnesses(lang: ConstraintLanguage, M: MalCondition, tables: Sequence[OperationTable]):
    for t in tables:
        if not is_conservative(t):
            raise WitnessError(f"witness {t.symbol} is not conservative")
        if not is_polymorphism(t, lang):
            raise WitnessError(f"witness {t.symbol} is not a polymorphism")
    bad = identity_violations(tables, M)
    if bad:
        raise WitnessError(f"witnesses violate {bad[0][0]} at {bad[0][1]}")
