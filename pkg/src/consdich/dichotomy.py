"""Decide whether the conservative CSP over a language is tractable.

Pipeline: a maximally commutative binary polymorphism ``f*`` fixes the red
edges; each other pair is tested for a conservative ternary polymorphism
that is majority (yellow) or minority (blue) on it, after pruning the
ternary indicator problem with Reduce; red edges are then oriented.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import NamedTuple

from .csp import (
    CspInstance,
    Equal,
    Unary,
    UNSAT,
    add_constraints,
    bits,
    check_solution,
    consistent_restriction,
    enforce_one_minimality,
    is_one_minimal,
    is_satisfiable,
    pin,
    project_instance,
    solve,
)
from .edge import NOT_3EDGE, detect_3edge_and_solve, language_of_instance
from .language import (
    ConstraintLanguage,
    OperationTable,
    classify_on_pair,
    is_conservative,
    is_polymorphism,
)
from .malcon import MalCondition, Var, build_condition_instance, solution_to_operations
from .treasure import build_hierarchy

RED, YELLOW, BLUE = "red", "yellow", "blue"
F = "f"
BINARY = MalCondition(((F, 2),), ())
TERNARY = MalCondition(((F, 3),), ())


class PipelineError(AssertionError):
    """An internal invariant failed; the result would not be trustworthy."""


class _Signal:
    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name

    def __bool__(self):
        return False


NP_COMPLETE = _Signal("NP_COMPLETE")


class _NotTractable(Exception):
    pass


@dataclass
class Config:
    """``strict_paper_path=None`` means: fast path for d <= 3, paper path above."""

    strict_paper_path: bool | None = None
    self_check: bool = False
    edge_variant: str = "edge-std"
    compare_edge_variants: bool = False

    def strict(self, d: int) -> bool:
        if self.strict_paper_path is None:
            return d > 3
        return self.strict_paper_path


@dataclass
class Diagnostics:
    bin_assign_checks: int = 0
    bin_assign_violations: list = field(default_factory=list)
    bin_assign_log: list = field(default_factory=list)
    reduce_runs: list = field(default_factory=list)
    certificate_violations: list = field(default_factory=list)
    edge: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ColouredGraph:
    vertices: tuple[str, ...]
    edges: dict
    red_directions: dict

    def colour(self, a: int, b: int):
        return self.edges.get((min(a, b), max(a, b)))

    @property
    def fully_coloured(self) -> bool:
        n = len(self.vertices)
        return all(self.edges.get(p) for p in itertools.combinations(range(n), 2))

    def to_dict(self) -> dict:
        v = self.vertices
        edges = []
        for (a, b), col in sorted(self.edges.items()):
            if col is None:
                continue
            item = {"pair": [v[a], v[b]], "colour": col}
            if col == RED:
                item["directions"] = [
                    f"{v[s]}->{v[t]}" for s, t in sorted(self.red_directions.get((a, b), ()))
                ]
            edges.append(item)
        return {"vertices": list(v), "edges": edges}

    def same_as(self, other: "ColouredGraph") -> bool:
        return (
            self.vertices == other.vertices
            and {k: c for k, c in self.edges.items() if c} == {k: c for k, c in other.edges.items() if c}
            and {k: frozenset(x) for k, x in self.red_directions.items()}
            == {k: frozenset(x) for k, x in other.red_directions.items()}
        )


@dataclass(frozen=True)
class Tractable:
    graph: ColouredGraph
    f_star: OperationTable | None = None
    pair_witnesses: dict = field(default_factory=dict)

    verdict = "tractable"

    def to_dict(self) -> dict:
        return self.graph.to_dict() | {"verdict": self.verdict}


@dataclass(frozen=True)
class NPComplete:
    witness_pair: tuple[int, int]
    graph: ColouredGraph | None = None
    alphabet: tuple[str, ...] = ()

    verdict = "np-complete"

    def to_dict(self) -> dict:
        doc = self.graph.to_dict() if self.graph else {"vertices": list(self.alphabet), "edges": []}
        a, b = self.witness_pair
        names = self.graph.vertices if self.graph else self.alphabet
        return doc | {"verdict": self.verdict, "witness_pair": [names[a], names[b]]}


def same_verdict(x, y) -> bool:
    """Verdict kind, witness pair and (when tractable) the full coloured graph."""
    if isinstance(x, Tractable) and isinstance(y, Tractable):
        return x.graph.same_as(y.graph)
    if isinstance(x, NPComplete) and isinstance(y, NPComplete):
        return x.witness_pair == y.witness_pair
    return False


# -- shared helpers -------------------------------------------------------------


class _Run:
    """Per-language state shared by the pipeline stages."""

    def __init__(self, lang: ConstraintLanguage, config: Config | None, diag: Diagnostics | None):
        self.lang = lang
        self.config = config or Config()
        self.diag = diag if diag is not None else Diagnostics()
        self.strict = self.config.strict(lang.d)
        self._ip2 = self._ip3 = None

    @property
    def ip2(self) -> CspInstance:
        if self._ip2 is None:
            self._ip2 = enforce_one_minimality(build_condition_instance(self.lang, BINARY, True))
        return self._ip2

    @property
    def ip3(self) -> CspInstance:
        if self._ip3 is None:
            self._ip3 = enforce_one_minimality(build_condition_instance(self.lang, TERNARY, True))
        return self._ip3

    def finish(self, inst: CspInstance):
        """Solve a residual instance: directly, or through 3-edge detection."""
        if not self.strict:
            return solve(inst)
        r = detect_3edge_and_solve(
            inst,
            self.config.edge_variant,
            diagnostics=self.diag.edge,
            compare_variants=self.config.compare_edge_variants,
        )
        if r is NOT_3EDGE:
            raise _NotTractable()
        return r


def _complete_binary(partial: dict, d: int, symbol: str = "f") -> OperationTable:
    """Total table from a partial one, first projection where undefined."""
    return OperationTable.from_function(symbol, 2, d, lambda x, y: partial.get((x, y), x))


def _commutative_vars(inst: CspInstance, f: OperationTable) -> list:
    out = []
    for x, m in zip(inst.variables, inst.domains):
        if m & (m - 1):
            a, b = bits(m)
            if f(a, b) == f(b, a):
                out.append(x)
    return out


def _binary_language(inst: CspInstance) -> ConstraintLanguage:
    return language_of_instance(inst)


# -- binary assignment -------------------------------------------------------------


def lemma_bin_assign(
    inst: CspInstance,
    f: OperationTable,
    targets,
    diagnostics: Diagnostics | None = None,
    self_check: bool = False,
) -> CspInstance:
    """Pin each ``x`` in ``targets`` with a 2-element domain to ``f`` of that domain.

    Requires a 1-minimal instance with domains of size <= 2 and a conservative
    binary polymorphism ``f`` commutative on the domains of ``targets`` and a first
    projection on the other 2-element domains. Satisfiability is unchanged.
    """
    if f.arity != 2 or not is_conservative(f):
        raise ValueError("f must be a conservative binary operation")
    if not is_one_minimal(inst):
        raise ValueError("instance must be 1-minimal")
    if any(bin(m).count("1") > 2 for m in inst.domains):
        raise ValueError("every domain must have at most 2 values")
    targets = set(targets)
    pins = {}
    for x in targets:
        vals = bits(inst.domains[inst.index[x]])
        if len(vals) == 2:
            a, b = vals
            if f(a, b) != f(b, a):
                raise ValueError(f"f is not commutative on the domain of {x}")
            pins[x] = f(a, b)
    if not pins:
        if self_check and diagnostics is not None:
            diagnostics.bin_assign_checks += 1
            diagnostics.bin_assign_log.append((inst, inst))
        return inst
    for x, m in zip(inst.variables, inst.domains):
        if x not in targets and m & (m - 1):
            a, b = bits(m)
            if f(a, b) != a or f(b, a) != b:
                raise ValueError(f"f is not a first projection on the domain of {x}")
    if self_check and not is_polymorphism(f, _binary_language(inst)):
        raise ValueError("f is not a polymorphism of the instance's language")
    out = add_constraints(inst, [Unary(x, frozenset((v,))) for x, v in pins.items()])
    if self_check:
        before = is_satisfiable(inst)
        after = is_satisfiable(out)
        if diagnostics is not None:
            diagnostics.bin_assign_checks += 1
            if before != after:
                diagnostics.bin_assign_violations.append((inst, f, sorted(pins.items())))
            diagnostics.bin_assign_log.append((inst, out))
    return out


def _decide(run: _Run, inst: CspInstance, f: OperationTable):
    """Binary assignment with ``f`` on ``inst``, re-propagate, then solve the rest."""
    if run.config.self_check and not is_polymorphism(f, _binary_language(inst)):
        run.diag.certificate_violations.append(("f_i", inst))
    targets = _commutative_vars(inst, f)
    L = lemma_bin_assign(inst, f, targets, run.diag, run.config.self_check)
    L = enforce_one_minimality(L)
    if L is UNSAT:
        return None
    return run.finish(L)


# -- maximally commutative f* -------------------------------------------------------


def find_max_commutative(lang: ConstraintLanguage, config: Config | None = None,
                         diagnostics: Diagnostics | None = None):
    """A conservative binary polymorphism commutative on every pair where some
    conservative polymorphism is, first projection elsewhere; or NP_COMPLETE."""
    run = _Run(lang, config, diagnostics)
    try:
        return _find_max_commutative(run)
    except _NotTractable:
        return NP_COMPLETE


def _fvar(u, v):
    return Var(F, (u, v))


def _find_max_commutative(run: _Run):
    d = run.lang.d
    ip = run.ip2
    if ip is UNSAT:
        raise PipelineError("the binary indicator problem has no projection solution")
    if d < 2:
        return _complete_binary({}, d, "f*")
    h = build_hierarchy(ip, BINARY)
    partial = {(v, v): v for v in range(d)}
    for i, (a, b) in enumerate(h.pair_order):
        Xn = h.sets[i + 1]
        fi = _complete_binary(partial, d)
        branches = {}
        for va, vb in ((a, a), (b, b), (a, b)):
            branches[va, vb] = pin(ip, {_fvar(a, b): va, _fvar(b, a): vb})
        commutable = set()
        for u, v in h.pair_order[:i]:
            for Pj in branches.values():
                if Pj is UNSAT:
                    continue
                Puv = consistent_restriction(Pj, [Equal(_fvar(u, v), _fvar(v, u))])
                if Puv is UNSAT:
                    continue
                if _decide(run, project_instance(Puv, Xn), fi) is not None:
                    commutable.add((u, v))
                    break
        for key in ((a, a), (b, b)):
            Pk = branches[key]
            if Pk is not UNSAT and _decide(run, project_instance(Pk, Xn), fi) is not None:
                commutable.add((a, b))
                break
        extras = []
        for u, v in h.pair_order[: i + 1]:
            if (u, v) in commutable:
                extras.append(Equal(_fvar(u, v), _fvar(v, u)))
            else:
                extras.append(Unary(_fvar(u, v), frozenset((u,))))
                extras.append(Unary(_fvar(v, u), frozenset((v,))))
        P = consistent_restriction(project_instance(ip, Xn), extras)
        if P is UNSAT:
            return NP_COMPLETE
        sol = None
        for va, vb in ((a, a), (b, b), (a, b)):
            Pb = pin(P, {_fvar(a, b): va, _fvar(b, a): vb})
            if Pb is UNSAT:
                continue
            sol = _decide(run, Pb, fi)
            if sol is not None:
                break
        if sol is None:
            return NP_COMPLETE
        partial = {x.args: sol[x] for x in Xn}
    f_star = _complete_binary(partial, d, "f*")
    if not check_solution(ip, {x: f_star(*x.args) for x in ip.variables}):
        raise PipelineError("f* does not solve the binary indicator problem")
    return f_star


# -- Reduce ---------------------------------------------------------------------------


class Reduced(NamedTuple):
    instance: CspInstance
    iterations: int
    s: tuple


def reduce_algorithm(inst: CspInstance, f_star: OperationTable, red_pairs) -> Reduced:
    """Shrink domains of the ternary conservative indicator problem until none
    contains a red pair, keeping every majority/minority solution on non-red
    pairs. ``s`` holds the three final trace assignments."""
    variables = inst.variables
    n = len(variables)
    s = [[x.args[k] for x in variables] for k in range(3)]
    for k in range(3):
        if not check_solution(inst, dict(zip(variables, s[k]))):
            raise ValueError(f"projection onto argument {k + 1} is not a solution")
    red = {frozenset(p) for p in red_pairs}
    for p in red:
        a, b = tuple(p)
        if f_star(a, b) != f_star(b, a):
            raise ValueError("f* must be commutative on the red pairs")
    doms = list(inst.domains)
    fs = f_star
    iterations = 0
    while True:
        guard = None
        for i in range(3):
            for j in range(3):
                if i == j:
                    continue
                si, sj = s[i], s[j]
                for x in range(n):
                    p, q = si[x], sj[x]
                    if p != q and frozenset((p, q)) in red and fs(p, q) == q:
                        guard = (i, j, x)
                        break
                if guard:
                    break
            if guard:
                break
        if guard is None:
            break
        iterations += 1
        if iterations > 2 * n:
            raise PipelineError("Reduce exceeded 2|X| iterations")
        sj = list(s[guard[1]])
        s = [[fs(sk[x], sj[x]) for x in range(n)] for sk in s]
        for x in range(n):
            doms[x] &= (1 << s[0][x]) | (1 << s[1][x]) | (1 << s[2][x])
    for x in range(n):
        vals = bits(doms[x])
        if any(frozenset(p) in red for p in itertools.combinations(vals, 2)):
            raise PipelineError("a red pair survived Reduce")
    out = inst.with_constraints(inst.constraints, doms)
    return Reduced(out, iterations, tuple(tuple(sk) for sk in s))


# -- majority / minority on a pair ------------------------------------------------------


def _pair_pins(B, kind: str) -> dict:
    a, b = B
    pins = {}
    for x, y in ((a, b), (b, a)):
        want = x if kind == "majority" else y
        for args in ((x, x, y), (x, y, x), (y, x, x)):
            pins[Var(F, args)] = want
    return pins


def detect_majority_minority_on_pair(
    lang: ConstraintLanguage,
    f_star: OperationTable,
    red_pairs,
    B,
    config: Config | None = None,
    diagnostics: Diagnostics | None = None,
    _run: _Run | None = None,
):
    """``{"majority": table|None, "minority": table|None}`` or NP_COMPLETE."""
    run = _run or _Run(lang, config, diagnostics)
    B = tuple(sorted(B))
    if frozenset(B) in {frozenset(p) for p in red_pairs}:
        raise ValueError("B must not be red")
    red = _reduce_cached(run, f_star, red_pairs)
    out = {}
    try:
        for kind in ("majority", "minority"):
            P = pin(red.instance, _pair_pins(B, kind))
            sol = None if P is UNSAT else run.finish(P)
            out[kind] = None if sol is None else solution_to_operations(
                TERNARY, sol, lang.d, lang.alphabet
            )[0]
    except _NotTractable:
        return NP_COMPLETE
    return out


def _reduce_cached(run: _Run, f_star, red_pairs) -> Reduced:
    key = (f_star.table, frozenset(frozenset(p) for p in red_pairs))
    cache = run.__dict__.setdefault("_reduced", {})
    if key not in cache:
        r = reduce_algorithm(run.ip3, f_star, red_pairs)
        run.diag.reduce_runs.append((r.iterations, 2 * len(run.ip3.variables)))
        cache[key] = r
    return cache[key]


# -- red-edge orientation ---------------------------------------------------------------------


def orient_red_edges(lang: ConstraintLanguage, f_star: OperationTable, red_pairs,
                     config: Config | None = None, diagnostics: Diagnostics | None = None,
                     _run: _Run | None = None) -> dict:
    """``{(a, b): {(a, b)?, (b, a)?}}``: ``(s, t)`` means some conservative
    polymorphism maps both orders of the pair to ``t``."""
    run = _run or _Run(lang, config, diagnostics)
    out = {}
    for a, b in sorted(tuple(sorted(p)) for p in red_pairs):
        dirs = set()
        for src, dst in ((a, b), (b, a)):
            P = pin(run.ip2, {_fvar(a, b): dst, _fvar(b, a): dst})
            if P is UNSAT:
                continue
            targets = _commutative_vars(P, f_star)
            L = enforce_one_minimality(
                lemma_bin_assign(P, f_star, targets, run.diag, run.config.self_check)
            )
            if L is not UNSAT and solve(L) is not None:
                dirs.add((src, dst))
        if not dirs:
            raise PipelineError(f"red pair {(a, b)} has no direction")
        out[a, b] = frozenset(dirs)
    return out


# -- top level ------------------------------------------------------------------------


def _exact_colour(run: _Run, a: int, b: int):
    """Colour of one pair by plain complete search (no Reduce, no binary assignment)."""
    for c in (a, b):
        P = pin(run.ip2, {_fvar(a, b): c, _fvar(b, a): c})
        if P is not UNSAT and solve(P) is not None:
            return RED
    for kind, colour in (("majority", YELLOW), ("minority", BLUE)):
        P = pin(run.ip3, _pair_pins((a, b), kind))
        if P is not UNSAT and solve(P) is not None:
            return colour
    return None


def _locate_uncoloured(run: _Run):
    for a, b in run.lang.pairs():
        if _exact_colour(run, a, b) is None:
            return (a, b)
    raise PipelineError("NP-completeness was signalled but every pair is coloured")


def analyze(lang: ConstraintLanguage, config: Config | None = None,
            diagnostics: Diagnostics | None = None):
    """Tractable (with coloured graph and witnesses) or NPComplete (with an
    uncoloured pair)."""
    run = _Run(lang, config, diagnostics)
    t = run.diag.timings
    t0 = time.perf_counter()
    try:
        f_star = _find_max_commutative(run)
    except _NotTractable:
        f_star = NP_COMPLETE
    t["max_commutative"] = time.perf_counter() - t0
    if f_star is NP_COMPLETE:
        return NPComplete(_locate_uncoloured(run), None, lang.alphabet)
    pairs = lang.pairs()
    red = [p for p in pairs if f_star(*p) == f_star(p[1], p[0])]
    edges = {p: RED for p in red}
    witnesses = {}
    t0 = time.perf_counter()
    for p in pairs:
        if p in edges:
            continue
        flags = detect_majority_minority_on_pair(lang, f_star, red, p, _run=run)
        if flags is NP_COMPLETE or not (flags["majority"] or flags["minority"]):
            t["pairs"] = time.perf_counter() - t0
            graph = ColouredGraph(lang.alphabet, dict(edges), {})
            return NPComplete(_locate_uncoloured(run), graph, lang.alphabet)
        if flags["majority"]:
            edges[p] = YELLOW
            witnesses[p] = flags["majority"]
        else:
            edges[p] = BLUE
            witnesses[p] = flags["minority"]
    t["pairs"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    dirs = orient_red_edges(lang, f_star, red, _run=run)
    t["orientation"] = time.perf_counter() - t0
    verdict = Tractable(ColouredGraph(lang.alphabet, edges, dirs), f_star, witnesses)
    verify_verdict(lang, verdict)
    return verdict


def verify_verdict(lang: ConstraintLanguage, v: Tractable):
    g, f = v.graph, v.f_star
    if not g.fully_coloured:
        raise PipelineError("tractable verdict with an uncoloured edge")
    if not (is_conservative(f) and is_polymorphism(f, lang)):
        raise PipelineError("f* is not a conservative polymorphism")
    for (a, b), col in g.edges.items():
        cls = classify_on_pair(f, (a, b))
        if col == RED:
            if not cls.startswith("semilattice"):
                raise PipelineError(f"f* is not a semilattice on red pair {(a, b)}")
            if not g.red_directions.get((a, b)):
                raise PipelineError(f"red pair {(a, b)} has no direction")
        else:
            if cls != "projection-1st":
                raise PipelineError(f"f* is not a first projection on {(a, b)}")
            w = v.pair_witnesses[(a, b)]
            want = "majority" if col == YELLOW else "minority"
            if not (is_conservative(w) and is_polymorphism(w, lang)):
                raise PipelineError(f"pair witness on {(a, b)} is not a conservative polymorphism")
            if want not in classify_on_pair(w, (a, b)):
                raise PipelineError(f"pair witness on {(a, b)} is not {want}")
