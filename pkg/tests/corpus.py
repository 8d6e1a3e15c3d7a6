"""Fixed-seed corpora and probes shared by module tests and the acceptance suite."""

import itertools
import random

from consdich.csp import (
    UNSAT,
    Constraint,
    CspInstance,
    Equal,
    Unary,
    check_solution,
    consistent_restriction,
    enforce_one_minimality,
    is_one_minimal,
    solve,
)
from consdich.oracle import LanguageGenSpec, brute_force_solutions, random_language, structured_language

CONDITIONS = ["majority", "minority", "edge:2", "edge:3", "edge-std:3"]


def random_corpus(n, seed0=0, sizes=(2, 3)):
    """``n`` random languages within arity <= 3, <= 4 relations, <= 8 tuples."""
    out = []
    for s in range(seed0, seed0 + n):
        rng = random.Random(s)
        d = sizes[s % len(sizes)]
        spec = LanguageGenSpec(
            seed=s,
            domain_size=d,
            relation_count=rng.randint(1, 4),
            max_arity=rng.randint(1, 3),
            tuples_per_relation=rng.randint(1, 8),
        )
        if spec.tuples_per_relation >= d**spec.max_arity:
            spec = LanguageGenSpec(s, d, spec.relation_count, spec.max_arity, d**spec.max_arity - 1)
        out.append(random_language(spec))
    return out


def structured_corpus(n, seed0=0, sizes=(2, 3)):
    return [structured_language(s, sizes) for s in range(seed0, seed0 + n)]


def mixed_corpus(n, seed0=0, sizes=(2, 3)):
    """Half random, half structured (the structured half supplies blue pairs)."""
    half = n // 2
    return random_corpus(n - half, seed0, sizes) + structured_corpus(half, seed0, sizes)


def random_engine_instance(seed, max_vars=6, max_d=3):
    rng = random.Random(seed)
    d = rng.randint(1, max_d)
    n = rng.randint(1, max_vars)
    full = (1 << d) - 1
    doms = tuple(rng.randint(1, full) for _ in range(n))
    cons = []
    for _ in range(rng.randint(0, 6)):
        arity = rng.randint(1, min(3, n))
        scope = tuple(rng.randrange(n) for _ in range(arity))
        space = list(itertools.product(range(d), repeat=arity))
        tuples = rng.sample(space, rng.randint(0, len(space)))
        cons.append(Constraint(scope, tuple(sorted(tuples))))
    return CspInstance(tuple(f"v{i}" for i in range(n)), doms, tuple(cons), d)


def solution_set(inst):
    return {tuple(sorted(s.items())) for s in brute_force_solutions(inst)}


def _shrunk(inst, seed):
    rng = random.Random(seed)
    doms = []
    for m in inst.domains:
        keep = [b for b in range(inst.d) if m >> b & 1 and rng.random() < 0.7]
        doms.append(sum(1 << b for b in keep) or m)
    return CspInstance(inst.variables, tuple(doms), inst.constraints, inst.d)


def engine_violations(inst, seed=0):
    """Idempotence, monotonicity, solution preservation and solve completeness."""
    problems = []
    sols = solution_set(inst)
    out = enforce_one_minimality(inst)
    if out is UNSAT:
        if sols:
            problems.append("UNSAT but solutions exist")
    else:
        if enforce_one_minimality(out) != out:
            problems.append("not idempotent")
        if not is_one_minimal(out):
            problems.append("not a fixed point")
        for a, b in zip(inst.domains, out.domains):
            if b & ~a:
                problems.append("domain grew")
        for c, c2 in zip(inst.constraints, out.constraints):
            if not set(c2.tuples) <= set(c.tuples):
                problems.append("tuples grew")
        if solution_set(out) != sols:
            problems.append("solution set changed")
        # smaller input domains never give larger output domains
        small = enforce_one_minimality(_shrunk(inst, seed))
        if small is not UNSAT and any(b & ~a for a, b in zip(out.domains, small.domains)):
            problems.append("not monotone")
    found = solve(inst)
    if (found is not None) != bool(sols):
        problems.append("solve incomplete or unsound")
    if found is not None and not check_solution(inst, found):
        problems.append("solve returned a non-solution")
    return problems


def random_restriction(inst, rng, max_extras=4):
    """A random consistent restriction (unary shrinks and equalities), or UNSAT."""
    extras = []
    for _ in range(rng.randint(0, max_extras)):
        x = rng.choice(inst.variables)
        if rng.random() < 0.6:
            dom = sorted(inst.domain(x))
            keep = rng.sample(dom, rng.randint(1, len(dom)))
            extras.append(Unary(x, frozenset(keep)))
        else:
            extras.append(Equal(x, rng.choice(inst.variables)))
    return consistent_restriction(inst, extras)


def containment_probe(inst, arities, rng):
    """One containment probe on ``inst``: ``(ran, violation)``.

    Picks a tagged constraint, draws argument tuples from its (restricted)
    relation, looks up the constraint tagged with those tuples and checks
    that its relation is contained in the first one. ``ran`` is False when
    there was nothing to probe.
    """
    by_tag = {}
    for c in inst.constraints:
        for tag in c.tags:
            if isinstance(tag, tuple):
                by_tag[tag] = c
    if not by_tag:
        return False, None
    tag = rng.choice(sorted(by_tag, key=repr))
    c = by_tag[tag]
    if not c.tuples:
        return False, None
    rel_name = tag[0]
    sym = rng.choice(sorted(arities))
    rows = tuple(rng.choice(c.tuples) for _ in range(arities[sym]))
    c2 = by_tag.get((rel_name, sym, rows))
    if c2 is None:
        return True, f"no constraint tagged {(rel_name, sym, rows)}"
    if not set(c2.tuples) <= set(c.tuples):
        return True, f"{(rel_name, sym, rows)} not contained in {tag}"
    return True, None


__all__ = [
    "CONDITIONS",
    "UNSAT",
    "containment_probe",
    "engine_violations",
    "mixed_corpus",
    "random_corpus",
    "random_engine_instance",
    "random_restriction",
    "solution_set",
    "structured_corpus",
]
