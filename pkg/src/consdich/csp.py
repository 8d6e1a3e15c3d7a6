"""CSP instances, 1-minimality, projection and complete search.

Domains are bitmasks over alphabet indices (bit ``v`` set iff value ``v`` is
allowed), so ``d`` is capped at 62. Instances are immutable; every
operation returns a new instance or the :data:`UNSAT` signal.
"""

from __future__ import annotations

import json
from array import array
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from . import kernels

MAX_DOMAIN = 62
EMPTY_SEEDS = array("i")


class _Unsat:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __bool__(self):
        return False

    def __repr__(self):
        return "UNSAT"


UNSAT = _Unsat()

Assignment = dict


def bits(mask: int) -> list[int]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return out


def mask_of(values: Iterable[int]) -> int:
    m = 0
    for v in values:
        m |= 1 << v
    return m


@dataclass(frozen=True)
class Constraint:
    scope: tuple[int, ...]
    tuples: tuple[tuple[int, ...], ...]
    tags: tuple = ()

    @property
    def arity(self) -> int:
        return len(self.scope)


@dataclass(frozen=True)
class Unary:
    var: Hashable
    values: frozenset


@dataclass(frozen=True)
class Equal:
    left: Hashable
    right: Hashable


@dataclass(frozen=True, eq=False)
class CspInstance:
    variables: tuple
    domains: tuple[int, ...]
    constraints: tuple[Constraint, ...]
    d: int
    alphabet: tuple[str, ...] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.d > MAX_DOMAIN:
            raise ValueError(f"domain size {self.d} exceeds {MAX_DOMAIN}")
        if len(self.domains) != len(self.variables):
            raise ValueError("one domain per variable is required")
        n = len(self.variables)
        for c in self.constraints:
            if any(not 0 <= i < n for i in c.scope):
                raise ValueError("constraint scope mentions an unknown variable")

    @property
    def index(self) -> dict:
        idx = self._cache.get("index")
        if idx is None:
            idx = {v: i for i, v in enumerate(self.variables)}
            self._cache["index"] = idx
        return idx

    def domain(self, var) -> frozenset:
        return frozenset(bits(self.domains[self.index[var]]))

    def scope_ids(self, c: Constraint) -> tuple:
        return tuple(self.variables[i] for i in c.scope)

    def __eq__(self, other):
        if not isinstance(other, CspInstance):
            return NotImplemented
        return (
            self.variables == other.variables
            and self.domains == other.domains
            and self.d == other.d
            and _constraint_key(self) == _constraint_key(other)
        )

    def __hash__(self):
        return hash((self.variables, self.domains, self.d))

    def with_constraints(self, constraints, domains=None) -> "CspInstance":
        return CspInstance(
            self.variables,
            tuple(self.domains if domains is None else domains),
            tuple(constraints),
            self.d,
            self.alphabet,
        )


def _constraint_key(inst):
    return sorted((c.scope, c.tuples) for c in inst.constraints)


def make_instance(variables, d, constraints=(), domains=None, alphabet=None) -> CspInstance:
    """Convenience constructor taking scopes as variable ids."""
    variables = tuple(variables)
    idx = {v: i for i, v in enumerate(variables)}
    full = (1 << d) - 1
    if domains is None:
        doms = (full,) * len(variables)
    else:
        doms = tuple(
            mask_of(domains[v]) if v in domains else full for v in variables
        )
    cons = []
    for item in constraints:
        scope, tuples = item[0], item[1]
        tags = item[2] if len(item) > 2 else ()
        cons.append(
            Constraint(
                tuple(idx[v] for v in scope),
                tuple(sorted(set(map(tuple, tuples)))),
                tuple(tags),
            )
        )
    return CspInstance(variables, doms, tuple(cons), d, alphabet)


# -- packing for the kernel ----------------------------------------------------


class Packed:
    """Flat arrays of an instance for :func:`kernels.propagate`."""

    def __init__(self, inst: CspInstance):
        self.inst = inst
        n = len(inst.variables)
        scope_off, scope_var = array("i", [0]), array("i")
        tup_off, data_off, tup_data = array("i", [0]), array("i"), array("i")
        adj_lists: list[list[int]] = [[] for _ in range(n)]
        for ci, c in enumerate(inst.constraints):
            scope_var.extend(c.scope)
            scope_off.append(len(scope_var))
            data_off.append(len(tup_data))
            for t in c.tuples:
                tup_data.extend(t)
            tup_off.append(tup_off[-1] + len(c.tuples))
            for v in set(c.scope):
                adj_lists[v].append(ci)
        adj_off, adj = array("i", [0]), array("i")
        for lst in adj_lists:
            adj.extend(lst)
            adj_off.append(len(adj))
        self.arrays = (scope_off, scope_var, data_off, tup_off, tup_data, adj_off, adj)
        self.ntuples = tup_off[-1]

    def fresh(self):
        return array("q", self.inst.domains), array("b", b"\x01" * self.ntuples)

    def propagate(self, dom, alive, seeds=EMPTY_SEEDS) -> bool:
        if any(x == 0 for x in dom):
            return False
        return bool(kernels.propagate(*self.arrays, dom, alive, seeds))

    def pin(self, dom, alive, var: int, value: int):
        """Copy of the state with ``var`` pinned, propagated; None on wipe-out."""
        if not (dom[var] >> value) & 1:
            return None
        d2, a2 = array("q", dom), array("b", alive)
        d2[var] = 1 << value
        if not kernels.propagate(*self.arrays, d2, a2, array("i", [var])):
            return None
        return d2, a2

    def to_instance(self, dom, alive) -> CspInstance:
        inst = self.inst
        tup_off = self.arrays[3]
        cons = []
        for ci, c in enumerate(inst.constraints):
            g0 = tup_off[ci]
            keep = tuple(t for k, t in enumerate(c.tuples) if alive[g0 + k])
            cons.append(c if len(keep) == len(c.tuples) else Constraint(c.scope, keep, c.tags))
        return inst.with_constraints(cons, tuple(dom))


def packed(inst: CspInstance) -> Packed:
    pk = inst._cache.get("packed")
    if pk is None:
        pk = Packed(inst)
        inst._cache["packed"] = pk
    return pk


# -- operations ----------------------------------------------------------------


def enforce_one_minimality(inst: CspInstance):
    """Greatest 1-minimal sub-instance, or UNSAT on a domain/relation wipe-out."""
    if inst._cache.get("one_minimal"):
        return inst
    pk = packed(inst)
    dom, alive = pk.fresh()
    if not pk.propagate(dom, alive):
        return UNSAT
    out = pk.to_instance(dom, alive)
    out._cache["one_minimal"] = True
    return out


def is_one_minimal(inst: CspInstance) -> bool:
    for x in inst.domains:
        if x == 0:
            return False
    for c in inst.constraints:
        if not c.tuples:
            return False
        for p, v in enumerate(c.scope):
            if mask_of(t[p] for t in c.tuples) != inst.domains[v]:
                return False
    return True


def project_instance(inst: CspInstance, X1: Iterable) -> CspInstance:
    keep = set(X1)
    unknown = keep - set(inst.variables)
    if unknown:
        raise ValueError(f"unknown variables: {sorted(map(repr, unknown))[:3]}")
    new_vars = tuple(v for v in inst.variables if v in keep)
    remap = {inst.index[v]: i for i, v in enumerate(new_vars)}
    cons = []
    for c in inst.constraints:
        pos = [p for p, v in enumerate(c.scope) if v in remap]
        if not pos:
            continue
        if len(pos) == len(c.scope):
            cons.append(Constraint(tuple(remap[v] for v in c.scope), c.tuples, c.tags))
            continue
        tuples = tuple(sorted({tuple(t[p] for p in pos) for t in c.tuples}))
        cons.append(Constraint(tuple(remap[c.scope[p]] for p in pos), tuples, c.tags))
    doms = tuple(inst.domains[inst.index[v]] for v in new_vars)
    return CspInstance(new_vars, doms, tuple(cons), inst.d, inst.alphabet)


def equality_constraint(inst: CspInstance, x, y, tag="equality") -> Constraint:
    i, j = inst.index[x], inst.index[y]
    shared = bits(inst.domains[i] & inst.domains[j])
    return Constraint((i, j), tuple((v, v) for v in shared), (tag,))


def add_constraints(inst: CspInstance, extras: Sequence) -> CspInstance:
    """Add unary/equality constraints without propagating."""
    doms = list(inst.domains)
    cons = list(inst.constraints)
    for e in extras:
        if isinstance(e, Unary):
            i = inst.index[e.var]
            doms[i] &= mask_of(e.values)
        elif isinstance(e, Equal):
            if e.left == e.right:
                continue
            i, j = inst.index[e.left], inst.index[e.right]
            shared = bits(doms[i] & doms[j])
            cons.append(Constraint((i, j), tuple((v, v) for v in shared), ("equality",)))
        else:
            raise TypeError(f"extra constraint must be Unary or Equal, got {e!r}")
    return inst.with_constraints(cons, doms)


def consistent_restriction(inst: CspInstance, extras: Sequence = ()):
    return enforce_one_minimality(add_constraints(inst, extras))


def pin(inst: CspInstance, values: Mapping):
    """Consistent restriction pinning each ``var -> value`` of ``values``."""
    return consistent_restriction(inst, [Unary(x, frozenset((v,))) for x, v in values.items()])


Oracle = Callable[[CspInstance], bool]


def solve(inst: CspInstance, oracle: Oracle | None = None):
    """Return a satisfying assignment ``{var: value}`` or None.

    Without an oracle: backtracking in canonical variable/value order,
    maintaining 1-minimality at every node. With an oracle (a decision
    procedure for the instance's satisfiability): each tentative pin is
    kept only if the oracle accepts the pinned instance, so a failed pin
    never backtracks past its own level.
    """
    pk = packed(inst)
    dom, alive = pk.fresh()
    if not pk.propagate(dom, alive):
        return None
    if oracle is None:
        res = _mac(pk, dom, alive, 0)
    else:
        res = _one_level(pk, dom, alive, oracle)
    if res is None:
        return None
    return {v: res[i].bit_length() - 1 for i, v in enumerate(inst.variables)}


def is_satisfiable(inst: CspInstance) -> bool:
    return solve(inst) is not None


def _first_open(dom, start):
    for i in range(start, len(dom)):
        x = dom[i]
        if x & (x - 1):
            return i
    return -1


def _mac(pk: Packed, dom, alive, start):
    i = _first_open(dom, start)
    if i < 0:
        return dom
    for v in bits(dom[i]):
        st = pk.pin(dom, alive, i, v)
        if st is not None:
            res = _mac(pk, st[0], st[1], i + 1)
            if res is not None:
                return res
    return None


def _one_level(pk: Packed, dom, alive, oracle):
    if not oracle(pk.to_instance(dom, alive)):
        return None
    i = 0
    while True:
        i = _first_open(dom, i)
        if i < 0:
            return dom
        for v in bits(dom[i]):
            st = pk.pin(dom, alive, i, v)
            if st is not None and oracle(pk.to_instance(*st)):
                dom, alive = st
                break
        else:
            # oracle accepted the parent but no child: it is not a decision procedure
            return None


def check_solution(inst: CspInstance, a: Mapping) -> bool:
    missing = [v for v in inst.variables if v not in a]
    if missing:
        raise ValueError(f"assignment is not total (missing {missing[0]!r})")
    vals = [a[v] for v in inst.variables]
    for i, v in enumerate(vals):
        if not (inst.domains[i] >> v) & 1:
            return False
    for c in inst.constraints:
        if tuple(vals[i] for i in c.scope) not in _tupleset(c):
            return False
    return True


def _tupleset(c: Constraint) -> frozenset:
    s = c.__dict__.get("_set")
    if s is None:
        s = frozenset(c.tuples)
        object.__setattr__(c, "_set", s)
    return s


# -- file format ---------------------------------------------------------------


def instance_from_dict(doc) -> CspInstance:
    alphabet = tuple(doc["domain"])
    pos = {v: i for i, v in enumerate(alphabet)}
    variables = tuple(doc["variables"])
    if len(set(variables)) != len(variables):
        raise ValueError("duplicate variable ids")
    idx = {v: i for i, v in enumerate(variables)}
    cons = []
    for item in doc.get("constraints", []):
        scope = item["scope"]
        rel = item["relation"]
        if rel["arity"] != len(scope):
            raise ValueError("scope arity does not match relation arity")
        try:
            sc = tuple(idx[v] for v in scope)
        except KeyError as e:
            raise ValueError(f"unknown variable {e.args[0]!r}") from None
        tuples = []
        for t in rel["tuples"]:
            if len(t) != len(scope):
                raise ValueError(f"arity mismatch in tuple {t!r}")
            try:
                tuples.append(tuple(pos[v] for v in t))
            except KeyError:
                raise ValueError(f"value not in alphabet in tuple {t!r}") from None
        cons.append(Constraint(sc, tuple(sorted(set(tuples)))))
    full = (1 << len(alphabet)) - 1
    return CspInstance(variables, (full,) * len(variables), tuple(cons), len(alphabet), alphabet)


def instance_to_dict(inst: CspInstance) -> dict:
    a = inst.alphabet or tuple(str(v) for v in range(inst.d))
    cons = [
        {
            "scope": [str(inst.variables[i]) for i in c.scope],
            "relation": {"arity": c.arity, "tuples": [[a[v] for v in t] for t in c.tuples]},
        }
        for c in inst.constraints
    ]
    full = (1 << inst.d) - 1
    for i, m in enumerate(inst.domains):
        if m != full:
            cons.append(
                {
                    "scope": [str(inst.variables[i])],
                    "relation": {"arity": 1, "tuples": [[a[v]] for v in bits(m)]},
                }
            )
    return {"domain": list(a), "variables": [str(v) for v in inst.variables], "constraints": cons}


def parse_instance(text: str) -> CspInstance:
    return instance_from_dict(json.loads(text))
