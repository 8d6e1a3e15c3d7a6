"""Conservative k-edge machinery: s/d/p compositions, GMM composition and
3-edge detection on the language of a residual instance."""

from __future__ import annotations

import itertools
import warnings
from collections import OrderedDict
from dataclasses import dataclass

from .csp import CspInstance, is_one_minimal
from .language import ConstraintLanguage, OperationTable, Relation, is_conservative
from .malcon import builtin_condition, identity_violations
from .treasure import SemiuniformSolver, detect_conservative, reference_solver


class EdgeError(ValueError):
    pass


class SdpIdentityError(EdgeError):
    """A composed s/d/p table breaks one of its identities.

    ``identity`` names the identity and ``inputs`` the violating arguments,
    so the counterexample can be replayed from ``e`` alone.
    """

    def __init__(self, identity: str, inputs: tuple, e: OperationTable):
        super().__init__(f"{identity} fails at {inputs}")
        self.identity = identity
        self.inputs = inputs
        self.e = e


class _NotEdge:
    def __repr__(self):
        return "NOT_3EDGE"

    def __bool__(self):
        return False


NOT_3EDGE = _NotEdge()


@dataclass(frozen=True)
class EdgeToolkit:
    e: OperationTable
    s: OperationTable
    d: OperationTable
    p: OperationTable


def _compose(e: OperationTable, k: int):
    n = e.d
    dd = OperationTable.from_function("d", 2, n, lambda x, y: e(x, y, *([x] * (k - 1))))
    s = OperationTable.from_function("s", k, n, lambda *xs: e(xs[1], xs[0], xs[1], *xs[2:]))
    p = OperationTable.from_function("p", 3, n, lambda x, y, z: e(y, dd(y, z), *([x] * (k - 1))))
    return s, dd, p


def sdp_violations(tk: EdgeToolkit, k: int):
    """All (identity, inputs) pairs where the composed tables fail."""
    s, dd, p = tk.s, tk.d, tk.p
    out = []
    for x, y in itertools.product(range(tk.e.d), repeat=2):
        if p(x, y, y) != x:
            out.append(("p(x,y,y)=x", (x, y)))
        if p(x, x, y) != dd(x, y):
            out.append(("p(x,x,y)=d(x,y)", (x, y)))
        if dd(x, dd(x, y)) != dd(x, y):
            out.append(("d(x,d(x,y))=d(x,y)", (x, y)))
        if s(x, *([y] * (k - 1))) != dd(y, x):
            out.append(("s(x,y,...,y)=d(y,x)", (x, y)))
        for j in range(1, k):
            args = [y] * k
            args[j] = x
            if s(*args) != y:
                out.append((f"s(y,..,x@{j + 1},..,y)=y", (x, y)))
    return out


def derive_sdp(e: OperationTable, k: int, variant: str = "edge-std") -> EdgeToolkit:
    """Compose s, d, p from a conservative k-edge operation and verify them."""
    if e.arity != k + 1:
        raise EdgeError(f"a {k}-edge operation has arity {k + 1}")
    if not is_conservative(e):
        raise EdgeError("e is not conservative")
    e = OperationTable("e", e.arity, e.d, e.table, e.alphabet)
    bad = identity_violations([e], builtin_condition(f"{variant}:{k}"))
    if bad:
        raise EdgeError(f"e fails the {variant}:{k} identities: {bad[0][0]} at {bad[0][1]}")
    tk = EdgeToolkit(e, *_compose(e, k))
    viol = sdp_violations(tk, k)
    if viol:
        raise SdpIdentityError(viol[0][0], viol[0][1], e)
    return tk


def compose_gmm(g: OperationTable, h: OperationTable) -> OperationTable:
    """``m(x,y,z) = h(g(x,y,z), g(y,z,x), g(z,x,y))``."""
    if g.arity != 3 or h.arity != 3:
        raise EdgeError("compose_gmm needs ternary operations")
    if g.d != h.d:
        raise EdgeError("operations have different alphabets")
    return OperationTable.from_function(
        "m", 3, g.d, lambda x, y, z: h(g(x, y, z), g(y, z, x), g(z, x, y)), g.alphabet
    )


# -- residual languages ----------------------------------------------------------


def _normalize(arity: int, tuples) -> tuple | None:
    """Drop coordinates that conservative operations cannot care about.

    Constant columns and repeated columns are removed; a relation that is
    the product of its projections is dropped.
    Returns ``None`` when nothing relevant remains.
    """
    if not tuples:
        return (arity, ())
    cols = list(zip(*tuples))
    keep = []
    for i, col in enumerate(cols):
        if len(set(col)) == 1 or any(col == cols[j] for j in keep):
            continue
        keep.append(i)
    if not keep:
        return None
    rows = sorted({tuple(t[i] for i in keep) for t in tuples})
    prod = 1
    for i in keep:
        prod *= len(set(cols[i]))
    if prod == len(rows):
        return None
    return (len(keep), tuple(rows))


def language_of_instance(inst: CspInstance) -> ConstraintLanguage:
    """The relations of ``inst`` relevant to conservative polymorphisms.

    Unary relations, equalities and anything else preserved by every
    conservative operation are left out; duplicates are merged.
    """
    found = set()
    for c in inst.constraints:
        key = _normalize(len(c.scope), c.tuples)
        if key is not None:
            found.add(key)
    rels = tuple(
        Relation(f"R{i}", arity, tuples) for i, (arity, tuples) in enumerate(sorted(found))
    )
    alphabet = inst.alphabet or tuple(str(v) for v in range(inst.d))
    return ConstraintLanguage(alphabet, rels)


_EDGE_CACHE: OrderedDict = OrderedDict()
_EDGE_CACHE_SIZE = 4096


def detect_edge(lang: ConstraintLanguage, k: int = 3, variant: str = "edge-std", solver=None):
    """Memoized conservative k-edge detection (the witness table or None)."""
    key = (variant, k, lang.d, tuple((r.arity, r.tuples) for r in lang.relations))
    if solver is None and key in _EDGE_CACHE:
        _EDGE_CACHE.move_to_end(key)
        return _EDGE_CACHE[key]
    tables = detect_conservative(lang, builtin_condition(f"{variant}:{k}"), solver)
    e = tables[0] if tables else None
    if solver is None:
        _EDGE_CACHE[key] = e
        if len(_EDGE_CACHE) > _EDGE_CACHE_SIZE:
            _EDGE_CACHE.popitem(last=False)
    return e


def detect_3edge_and_solve(
    inst: CspInstance,
    variant: str = "edge-std",
    solver: SemiuniformSolver | None = None,
    diagnostics: dict | None = None,
    compare_variants: bool = False,
):
    """Solve ``inst`` if its language has a conservative 3-edge polymorphism.

    Returns an assignment, None (unsatisfiable) or :data:`NOT_3EDGE`.
    """
    if not is_one_minimal(inst):
        raise EdgeError("instance must be 1-minimal")
    lang = language_of_instance(inst)
    e = detect_edge(lang, 3, variant)
    if diagnostics is not None:
        diagnostics["edge_checks"] = diagnostics.get("edge_checks", 0) + 1
        if compare_variants:
            other = "edge" if variant == "edge-std" else "edge-std"
            e2 = detect_edge(lang, 3, other)
            if (e is None) != (e2 is None):
                diagnostics.setdefault("edge_variant_disagreements", []).append(
                    {variant: e is not None, other: e2 is not None, "language": lang}
                )
    if e is None:
        return NOT_3EDGE
    try:
        tk = derive_sdp(e, 3, variant)
        certificate = [tk.e, tk.s, tk.d, tk.p]
    except SdpIdentityError as err:
        warnings.warn(f"s/d/p composition failed for a {variant}:3 witness: {err}")
        if diagnostics is not None:
            diagnostics.setdefault("sdp_findings", []).append(err)
        certificate = [e]
    return (solver or reference_solver)(inst, certificate)
