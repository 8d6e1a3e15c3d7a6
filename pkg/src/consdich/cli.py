"""Command-line entry point: ``consdich analyze|check-condition|oracle|solve|gen``.

Exit codes: 0 tractable / satisfied / satisfiable, 1 NP-complete / not
satisfied / unsatisfiable, 2 on any error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import kernels
from .csp import check_solution, parse_instance, solve
from .dichotomy import (
    BLUE,
    RED,
    YELLOW,
    ColouredGraph,
    Config,
    Diagnostics,
    NPComplete,
    Tractable,
    analyze,
)
from .language import (
    ConstraintLanguage,
    classify_on_pair,
    is_conservative,
    is_polymorphism,
    language_from_dict,
    parse_language,
    serialize_language,
    table_from_dict,
    table_to_dict,
)
from .malcon import builtin_condition, condition_to_dict, parse_condition, satisfies
from .oracle import LanguageGenSpec, brute_force_coloured_graph, random_language
from .treasure import detect_conservative

EXIT_YES, EXIT_NO, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror or e}") from None


def _load_language(path: str) -> ConstraintLanguage:
    return parse_language(_read(path))


# -- reports -----------------------------------------------------------------------


def witnesses_to_dict(verdict) -> dict:
    if not isinstance(verdict, Tractable) or verdict.f_star is None:
        return {}
    a = verdict.graph.vertices
    return {
        "f_star": table_to_dict(verdict.f_star, a),
        "pair_witnesses": [
            {"pair": [a[p[0]], a[p[1]]], "table": table_to_dict(t, a)}
            for p, t in sorted(verdict.pair_witnesses.items())
        ],
    }


def build_report(lang, verdict, diag: Diagnostics | None, config: dict) -> dict:
    doc = verdict.to_dict()
    doc["witnesses"] = witnesses_to_dict(verdict)
    doc["language"] = json.loads(serialize_language(lang))
    doc["timings"] = {k: round(v, 6) for k, v in (diag.timings if diag else {}).items()}
    doc["config"] = config
    return doc


def verify_report(doc: dict) -> list[str]:
    """Re-check the witness tables in a loaded report; returns the problems found."""
    lang = language_from_dict(doc["language"])
    pos = {v: i for i, v in enumerate(lang.alphabet)}
    problems = []
    w = doc.get("witnesses") or {}
    colours = {tuple(sorted(pos[v] for v in e["pair"])): e["colour"] for e in doc.get("edges", [])}
    if "f_star" in w:
        f = table_from_dict(w["f_star"], lang.alphabet)
        if not (is_conservative(f) and is_polymorphism(f, lang)):
            problems.append("f_star is not a conservative polymorphism")
        for p, col in colours.items():
            cls = classify_on_pair(f, p)
            if (col == RED) != cls.startswith("semilattice"):
                problems.append(f"f_star does not match the colour of {p}")
    for item in w.get("pair_witnesses", []):
        p = tuple(sorted(pos[v] for v in item["pair"]))
        t = table_from_dict(item["table"], lang.alphabet)
        want = {YELLOW: "majority", BLUE: "minority"}.get(colours.get(p))
        if not (is_conservative(t) and is_polymorphism(t, lang)):
            problems.append(f"witness for {p} is not a conservative polymorphism")
        elif want is None or want not in classify_on_pair(t, p):
            problems.append(f"witness for {p} does not match its colour")
    return problems


def _graph_text(g: ColouredGraph) -> list[str]:
    v = g.vertices
    lines = []
    for (a, b), col in sorted(g.edges.items()):
        if not col:
            continue
        line = f"  {{{v[a]},{v[b]}}}: {col}"
        if col == RED:
            dirs = ", ".join(f"{v[s]}->{v[t]}" for s, t in sorted(g.red_directions.get((a, b), ())))
            line += f" ({dirs})"
        lines.append(line)
    return lines


def _print_verdict(verdict, fmt: str, report: dict):
    if fmt == "json":
        print(json.dumps(report, indent=2))
        return
    if isinstance(verdict, NPComplete):
        a, b = verdict.witness_pair
        names = verdict.alphabet
        print(f"np-complete: no conservative polymorphism is a semilattice, majority or "
              f"minority on {{{names[a]},{names[b]}}}")
    else:
        print("tractable")
    if verdict.graph is not None:
        for line in _graph_text(verdict.graph):
            print(line)


# -- commands -------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    lang = _load_language(args.language)
    config = Config(strict_paper_path=True if args.strict_paper_path else None)
    diag = Diagnostics()
    t0 = time.perf_counter()
    verdict = analyze(lang, config, diag)
    diag.timings["total"] = time.perf_counter() - t0
    report = build_report(
        lang,
        verdict,
        diag,
        {
            "command": "analyze",
            "language": args.language,
            "strict_paper_path": config.strict(lang.d),
            "edge_variant": config.edge_variant,
            "backend": kernels.BACKEND,
        },
    )
    if args.witnesses:
        Path(args.witnesses).write_text(json.dumps(report["witnesses"], indent=2) + "\n")
    _print_verdict(verdict, args.format, report)
    return EXIT_YES if isinstance(verdict, Tractable) else EXIT_NO


def cmd_check_condition(args) -> int:
    lang = _load_language(args.language)
    M = builtin_condition(args.builtin) if args.builtin else parse_condition(_read(args.condition))
    tables = detect_conservative(lang, M)
    if tables is None:
        print("not satisfied")
        return EXIT_NO
    if not satisfies(tables, M):
        raise CliError("internal error: witnesses break the condition")
    print(json.dumps(
        {
            "satisfied": True,
            "condition": condition_to_dict(M),
            "witnesses": [table_to_dict(t, lang.alphabet) for t in tables],
        },
        indent=2,
    ))
    return EXIT_YES


def cmd_oracle(args) -> int:
    lang = _load_language(args.language)
    verdict = brute_force_coloured_graph(lang, args.max_domain)
    report = build_report(lang, verdict, None, {"command": "oracle", "language": args.language})
    _print_verdict(verdict, args.format, report)
    return EXIT_YES if isinstance(verdict, Tractable) else EXIT_NO


def cmd_solve(args) -> int:
    inst = parse_instance(_read(args.instance))
    sol = solve(inst)
    if sol is None:
        print("unsatisfiable")
        return EXIT_NO
    if not check_solution(inst, sol):
        raise CliError("internal error: solver returned a non-solution")
    a = inst.alphabet
    print(json.dumps({str(x): a[v] for x, v in sol.items()}, indent=2))
    return EXIT_YES


def cmd_gen(args) -> int:
    spec = LanguageGenSpec(args.seed, args.domain_size, args.relations, args.arity, args.tuples)
    text = serialize_language(random_language(spec)) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_YES


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="consdich", description="Conservative CSP dichotomy tools")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="decide tractability and print the coloured graph")
    p.add_argument("language")
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.add_argument("--witnesses", metavar="OUT", help="write witness tables to OUT")
    p.add_argument("--strict-paper-path", action="store_true",
                   help="decide residual instances through 3-edge detection")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("check-condition", help="test a linear condition on the conservative extension")
    p.add_argument("language")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--builtin", help="majority, minority, edge:k or edge-std:k")
    g.add_argument("--condition", metavar="FILE")
    p.set_defaults(fn=cmd_check_condition)

    p = sub.add_parser("oracle", help="brute-force coloured graph (small alphabets)")
    p.add_argument("language")
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.add_argument("--max-domain", type=int, default=4)
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("solve", help="solve a CSP instance file")
    p.add_argument("instance")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("gen", help="write a random language file")
    p.add_argument("--domain-size", type=int, required=True)
    p.add_argument("--relations", type=int, required=True)
    p.add_argument("--arity", type=int, required=True)
    p.add_argument("--tuples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_gen)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_YES
    try:
        return args.fn(args)
    except (CliError, ValueError, KeyError, TypeError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
