"""Command-line front end.

Commands: ``classify`` a language file, ``solve`` a language/instance pair
with an auto-selected or forced method, ``gen`` seed-deterministic random
inputs, and ``check`` a claimed assignment.  Exit codes for solve: 0 SAT,
1 UNSAT, 2 input error, 3 budget error; classify exits 3 when budgets force
an unknown verdict.

Instance files (.dti) are line oriented with '#' comments: a first line
``var a b c`` declares the variables, every following line applies a relation
``R(a, b)`` or uses a difference literal such as ``b = a + 2`` directly
(expanded into an implicit relation).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import re
import sys
import time

from .classify import VerdictClass, classify
from .errors import BudgetExceeded, DtcspError, NotHornError, ParseError
from .finite import (
    Instance,
    backtracking_solve,
    bounded_window,
    decide_max_closed,
    satisfies,
    solve_mod_max,
    validate_instance,
)
from .formula import (
    Cmp,
    ConstraintLanguage,
    Formula,
    Literal,
    RelationDef,
    parse_language,
    write_language,
)
from .horn import solve_horn_csp
from .oracle import brute_solve, random_horn_relation, random_instance, random_relation

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_APPLY_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*\(([^)]*)\)\s*$")
_SUGAR_RE = re.compile(
    r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(<=|<|!=|=)\s*([A-Za-z_][A-Za-z0-9_]*)"
    r"\s*(?:([+-])\s*(\d+))?\s*$")

_CMP_FROM_TEXT = {"<=": Cmp.LEQ, "<": Cmp.LT, "=": Cmp.EQ, "!=": Cmp.NEQ}
_CMP_SLUG = {Cmp.LEQ: "leq", Cmp.LT: "lt", Cmp.EQ: "eq", Cmp.NEQ: "neq"}


def parse_instance(text: str, lang: ConstraintLanguage):
    """Parse a .dti document; returns (instance, language with implicit
    relations for any sugar literals appended)."""
    variables = None
    constraints = []
    implicit = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if variables is None:
            parts = line.split()
            if parts[0] != "var" or len(parts) < 2:
                raise ParseError("expected a 'var a b c' declaration", lineno)
            for v in parts[1:]:
                if not _IDENT_RE.match(v):
                    raise ParseError(f"bad variable name {v!r}", lineno)
            variables = tuple(parts[1:])
            continue
        m = _APPLY_RE.match(line)
        if m:
            name = m.group(1)
            args = tuple(a.strip() for a in m.group(2).split(",")) \
                if m.group(2).strip() else ()
            constraints.append((name, args))
            continue
        m = _SUGAR_RE.match(line)
        if m:
            lhs, cmp_text, rhs, sign, digits = m.groups()
            offset = int(digits) * (-1 if sign == "-" else 1) if digits else 0
            cmp = _CMP_FROM_TEXT[cmp_text]
            key = (cmp, offset)
            if key not in implicit:
                rel_name = f"_{_CMP_SLUG[cmp]}{offset:+d}"
                implicit[key] = RelationDef(
                    rel_name, 2, Formula(Literal(0, 1, cmp, offset)))
            constraints.append((implicit[key].name, (lhs, rhs)))
            continue
        raise ParseError(f"cannot parse constraint {line!r}", lineno)
    if variables is None:
        raise ParseError("instance file declares no variables")
    extended = lang.extended(implicit.values()) if implicit else lang
    inst = Instance(variables, tuple(constraints))
    validate_instance(extended, inst)
    return inst, extended


def write_instance(inst: Instance) -> str:
    lines = ["var " + " ".join(inst.variables)]
    lines.extend(f"{name}({', '.join(args)})" for name, args in inst.constraints)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Reports


def verdict_to_dict(verdict):
    return {
        "class": verdict.cls.value,
        "d": verdict.d,
        "certificate": [
            {
                "relation": w.relation,
                "op": {"kind": w.op.kind.value, "d": w.op.d},
                "first": list(w.first),
                "second": list(w.second),
                "image": list(w.image),
            }
            for w in verdict.witnesses
        ],
        "passing": list(verdict.passing),
        "notes": list(verdict.notes),
    }


def report_dict(status, method, verdict, assignment, stats):
    base = {"facts": 0, "revisions": 0, "branches": 0, "wall_ms": 0.0}
    base.update(stats or {})
    return {
        "status": status,
        "method": method,
        "verdict": verdict_to_dict(verdict) if verdict is not None else None,
        "assignment": dict(assignment) if assignment is not None else None,
        "stats": base,
    }


def _print_report(report, as_json):
    if as_json:
        print(json.dumps(report, sort_keys=True))
        return
    print(report["status"])
    print(f"method: {report['method']}")
    if report["verdict"] is not None:
        v = report["verdict"]
        d = f"({v['d']})" if v["d"] is not None and "MOD" in v["class"] else ""
        print(f"verdict: {v['class']}{d}")
    if report["assignment"]:
        for var in sorted(report["assignment"]):
            print(f"  {var} = {report['assignment'][var]}")


# ---------------------------------------------------------------------------
# Commands

_CLASSIFY_CACHE = {}


def _classify_cached(lang, text):
    key = hashlib.sha256(text.encode()).hexdigest()
    if key not in _CLASSIFY_CACHE:
        _CLASSIFY_CACHE[key] = classify(lang)
    return _CLASSIFY_CACHE[key]


def cmd_classify(args) -> int:
    try:
        text = open(args.language).read()
        lang = parse_language(text)
    except (OSError, DtcspError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    verdict = _classify_cached(lang, text)
    if args.json:
        print(json.dumps(verdict_to_dict(verdict), sort_keys=True))
    else:
        print(f"verdict: {verdict.describe()}")
        for note in verdict.notes:
            print(f"  - {note}")
        for line in verdict.passing:
            print(f"  + {line}")
        for w in verdict.witnesses:
            print(f"  ! {w.relation}: {w.op.describe()} maps {w.first} and "
                  f"{w.second} to {w.image}, which is outside the relation")
    if verdict.cls is VerdictClass.DEGENERATE_OR_UNKNOWN:
        return 3
    return 0


_AUTO_METHOD = {
    VerdictClass.HORN_TRACTABLE: "horn",
    VerdictClass.MAX_CLOSED: "ac",
    VerdictClass.MIN_CLOSED: "ac",
    VerdictClass.MODMAX_CLOSED: "modmax",
    VerdictClass.MODMIN_CLOSED: "modmax",
    VerdictClass.NP_HARD: "bt",
    VerdictClass.DEGENERATE_OR_UNKNOWN: "bt",
}


def _run_method(method, lang, inst, verdict, args, stats):
    window = range(0, args.window) if args.window else None
    if method == "horn":
        return solve_horn_csp(lang, inst, stats=stats)
    if method == "ac":
        mode = "min" if verdict.cls is VerdictClass.MIN_CLOSED else "max"
        return decide_max_closed(lang, inst, mode=mode, window=window,
                                 stats=stats)
    if method == "modmax":
        if verdict.cls in (VerdictClass.MODMAX_CLOSED, VerdictClass.MODMIN_CLOSED):
            d = verdict.d
            mode = "max" if verdict.cls is VerdictClass.MODMAX_CLOSED else "min"
        elif args.modulus:
            d, mode = args.modulus, "max"
        else:
            raise NotHornError(
                "", "the language is not modular-closed; pass --modulus to force")
        return solve_mod_max(lang, inst, d, mode=mode, stats=stats)
    if method == "bt":
        return backtracking_solve(lang, inst, window=window, stats=stats)
    if method == "brute":
        w = window if window is not None else bounded_window(lang, inst)
        return brute_solve(lang, inst, w, stats=stats)
    raise ValueError(f"unknown method {method!r}")


def cmd_solve(args) -> int:
    try:
        lang_text = open(args.language).read()
        lang = parse_language(lang_text)
        inst, lang = parse_instance(open(args.instance).read(), lang)
    except (OSError, DtcspError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    stats = {}
    start = time.perf_counter()
    try:
        verdict = _classify_cached(lang, lang_text + "\n::\n"
                                   + ",".join(r.name for r in lang.relations))
        method = args.method if args.method != "auto" else _AUTO_METHOD[verdict.cls]
        result = _run_method(method, lang, inst, verdict, args, stats)
    except NotHornError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    stats["wall_ms"] = round((time.perf_counter() - start) * 1000.0, 3)
    if args.seed is not None:
        stats["seed"] = args.seed
    if result.sat and not satisfies(lang, inst, result.assignment):
        print("error: solver returned an invalid witness", file=sys.stderr)
        return 3
    report = report_dict(result.status, method, verdict, result.assignment, stats)
    _print_report(report, args.json)
    return 0 if result.sat else 1


def cmd_gen(args) -> int:
    import pathlib
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rels = []
    if args.kind == "horn":
        for i in range(args.relations):
            rels.append(random_horn_relation(
                2 + (i % 2), args.q, seed=args.seed * 97 + i, name=f"R{i}"))
    else:
        for i in range(args.relations):
            dialect = "mixed" if args.kind == "mixed" else args.kind
            rels.append(random_relation(
                2 + (i % 2), args.q, seed=args.seed * 97 + i,
                dialect=dialect, name=f"R{i}"))
    lang = ConstraintLanguage(tuple(rels))
    inst = random_instance(lang, args.nvars, args.nconstraints,
                           seed=args.seed * 89 + 7)
    (out / "lang.dtl").write_text(write_language(lang))
    (out / "inst.dti").write_text(write_instance(inst))
    print(f"wrote {out / 'lang.dtl'} and {out / 'inst.dti'}")
    return 0


def cmd_check(args) -> int:
    try:
        lang = parse_language(open(args.language).read())
        inst, lang = parse_instance(open(args.instance).read(), lang)
    except (OSError, DtcspError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        assignment = json.loads(open(args.assignment).read())
        if (not isinstance(assignment, dict)
                or set(assignment) != set(inst.variables)
                or not all(isinstance(v, int) and not isinstance(v, bool)
                           for v in assignment.values())):
            raise ValueError("assignment must map every variable to an integer")
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if satisfies(lang, inst, assignment):
        print("valid")
        return 0
    print("invalid")
    return 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dtcsp",
        description="solve and classify CSPs over the integers with order "
                    "and successor")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify a .dtl language")
    p.add_argument("language")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("solve", help="solve a .dti instance over a .dtl language")
    p.add_argument("language")
    p.add_argument("instance")
    p.add_argument("--method", default="auto",
                   choices=["auto", "horn", "ac", "modmax", "bt", "brute"])
    p.add_argument("--window", type=int, default=None,
                   help="override the (q+1)n decision window size")
    p.add_argument("--modulus", type=int, default=None,
                   help="modulus when forcing --method modmax")
    p.add_argument("--json", action="store_true")
    p.add_argument("--seed", type=int, default=None,
                   help="recorded for reproducibility")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen", help="emit a seed-deterministic language/instance pair")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=".")
    p.add_argument("--kind", default="mixed",
                   choices=["mixed", "successor", "order", "horn"])
    p.add_argument("--relations", type=int, default=3)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--nvars", type=int, default=5)
    p.add_argument("--nconstraints", type=int, default=5)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("check", help="verify a claimed assignment")
    p.add_argument("language")
    p.add_argument("instance")
    p.add_argument("assignment", help="JSON file mapping variables to integers")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def main_entry():  # pragma: no cover - console script shim
    raise SystemExit(main())
