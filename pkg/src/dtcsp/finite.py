"""Finite-window decision procedures.

An instance over a language with qe-degree q and n variables is satisfiable
over the integers iff it is satisfiable over ``{0, ..., (q + 1) * n - 1}``, so
every solver here works on such a window: generalized arc-consistency for
max- or min-closed languages, complete backtracking as the universal fallback,
and a residue/quotient pipeline for languages preserved by a modular maximum
or minimum.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import grids
from .errors import ArityError, BudgetExceeded, InternalError, ParseError
from .formula import And, Cmp, ConstraintLanguage, Formula, Literal, Not, Or, RelationDef

DEFAULT_BRANCH_BUDGET = 10**6


@dataclass(frozen=True)
class Instance:
    """Variables plus relation applications; the CSP input."""

    variables: tuple
    constraints: tuple  # of (relation name, tuple of variable names)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(
            self, "constraints",
            tuple((name, tuple(args)) for name, args in self.constraints))


def validate_instance(lang: ConstraintLanguage, inst: Instance):
    declared = set(inst.variables)
    if len(declared) != len(inst.variables):
        raise ParseError("duplicate variable declaration")
    for name, args in inst.constraints:
        try:
            rel = lang.relation(name)
        except KeyError:
            raise ParseError(f"unknown relation {name!r}") from None
        if len(args) != rel.arity:
            raise ArityError(
                f"{name} expects {rel.arity} arguments, got {len(args)}")
        for a in args:
            if a not in declared:
                raise ParseError(f"undeclared variable {a!r}")


@dataclass
class DomainStore:
    """Per-variable sorted candidate values."""

    domains: dict

    @classmethod
    def from_window(cls, inst: Instance, window):
        vals = sorted(window)
        return cls({v: list(vals) for v in inst.variables})

    def copy(self):
        return DomainStore({v: list(d) for v, d in self.domains.items()})

    def is_empty(self):
        return any(not d for d in self.domains.values())


@dataclass
class SolveResult:
    status: str  # "SAT" | "UNSAT"
    assignment: dict | None = None
    reason: str | None = None
    fallback: bool = False
    stats: dict = field(default_factory=dict)

    @property
    def sat(self):
        return self.status == "SAT"


def satisfies(lang: ConstraintLanguage, inst: Instance, assignment) -> bool:
    """Check a full assignment against every constraint of the instance."""
    for name, args in inst.constraints:
        rel = lang.relation(name)
        values = tuple(assignment[a] for a in args)
        if not rel.formula.evaluate(values):
            return False
    return True


def bounded_window(lang: ConstraintLanguage, inst: Instance) -> range:
    """The complete decision window {0, ..., (q + 1) * n - 1}."""
    return range(0, (lang.q + 1) * len(inst.variables))


# ---------------------------------------------------------------------------
# Arc-consistency

def _window_tuples(rel: RelationDef, lo, hi):
    """All tuples of the relation inside [lo, hi)^arity, lexicographic."""
    grid = grids.grid_eval(rel.formula, rel.arity, lo, hi)
    return [tuple(int(x) + lo for x in row) for row in np.argwhere(grid)]


class _ConstraintTuples:
    """Per-constraint tuple table, shared across AC runs on one instance."""

    def __init__(self, lang, inst, lo, hi):
        self.entries = []
        cache = {}
        for name, args in inst.constraints:
            rel = lang.relation(name)
            key = (name, lo, hi)
            if key not in cache:
                cache[key] = _window_tuples(rel, lo, hi)
            tuples = cache[key]
            # positions of each variable inside the argument list
            positions = {}
            for pos, v in enumerate(args):
                positions.setdefault(v, []).append(pos)
            # repeated arguments must agree
            if any(len(ps) > 1 for ps in positions.values()):
                tuples = [t for t in tuples
                          if all(len({t[p] for p in ps}) == 1
                                 for ps in positions.values())]
            self.entries.append((args, positions, tuples))


def arc_consistency(lang, inst, domains: DomainStore, stats=None,
                    tables=None) -> DomainStore | None:
    """Generalized arc-consistency fixpoint, or None when a domain empties.

    The queue starts with all constraints in declaration order; a constraint
    re-enters when one of its variables loses a value.  Within a constraint,
    variables are revised in argument order.
    """
    if tables is None:
        lo, hi = _domains_span(domains)
        tables = _ConstraintTuples(lang, inst, lo, hi)
    store = domains.copy()
    doms = {v: set(d) for v, d in store.domains.items()}
    m = len(inst.constraints)
    queue = deque(range(m))
    queued = set(queue)
    watchers = {}
    for ci, (args, _, _) in enumerate(tables.entries):
        for v in args:
            watchers.setdefault(v, []).append(ci)
    while queue:
        ci = queue.popleft()
        queued.discard(ci)
        args, positions, tuples = tables.entries[ci]
        live = [t for t in tuples
                if all(t[p] in doms[v] for v, ps in positions.items() for p in ps)]
        for v in sorted(positions, key=lambda v: positions[v][0]):
            pos = positions[v][0]
            supported = {t[pos] for t in live}
            dom = doms[v]
            if not dom <= supported:
                removed = dom - supported
                dom &= supported
                if stats is not None:
                    stats["revisions"] = stats.get("revisions", 0) + len(removed)
                if not dom:
                    return None
                for cj in watchers.get(v, ()):
                    if cj not in queued:
                        queue.append(cj)
                        queued.add(cj)
                live = [t for t in live if t[pos] in dom]
    return DomainStore({v: sorted(doms[v]) for v in store.domains})


def _domains_span(domains: DomainStore):
    lo = min((d[0] for d in domains.domains.values() if d), default=0)
    hi = max((d[-1] for d in domains.domains.values() if d), default=0) + 1
    return lo, hi


# ---------------------------------------------------------------------------
# Max-closed decision

def decide_max_closed(lang, inst, mode="max", window=None,
                      stats=None) -> SolveResult:
    """Decide via AC over the bounded window; extremal assignment on success.

    For a max-closed language the arc-consistent domains are nonempty exactly
    when the instance is satisfiable, and picking each variable's maximum
    (minimum for min-closed) yields a solution.  The assignment is always
    re-verified; if verification fails the complete backtracking solver takes
    over and the result is flagged as a fallback.
    """
    stats = stats if stats is not None else {}
    if not inst.variables:
        return SolveResult("SAT", {}, stats=stats)
    window = bounded_window(lang, inst) if window is None else window
    store = DomainStore.from_window(inst, window)
    fixed = arc_consistency(lang, inst, store, stats=stats)
    if fixed is None:
        return SolveResult("UNSAT", reason="arc-consistency wipeout", stats=stats)
    pick = max if mode == "max" else min
    assignment = {v: pick(d) for v, d in fixed.domains.items()}
    if satisfies(lang, inst, assignment):
        return SolveResult("SAT", assignment, stats=stats)
    result = backtracking_solve(lang, inst, domains=fixed, stats=stats)
    result.fallback = True
    return result


# ---------------------------------------------------------------------------
# Complete backtracking search

def backtracking_solve(lang, inst, domains: DomainStore | None = None,
                       window=None, stats=None) -> SolveResult:
    """Complete search over the window with AC propagation at every node.

    Variables follow declaration order, values ascending, so the first
    solution found is the lexicographically smallest one on the window.
    """
    stats = stats if stats is not None else {}
    if not inst.variables:
        return SolveResult("SAT", {}, stats=stats)
    if domains is None:
        window = bounded_window(lang, inst) if window is None else window
        domains = DomainStore.from_window(inst, window)
    lo, hi = _domains_span(domains)
    tables = _ConstraintTuples(lang, inst, lo, hi)
    root = arc_consistency(lang, inst, domains, stats=stats, tables=tables)
    if root is None:
        return SolveResult("UNSAT", stats=stats)
    order = list(inst.variables)

    def search(store, depth):
        stats["branches"] = stats.get("branches", 0) + 1
        if depth == len(order):
            return {v: store.domains[v][0] for v in order}
        var = order[depth]
        for val in list(store.domains[var]):
            child = store.copy()
            child.domains[var] = [val]
            fixed = arc_consistency(lang, inst, child, stats=stats, tables=tables)
            if fixed is None:
                continue
            found = search(fixed, depth + 1)
            if found is not None:
                return found
        return None

    found = search(root, 0)
    if found is None:
        return SolveResult("UNSAT", stats=stats)
    if not satisfies(lang, inst, found):
        raise InternalError("backtracking produced a non-solution")
    return SolveResult("SAT", found, stats=stats)


# ---------------------------------------------------------------------------
# Modular max/min pipeline

def _residue_patterns(rel: RelationDef, d):
    """Residue tuples r such that some relation tuple is componentwise = r mod d."""
    k = rel.arity
    q = rel.formula.qe_degree
    span = (k - 1) * (q + d) + d
    grid = grids.grid_eval(rel.formula, k, 0, span)
    out = set()
    for pattern in itertools.product(range(d), repeat=k):
        sub = grid[tuple(slice(p, None, d) for p in pattern)]
        if sub.any():
            out.add(pattern)
    return out


def _quotient_literal(lit: Literal, r_lhs, r_rhs, d):
    """Rewrite a literal under x = d*x' + r(x); None means constant."""
    if lit.cmp in (Cmp.LEQ, Cmp.LT):
        c = lit.offset if lit.cmp is Cmp.LEQ else lit.offset - 1
        shifted = c + r_rhs - r_lhs
        return Literal(lit.lhs, lit.rhs, Cmp.LEQ, shifted // d)
    shifted = lit.offset + r_rhs - r_lhs
    if shifted % d != 0:
        # the congruence is impossible: EQ is constant false, NEQ constant true
        if lit.cmp is Cmp.EQ:
            return Literal(lit.lhs, lit.lhs, Cmp.LT, 0)
        return Literal(lit.lhs, lit.lhs, Cmp.LEQ, 0)
    return Literal(lit.lhs, lit.rhs, lit.cmp, shifted // d)


def _quotient_node(node, residues, d):
    if isinstance(node, Literal):
        return _quotient_literal(node, residues[node.lhs], residues[node.rhs], d)
    if isinstance(node, Not):
        return Not(_quotient_node(node.part, residues, d))
    if isinstance(node, And):
        return And(tuple(_quotient_node(p, residues, d) for p in node.parts))
    return Or(tuple(_quotient_node(p, residues, d) for p in node.parts))


def _residue_solutions(inst, constraint_patterns, d, budget, stats):
    """Deterministic backtracking over residue assignments in (Z/dZ)^n."""
    order = list(inst.variables)
    index = {v: i for i, v in enumerate(order)}
    checks = []
    for (name, args), patterns in zip(inst.constraints, constraint_patterns):
        depth = max(index[a] for a in args)
        checks.append((depth, args, patterns))
    by_depth = {}
    for depth, args, patterns in checks:
        by_depth.setdefault(depth, []).append((args, patterns))

    assignment = {}

    def rec(depth):
        if depth == len(order):
            yield dict(assignment)
            return
        var = order[depth]
        for r in range(d):
            stats["branches"] = stats.get("branches", 0) + 1
            if stats["branches"] > budget:
                raise BudgetExceeded(
                    f"residue search exceeded {budget} branches")
            assignment[var] = r
            ok = all(tuple(assignment[a] for a in args) in patterns
                     for args, patterns in by_depth.get(depth, ()))
            if ok:
                yield from rec(depth + 1)
        del assignment[var]

    yield from rec(0)


def solve_mod_max(lang, inst, d, mode="max",
                  branch_budget=DEFAULT_BRANCH_BUDGET,
                  stats=None) -> SolveResult:
    """Two-phase decision for languages preserved by a d-modular max or min.

    Phase one enumerates residue assignments modulo d that every constraint
    supports.  Phase two substitutes ``v = d * v' + residue(v)`` into each
    constraint formula (offsets floor-divide; equalities require
    divisibility), producing a quotient instance handled by the max-closed
    decision procedure.  Any satisfiable branch reconstructs and re-verifies a
    witness; if all branches fail the instance is unsatisfiable.
    """
    stats = stats if stats is not None else {}
    if d < 1:
        raise ValueError("modulus must be positive")
    if not inst.variables:
        return SolveResult("SAT", {}, stats=stats)
    pattern_cache = {}
    constraint_patterns = []
    for name, args in inst.constraints:
        rel = lang.relation(name)
        if name not in pattern_cache:
            pattern_cache[name] = _residue_patterns(rel, d)
        constraint_patterns.append(pattern_cache[name])

    quotient_rel_cache = {}
    for rho in _residue_solutions(inst, constraint_patterns, d,
                                  branch_budget, stats):
        qrels = []
        qconstraints = []
        for ci, (name, args) in enumerate(inst.constraints):
            rel = lang.relation(name)
            residues = tuple(rho[a] for a in args)
            key = (name, residues)
            if key not in quotient_rel_cache:
                qroot = _quotient_node(rel.formula.root, residues, d)
                qname = f"{name}~{'_'.join(map(str, residues))}"
                quotient_rel_cache[key] = RelationDef(qname, rel.arity,
                                                      Formula(qroot))
            qrel = quotient_rel_cache[key]
            if all(r.name != qrel.name for r in qrels):
                qrels.append(qrel)
            qconstraints.append((qrel.name, args))
        qlang = ConstraintLanguage(tuple(qrels))
        qinst = Instance(inst.variables, tuple(qconstraints))
        sub = decide_max_closed(qlang, qinst, mode=mode, stats=stats)
        if sub.sat:
            assignment = {v: d * sub.assignment[v] + rho[v]
                          for v in inst.variables}
            if not satisfies(lang, inst, assignment):
                raise InternalError("modular pipeline witness failed")
            return SolveResult("SAT", assignment, fallback=sub.fallback,
                               stats=stats)
    return SolveResult("UNSAT", stats=stats)
