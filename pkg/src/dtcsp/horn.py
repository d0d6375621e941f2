"""Positive unit resolution for Horn instances over successor constraints.

Facts of the form ``value(x) = value(y) + p`` live in a union-find whose
edges carry integer offsets; asserting a fact either merges two components,
confirms a known offset, or reports a contradiction.  Unit resolution then
deletes clause literals that the fact store settles, and at a conflict-free
fixpoint a concrete solution is read off by spacing the components far enough
apart that the atom under every surviving negated equality comes out false.
"""

from __future__ import annotations

from dataclasses import dataclass

from .classify import is_horn
from .errors import InternalError, NotHornError
from .finite import Instance, SolveResult, satisfies
from .formula import Cmp, ConstraintLanguage

OK = "ok"
CONFLICT = "conflict"


class OffsetUnionFind:
    """Disjoint sets with integer offsets to the representative.

    ``find(v)`` returns ``(root, offset)`` with the contract that in every
    model of the asserted facts ``value(v) = value(root) + offset``.  Union
    is by rank with ties and equal ranks resolved toward the variable seen
    first, so runs are reproducible.  After the first contradiction the
    structure stays in the conflicted state.
    """

    def __init__(self, variables=()):
        self._parent = {}
        self._delta = {}
        self._rank = {}
        self._order = {}
        self.conflict = None
        for v in variables:
            self.add(v)

    def add(self, v):
        if v not in self._parent:
            self._parent[v] = v
            self._delta[v] = 0
            self._rank[v] = 0
            self._order[v] = len(self._order)

    def find(self, v):
        self.add(v)
        path = []
        node = v
        while self._parent[node] != node:
            path.append(node)
            node = self._parent[node]
        root = node
        # path compression, re-anchoring offsets at the root
        offset = 0
        for node in reversed(path):
            offset += self._delta[node]
            self._parent[node] = root
            self._delta[node] = offset
        total = 0
        node = v
        while self._parent[node] != node:
            total += self._delta[node]
            node = self._parent[node]
        return root, total

    def assert_fact(self, x, y, p) -> str:
        """Record ``value(x) = value(y) + p``; idempotent on repeats."""
        if self.conflict is not None:
            return CONFLICT
        rx, ox = self.find(x)
        ry, oy = self.find(y)
        if rx == ry:
            if ox - oy != p:
                self.conflict = (x, y, p, ox - oy)
                return CONFLICT
            return OK
        # value(rx) = value(ry) + shift
        shift = oy + p - ox
        if (self._rank[rx], -self._order[rx]) < (self._rank[ry], -self._order[ry]):
            self._parent[rx] = ry
            self._delta[rx] = shift
        else:
            self._parent[ry] = rx
            self._delta[ry] = -shift
            if self._rank[rx] == self._rank[ry]:
                self._rank[rx] += 1
        return OK

    def implied_offset(self, x, y):
        """value(x) - value(y) if x and y share a component, else None."""
        rx, ox = self.find(x)
        ry, oy = self.find(y)
        if rx != ry:
            return None
        return ox - oy

    def components(self, variables):
        """Component partition ordered by first-seen variable."""
        groups = {}
        order = []
        for v in variables:
            root, off = self.find(v)
            if root not in groups:
                groups[root] = []
                order.append(root)
            groups[root].append((v, off))
        return [groups[root] for root in order]


@dataclass(frozen=True)
class HornClause:
    """Disjunction of negated equalities plus at most one positive equality."""

    negatives: tuple  # of (x, y, p) standing for not(value(x) = value(y) + p)
    positive: tuple | None = None  # (x, y, p)
    origin: str = ""

    def __post_init__(self):
        object.__setattr__(self, "negatives", tuple(self.negatives))


def compile_horn_instance(lang: ConstraintLanguage,
                          inst: Instance) -> list:
    """Instantiate each constraint's reduced Horn CNF with its arguments.

    Literals whose two variables coincide are constants: a true literal
    discharges its clause, a false one is dropped.  Raises NotHornError when
    some applied relation has no Horn definition.
    """
    from .classify import reduced_cnf
    clauses = []
    for name, args in inst.constraints:
        rel = lang.relation(name)
        if not is_horn(rel):
            raise NotHornError(name)
        for clause in reduced_cnf(rel):
            negatives = []
            positive = None
            satisfied = False
            for lit in clause:
                x, y = args[lit.lhs], args[lit.rhs]
                if x == y:
                    truth = (lit.offset == 0) == (lit.cmp is Cmp.EQ)
                    if truth:
                        satisfied = True
                        break
                    continue
                if lit.cmp is Cmp.EQ:
                    positive = (x, y, lit.offset)
                else:
                    negatives.append((x, y, lit.offset))
            if not satisfied:
                clauses.append(HornClause(tuple(negatives), positive,
                                          origin=f"{name}({', '.join(args)})"))
    return clauses


def solve_horn(clauses, variables, stats=None) -> SolveResult:
    """Run positive unit resolution to a fixpoint.

    (a) assert every positive unit as a fact; a contradiction refutes the
    instance.  (b) for each remaining clause, delete a negated equality once
    the facts force its atom true, and delete the whole clause once the facts
    force some atom false (the negation holds).  A clause emptied of
    negatives re-enters (a) as a unit or, lacking a positive part, is the
    empty clause and refutes the instance.  At the fixpoint the instance is
    satisfiable and a witness is extracted.
    """
    stats = stats if stats is not None else {}
    uf = OffsetUnionFind(variables)
    pending = []
    active = []
    for cl in clauses:
        if not cl.negatives and cl.positive is None:
            return SolveResult("UNSAT",
                               reason=f"empty clause from {cl.origin or 'input'}",
                               stats=stats)
        if not cl.negatives:
            pending.append(cl)
        else:
            active.append([list(cl.negatives), cl.positive, cl.origin])

    def push(x, y, p, origin):
        stats["facts"] = stats.get("facts", 0) + 1
        if uf.assert_fact(x, y, p) == CONFLICT:
            known = uf.conflict[3] if uf.conflict and len(uf.conflict) == 4 else None
            return SolveResult(
                "UNSAT",
                reason=(f"{origin or 'fact'} needs {x} = {y} + {p} but the "
                        f"facts imply offset {known}"),
                stats=stats)
        return None

    for cl in pending:
        x, y, p = cl.positive
        failed = push(x, y, p, cl.origin)
        if failed is not None:
            return failed

    changed = True
    while changed:
        changed = False
        remaining = []
        for negatives, positive, origin in active:
            satisfied = False
            kept = []
            for x, y, p in negatives:
                io = uf.implied_offset(x, y)
                if io is None:
                    kept.append((x, y, p))
                elif io == p:
                    changed = True  # atom forced true: literal gone
                elif io != p:
                    satisfied = True  # atom forced false: clause holds
                    changed = True
                    break
            if satisfied:
                continue
            if kept:
                remaining.append([kept, positive, origin])
                continue
            changed = True
            if positive is None:
                return SolveResult("UNSAT",
                                   reason=f"empty clause from {origin}",
                                   stats=stats)
            failed = push(*positive, origin)
            if failed is not None:
                return failed
        active = remaining

    residual = [HornClause(tuple(neg), pos, origin)
                for neg, pos, origin in active]
    q_inst = max(
        [abs(p) for cl in clauses for (_, _, p) in cl.negatives]
        + [abs(cl.positive[2]) for cl in clauses if cl.positive] + [1])
    assignment = extract_assignment(uf, residual, variables, q_inst)
    return SolveResult("SAT", assignment, stats=stats)


def extract_assignment(uf: OffsetUnionFind, residual, variables,
                       q_inst=1) -> dict:
    """Concrete solution from the fact store.

    Components are laid out in first-seen order at bases 0, D, 2D, ... with
    ``D = 2 * q_inst * nvars + 1``; members sit at base + offset.  Offsets
    inside a component never exceed ``q_inst * (nvars - 1)`` in magnitude, so
    values in different components stay more than ``q_inst`` apart and every
    surviving negated equality (whose endpoints always straddle components at
    the fixpoint) comes out true.
    """
    spacing = 2 * max(1, q_inst) * len(set(variables)) + 1
    assignment = {}
    for k, members in enumerate(uf.components(variables)):
        base = k * spacing
        for v, off in members:
            assignment[v] = base + off
    for cl in residual:
        ok = any(assignment[x] != assignment[y] + p
                 for x, y, p in cl.negatives)
        if not ok and cl.positive is not None:
            x, y, p = cl.positive
            ok = assignment[x] == assignment[y] + p
        if not ok:
            raise InternalError(f"extracted assignment misses clause "
                                f"from {cl.origin or 'input'}")
    return assignment


def solve_horn_csp(lang: ConstraintLanguage, inst: Instance,
                   stats=None) -> SolveResult:
    """Compile, solve, and re-verify a Horn-classified instance."""
    stats = stats if stats is not None else {}
    clauses = compile_horn_instance(lang, inst)
    result = solve_horn(clauses, inst.variables, stats=stats)
    if result.sat and not satisfies(lang, inst, result.assignment):
        raise InternalError("unit resolution witness failed re-verification")
    return result
