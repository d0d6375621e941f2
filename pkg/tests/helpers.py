"""Shared corpus builders and naive reference implementations for tests."""

import itertools
import random

from dtcsp import (
    And,
    Cmp,
    ConstraintLanguage,
    Formula,
    Instance,
    Literal,
    Not,
    Or,
    RelationDef,
    random_horn_relation,
    random_instance,
    random_relation,
)

# Largest n per qe-degree keeping the brute windows enumerable in tests.
BRUTE_LEAF_CAP = 4 * 10**6


def max_vars_for(q, nmax, doubled=False):
    factor = 2 * (q + 1) if doubled else (q + 1)
    n = 1
    for cand in range(2, nmax + 1):
        if (factor * cand) ** cand <= BRUTE_LEAF_CAP:
            n = cand
    return max(n, 1)


def random_mixed_language(seed, nrels=3, arity_max=3, q_max=3):
    rng = random.Random(seed)
    rels = []
    for i in range(nrels):
        arity = rng.randint(2, arity_max)
        q = rng.randint(0, q_max)
        rels.append(random_relation(arity, q, seed * 1000 + i,
                                    dialect="mixed", name=f"R{i}"))
    return ConstraintLanguage(tuple(rels))


def random_horn_language(seed, nrels=3, arity_max=3, q_max=3):
    rng = random.Random(seed)
    rels = []
    for i in range(nrels):
        arity = rng.randint(2, arity_max)
        q = rng.randint(0, q_max)
        rels.append(random_horn_relation(arity, q, seed * 1000 + i,
                                         name=f"H{i}"))
    return ConstraintLanguage(tuple(rels))


def leq(i, j, c=0):
    return Literal(i, j, Cmp.LEQ, c)


def eq(i, j, c=0):
    return Literal(i, j, Cmp.EQ, c)


def max_closed_language(seed, nrels=3, off_max=3):
    """Difference bounds and z <= max(x,y)+p relations; all max-closed."""
    rng = random.Random(seed)
    rels = []
    for i in range(nrels):
        kind = rng.randrange(3)
        c = rng.randint(-off_max, off_max)
        if kind == 0:
            root = leq(0, 1, c)
            rels.append(RelationDef(f"M{i}", 2, Formula(root)))
        elif kind == 1:
            root = And((leq(0, 1, abs(c)), leq(1, 0, rng.randint(0, off_max))))
            rels.append(RelationDef(f"M{i}", 2, Formula(root)))
        else:
            p = rng.randint(0, off_max)
            root = Or((leq(2, 0, p), leq(2, 1, p)))
            rels.append(RelationDef(f"M{i}", 3, Formula(root)))
    return ConstraintLanguage(tuple(rels))


def progression_formula(a, b, d):
    lits = tuple(Literal(1, 0, Cmp.EQ, c) for c in range(a, b + 1, d))
    return Formula(Or(lits))


def t_relation_formula(d):
    return Formula(Or((
        And((eq(0, 2, d), eq(1, 2, 0))),
        And((eq(0, 2, d), eq(1, 2, d))),
        And((eq(0, 2, 0), eq(1, 2, d))),
    )))


def modular_language(seed, d, nrels=3):
    """Positive successor relations preserved by the d-modular max but not by
    any smaller modulus: step-d progressions plus the witness triple."""
    rng = random.Random(seed)
    rels = [RelationDef("P0", 2, progression_formula(-d, d, d))]
    for i in range(1, nrels):
        if rng.random() < 0.4:
            rels.append(RelationDef(f"P{i}", 3, t_relation_formula(d)))
        else:
            steps = rng.randint(1, 2)
            start = -d * rng.randint(0, 2)
            rels.append(RelationDef(
                f"P{i}", 2, progression_formula(start, start + steps * d, d)))
    return ConstraintLanguage(tuple(rels))


def capped_instance(lang, seed, nmax, doubled=False, cmax=8):
    rng = random.Random(seed)
    n = rng.randint(2, max(2, max_vars_for(lang.q, nmax, doubled=doubled)))
    m = rng.randint(1, cmax)
    return random_instance(lang, n, m, seed * 7 + 3)


class NaiveOffsetGraph:
    """Reference for the offset union-find: BFS over the raw fact graph."""

    def __init__(self):
        self.edges = {}
        self.conflict = False

    def assert_fact(self, x, y, p):
        if self.conflict:
            return "conflict"
        io = self.implied_offset(x, y)
        if io is not None and io != p:
            self.conflict = True
            return "conflict"
        self.edges.setdefault(x, []).append((y, p))
        self.edges.setdefault(y, []).append((x, -p))
        return "ok"

    def implied_offset(self, x, y):
        if x == y:
            return 0
        seen = {x: 0}
        frontier = [x]
        while frontier:
            node = frontier.pop()
            for nxt, w in self.edges.get(node, ()):
                if nxt not in seen:
                    seen[nxt] = seen[node] + w
                    frontier.append(nxt)
        return seen.get(y)


def equivalent_rewrites(formula):
    """Five semantics-preserving rewrites of a formula tree."""
    r = formula.root
    return [
        Formula(Not(Not(r))),
        Formula(And((r, r))),
        Formula(Or((r, r))),
        Formula(And((r, Or((r, r))))),
        Formula(Not(Not(Not(Not(r))))),
    ]
