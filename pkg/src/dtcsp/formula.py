"""Quantifier-free formulas over integer difference literals.

A literal compares two variables up to an integer offset:
``x <= y + c``, ``x < y + c``, ``x = y + c`` or ``x != y + c``.
Formulas are trees of AND / OR / NOT nodes over such literals; relations and
whole constraint languages are built on top of them.  Equivalence of two
formulas is decidable by enumerating assignments over a bounded window
``{0, ..., (q + 1) * nvars - 1}`` where ``q`` is the largest absolute offset:
any separating assignment can be gap-compressed into that window because
literal truth only depends on variable differences clipped at magnitude q.
"""

from __future__ import annotations

import itertools
import re
import threading
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from enum import Enum

from .errors import (
    ArityError,
    BudgetExceeded,
    DuplicateNameError,
    MissingVariableError,
    ParseError,
    SizeLimitExceeded,
)

DEFAULT_CLAUSE_BUDGET = 10**6
DEFAULT_ENUM_BUDGET = 10**8


class Cmp(Enum):
    LEQ = "<="
    LT = "<"
    EQ = "="
    NEQ = "!="


_PY_OP = {Cmp.LEQ: "<=", Cmp.LT: "<", Cmp.EQ: "==", Cmp.NEQ: "!="}


@dataclass(frozen=True)
class Literal:
    """``value(lhs) cmp value(rhs) + offset``; lhs == rhs is legal (constant)."""

    lhs: int
    rhs: int
    cmp: Cmp
    offset: int = 0

    def holds(self, get) -> bool:
        a = get(self.lhs)
        b = get(self.rhs) + self.offset
        if self.cmp is Cmp.LEQ:
            return a <= b
        if self.cmp is Cmp.LT:
            return a < b
        if self.cmp is Cmp.EQ:
            return a == b
        return a != b

    def negated(self) -> "Literal":
        if self.cmp is Cmp.EQ:
            return Literal(self.lhs, self.rhs, Cmp.NEQ, self.offset)
        if self.cmp is Cmp.NEQ:
            return Literal(self.lhs, self.rhs, Cmp.EQ, self.offset)
        if self.cmp is Cmp.LEQ:
            # not(a <= b + c)  <=>  b < a - c
            return Literal(self.rhs, self.lhs, Cmp.LT, -self.offset)
        # not(a < b + c)  <=>  b <= a - c
        return Literal(self.rhs, self.lhs, Cmp.LEQ, -self.offset)

    def text(self) -> str:
        off = ""
        if self.offset > 0:
            off = f" + {self.offset}"
        elif self.offset < 0:
            off = f" - {-self.offset}"
        return f"x{self.lhs + 1} {self.cmp.value} x{self.rhs + 1}{off}"


@dataclass(frozen=True)
class And:
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))


@dataclass(frozen=True)
class Or:
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))


@dataclass(frozen=True)
class Not:
    part: object


def _walk_literals(node):
    if isinstance(node, Literal):
        yield node
    elif isinstance(node, Not):
        yield from _walk_literals(node.part)
    else:
        for p in node.parts:
            yield from _walk_literals(p)


def _eval_node(node, get) -> bool:
    if isinstance(node, Literal):
        return node.holds(get)
    if isinstance(node, And):
        return all(_eval_node(p, get) for p in node.parts)
    if isinstance(node, Or):
        return any(_eval_node(p, get) for p in node.parts)
    return not _eval_node(node.part, get)


def _codegen(node) -> str:
    if isinstance(node, Literal):
        return f"(v[{node.lhs}] {_PY_OP[node.cmp]} v[{node.rhs}] + {node.offset})"
    if isinstance(node, And):
        if not node.parts:
            return "True"
        return "(" + " and ".join(_codegen(p) for p in node.parts) + ")"
    if isinstance(node, Or):
        if not node.parts:
            return "False"
        return "(" + " or ".join(_codegen(p) for p in node.parts) + ")"
    return f"(not {_codegen(node.part)})"


def remap_variables(node, mapping):
    """Copy of a node tree with every literal's variable indices remapped."""
    if isinstance(node, Literal):
        return Literal(mapping[node.lhs], mapping[node.rhs], node.cmp,
                       node.offset)
    if isinstance(node, Not):
        return Not(remap_variables(node.part, mapping))
    if isinstance(node, And):
        return And(tuple(remap_variables(p, mapping) for p in node.parts))
    return Or(tuple(remap_variables(p, mapping) for p in node.parts))


def compile_applied(pairs):
    """One fast predicate for several (formula, argument indices) checks.

    The returned callable takes the full value vector of an instance and
    evaluates the conjunction of all applied formulas with their argument
    positions substituted in.
    """
    if not pairs:
        return None
    exprs = [_codegen(remap_variables(f.root, dict(enumerate(idx))))
             for f, idx in pairs]
    return eval("lambda v: " + " and ".join(exprs), {"__builtins__": {}})


def _format_node(node) -> str:
    if isinstance(node, Literal):
        return node.text()
    if isinstance(node, Not):
        inner = _format_node(node.part)
        if isinstance(node.part, Literal):
            return f"!({inner})"
        return f"!{inner}" if inner.startswith("(") else f"!({inner})"
    if isinstance(node, And):
        if not node.parts:
            return "(x1 <= x1)"
        return "(" + " & ".join(_format_node(p) for p in node.parts) + ")"
    if not node.parts:
        return "(x1 < x1)"
    return "(" + " | ".join(_format_node(p) for p in node.parts) + ")"


class Formula:
    """Immutable formula tree with lazily cached normal-form views.

    ``view`` is None, "cnf" or "dnf"; when set, ``clauses`` holds the matching
    clause lists (clause = tuple of literals).  Caches are filled at most once
    under a lock, so shared formulas are safe to use from multiple threads.
    """

    __slots__ = ("root", "view", "clauses", "_lock", "_vars", "_q", "_fn",
                 "_cnf", "_dnf", "_hash")

    def __init__(self, root, view=None, clauses=None):
        self.root = root
        self.view = view
        self.clauses = None if clauses is None else tuple(tuple(c) for c in clauses)
        self._lock = threading.Lock()
        self._vars = None
        self._q = None
        self._fn = None
        self._cnf = None
        self._dnf = None
        self._hash = None

    def variables(self) -> tuple:
        if self._vars is None:
            self._vars = tuple(sorted({i for lit in _walk_literals(self.root)
                                       for i in (lit.lhs, lit.rhs)}))
        return self._vars

    @property
    def nvars(self) -> int:
        vs = self.variables()
        return (max(vs) + 1) if vs else 0

    @property
    def qe_degree(self) -> int:
        if self._q is None:
            self._q = max((abs(l.offset) for l in _walk_literals(self.root)), default=0)
        return self._q

    def evaluate(self, assignment) -> bool:
        get = _accessor(assignment, self.variables())
        return _eval_node(self.root, get)

    def compiled(self):
        """Fast evaluator ``f(values) -> bool``; values indexed by variable."""
        if self._fn is None:
            with self._lock:
                if self._fn is None:
                    self._fn = eval("lambda v: " + _codegen(self.root),
                                    {"__builtins__": {}})
        return self._fn

    def cnf(self, budget=DEFAULT_CLAUSE_BUDGET):
        if self._cnf is None:
            with self._lock:
                if self._cnf is None:
                    self._cnf = _normal_form(self.root, "cnf", budget)
        return self._cnf

    def dnf(self, budget=DEFAULT_CLAUSE_BUDGET):
        if self._dnf is None:
            with self._lock:
                if self._dnf is None:
                    self._dnf = _normal_form(self.root, "dnf", budget)
        return self._dnf

    def __eq__(self, other):
        return isinstance(other, Formula) and self.root == other.root

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.root)
        return self._hash

    def __repr__(self):
        return f"Formula({_format_node(self.root)})"


def _accessor(assignment, needed):
    if isinstance(assignment, Mapping):
        for i in needed:
            if i not in assignment:
                raise MissingVariableError(f"no value for variable index {i}")
        return assignment.__getitem__
    if isinstance(assignment, Sequence):
        if needed and max(needed) >= len(assignment):
            raise MissingVariableError(
                f"assignment of length {len(assignment)} misses index {max(needed)}")
        return assignment.__getitem__
    raise TypeError("assignment must be a sequence or mapping")


def evaluate(f: Formula, assignment) -> bool:
    """Truth of ``f`` under a total assignment (sequence or map by index)."""
    return f.evaluate(assignment)


# ---------------------------------------------------------------------------
# Normal forms


def _nnf(node, neg=False):
    if isinstance(node, Literal):
        return node.negated() if neg else node
    if isinstance(node, Not):
        return _nnf(node.part, not neg)
    if isinstance(node, And):
        parts = tuple(_nnf(p, neg) for p in node.parts)
        return Or(parts) if neg else And(parts)
    parts = tuple(_nnf(p, neg) for p in node.parts)
    return And(parts) if neg else Or(parts)


def _normal_form(root, view, budget):
    """Clause lists for the CNF or DNF of ``root``; purely mechanical."""
    outer = And if view == "cnf" else Or

    def rec(node):
        if isinstance(node, Literal):
            return [[node]]
        if isinstance(node, outer):
            out = []
            for p in node.parts:
                out.extend(rec(p))
            return out
        # the dual connective distributes: cross-merge child clause lists
        acc = [[]]
        for p in node.parts:
            sub = rec(p)
            merged = []
            total = 0
            for a in acc:
                for b in sub:
                    c = a + [l for l in b if l not in a]
                    total += len(c)
                    if total > budget:
                        raise SizeLimitExceeded(
                            f"{view} expansion exceeds {budget} literals")
                    merged.append(c)
            acc = merged
        return acc

    clauses = rec(_nnf(root))
    seen = set()
    out = []
    for c in clauses:
        key = tuple(c)
        if key not in seen:
            seen.add(key)
            out.append(tuple(c))
    if sum(len(c) for c in out) > budget:
        raise SizeLimitExceeded(f"{view} expansion exceeds {budget} literals")
    return tuple(out)


def formula_from_clauses(view, clauses) -> Formula:
    clauses = tuple(tuple(c) for c in clauses)
    if view == "cnf":
        root = And(tuple(Or(c) for c in clauses))
    elif view == "dnf":
        root = Or(tuple(And(c) for c in clauses))
    else:
        raise ValueError("view must be 'cnf' or 'dnf'")
    return Formula(root, view=view, clauses=clauses)


def to_cnf(f: Formula, budget=DEFAULT_CLAUSE_BUDGET) -> Formula:
    """Equivalent formula in conjunctive normal form (NOT pushed to literals)."""
    return formula_from_clauses("cnf", f.cnf(budget))


def to_dnf(f: Formula, budget=DEFAULT_CLAUSE_BUDGET) -> Formula:
    """Equivalent formula in disjunctive normal form."""
    return formula_from_clauses("dnf", f.dnf(budget))


# ---------------------------------------------------------------------------
# Equivalence and reduction


def equivalent(f: Formula, g: Formula, nvars: int,
               budget=DEFAULT_ENUM_BUDGET) -> bool:
    """True iff f and g agree on every integer assignment.

    Decided exhaustively over ``{0, ..., (q + 1) * nvars - 1}`` with
    q = max qe-degree of the two formulas; a separating assignment, if any,
    gap-compresses into that window.
    """
    for h in (f, g):
        vs = h.variables()
        if vs and max(vs) >= nvars:
            raise MissingVariableError(
                f"formula uses x{max(vs) + 1} but nvars={nvars}")
    q = max(f.qe_degree, g.qe_degree)
    size = max(1, (q + 1) * nvars)
    if nvars > 0 and size**nvars > budget:
        raise BudgetExceeded(f"{size}^{nvars} assignments exceed budget {budget}")
    ff = f.compiled()
    gg = g.compiled()
    for point in itertools.product(range(size), repeat=nvars):
        if ff(point) != gg(point):
            return False
    return True


def _clause_truth_bits(view, points):
    """Evaluator for clause sets: truth on each point packed into one int."""
    lit_bits = {}

    def bits_of(lit):
        b = lit_bits.get(lit)
        if b is None:
            b = 0
            for idx, pt in enumerate(points):
                if lit.holds(pt.__getitem__):
                    b |= 1 << idx
            lit_bits[lit] = b
        return b

    full = (1 << len(points)) - 1

    def truth(cls):
        if view == "cnf":
            acc = full
            for c in cls:
                cb = 0
                for lit in c:
                    cb |= bits_of(lit)
                acc &= cb
            return acc
        acc = 0
        for c in cls:
            cb = full
            for lit in c:
                cb &= bits_of(lit)
            acc |= cb
        return acc

    return truth


def reduce(f: Formula, budget=DEFAULT_ENUM_BUDGET) -> Formula:
    """Delete clauses, then literals, while equivalence holds.

    Requires a populated CNF or DNF view.  Scans clauses in order and literals
    in order, restarting after every successful deletion, and repeats both
    passes until neither finds anything; the result admits no further single
    deletion.  Deterministic for reproducibility.
    """
    if f.view not in ("cnf", "dnf"):
        raise ValueError("reduce needs a formula with a CNF or DNF view")
    view = f.view
    nv = max(1, f.nvars)
    q = f.qe_degree
    size = max(1, (q + 1) * nv)
    if size**nv > budget:
        raise BudgetExceeded(f"{size}^{nv} assignments exceed budget {budget}")
    points = list(itertools.product(range(size), repeat=nv))
    truth = _clause_truth_bits(view, points)

    clauses = [list(c) for c in f.clauses]
    target = truth(clauses)

    changed = True
    while changed:
        changed = False
        # clause pass
        i = 0
        while i < len(clauses):
            cand = clauses[:i] + clauses[i + 1:]
            if truth(cand) == target:
                clauses = cand
                changed = True
                i = 0
            else:
                i += 1
        # literal pass
        i = 0
        while i < len(clauses):
            j = 0
            restarted = False
            while j < len(clauses[i]):
                cand = [list(c) for c in clauses]
                del cand[i][j]
                if truth(cand) == target:
                    clauses = cand
                    changed = True
                    i = 0
                    restarted = True
                    break
                j += 1
            if not restarted:
                i += 1
    return formula_from_clauses(view, clauses)


# ---------------------------------------------------------------------------
# Relations and languages


class Dialect(Enum):
    SUCCESSOR_ONLY = "successor"
    ORDER = "order"


@dataclass(frozen=True)
class RelationDef:
    """A named relation of fixed arity defined by a formula over x1..xk."""

    name: str
    arity: int
    formula: Formula

    def __post_init__(self):
        if self.arity < 1:
            raise ArityError(f"relation {self.name}: arity must be positive")
        vs = self.formula.variables()
        if vs and max(vs) >= self.arity:
            raise ArityError(
                f"relation {self.name}: literal references x{max(vs) + 1} "
                f"but arity is {self.arity}")

    @property
    def dialect(self) -> Dialect:
        # Self-comparisons like x1 <= x1 are constants, not order atoms.
        for lit in _walk_literals(self.formula.root):
            if lit.cmp in (Cmp.LEQ, Cmp.LT) and lit.lhs != lit.rhs:
                return Dialect.ORDER
        return Dialect.SUCCESSOR_ONLY


@dataclass(frozen=True)
class ConstraintLanguage:
    """Ordered collection of relations; q is the largest absolute offset."""

    relations: tuple

    def __post_init__(self):
        object.__setattr__(self, "relations", tuple(self.relations))
        seen = set()
        for r in self.relations:
            if r.name in seen:
                raise DuplicateNameError(f"relation {r.name!r} declared twice")
            seen.add(r.name)

    @property
    def q(self) -> int:
        return max((r.formula.qe_degree for r in self.relations), default=0)

    def relation(self, name: str) -> RelationDef:
        for r in self.relations:
            if r.name == name:
                return r
        raise KeyError(name)

    def names(self):
        return [r.name for r in self.relations]

    def extended(self, extra) -> "ConstraintLanguage":
        return ConstraintLanguage(self.relations + tuple(extra))


# ---------------------------------------------------------------------------
# .dtl parser

_TOKEN_RE = re.compile(
    r"(?P<op>:=|<=|->|!=|<|=|\||&|!|\(|\)|/|\+|-)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<int>\d+)"
    r"|(?P<ws>\s+)"
    r"|(?P<comment>#.*)"
    r"|(?P<bad>.)"
)

_VAR_RE = re.compile(r"^x([1-9][0-9]*)$")


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    col: int


def _scan(line_text, lineno):
    toks = []
    for m in _TOKEN_RE.finditer(line_text):
        kind = m.lastgroup
        if kind in ("ws",):
            continue
        if kind == "comment":
            break
        if kind == "bad":
            raise ParseError(f"unexpected character {m.group()!r}",
                             lineno, m.start() + 1)
        toks.append(_Tok(kind, m.group(), m.start() + 1))
    return toks


class _ExprParser:
    """Precedence: ! binds tightest, then &, then -> (right-assoc), then |."""

    def __init__(self, toks, lineno, arity):
        self.toks = toks
        self.pos = 0
        self.lineno = lineno
        self.arity = arity

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self):
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of line", self.lineno,
                             self.toks[-1].col if self.toks else 1)
        self.pos += 1
        return t

    def expect_op(self, text):
        t = self.take()
        if t.kind != "op" or t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}",
                             self.lineno, t.col)
        return t

    def parse(self):
        node = self.parse_or()
        t = self.peek()
        if t is not None:
            raise ParseError(f"unexpected {t.text!r}", self.lineno, t.col)
        return node

    def parse_or(self):
        parts = [self.parse_impl()]
        while (t := self.peek()) is not None and t.kind == "op" and t.text == "|":
            self.take()
            parts.append(self.parse_impl())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def parse_impl(self):
        left = self.parse_and()
        t = self.peek()
        if t is not None and t.kind == "op" and t.text == "->":
            self.take()
            right = self.parse_impl()
            return Or((Not(left), right))
        return left

    def parse_and(self):
        parts = [self.parse_unit()]
        while (t := self.peek()) is not None and t.kind == "op" and t.text == "&":
            self.take()
            parts.append(self.parse_unit())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def parse_unit(self):
        t = self.peek()
        if t is None:
            raise ParseError("expected a literal", self.lineno, 1)
        if t.kind == "op" and t.text == "!":
            self.take()
            return Not(self.parse_unit())
        if t.kind == "op" and t.text == "(":
            self.take()
            node = self.parse_or()
            self.expect_op(")")
            return node
        return self.parse_literal()

    def parse_var(self):
        t = self.take()
        m = _VAR_RE.match(t.text) if t.kind == "name" else None
        if m is None:
            raise ParseError(f"expected a variable like x1, found {t.text!r}",
                             self.lineno, t.col)
        idx = int(m.group(1)) - 1
        if idx >= self.arity:
            raise ArityError(f"variable x{idx + 1} exceeds arity {self.arity}",
                             self.lineno, t.col)
        return idx

    def parse_literal(self):
        lhs = self.parse_var()
        t = self.take()
        cmps = {"<=": Cmp.LEQ, "<": Cmp.LT, "=": Cmp.EQ, "!=": Cmp.NEQ}
        if t.kind != "op" or t.text not in cmps:
            raise ParseError(f"expected a comparator, found {t.text!r}",
                             self.lineno, t.col)
        cmp = cmps[t.text]
        rhs = self.parse_var()
        offset = 0
        nxt = self.peek()
        if nxt is not None and nxt.kind == "op" and nxt.text in ("+", "-"):
            sign = 1 if self.take().text == "+" else -1
            it = self.take()
            if it.kind != "int":
                raise ParseError(f"expected an integer offset, found {it.text!r}",
                                 self.lineno, it.col)
            offset = sign * int(it.text)
        return Literal(lhs, rhs, cmp, offset)


def parse_expression(text, arity, lineno=1) -> Formula:
    """Parse a bare .dtl expression for a relation of the given arity."""
    toks = _scan(text, lineno)
    return Formula(_ExprParser(toks, lineno, arity).parse())


def parse_language(text: str) -> ConstraintLanguage:
    """Parse a .dtl document: one ``rel NAME/ARITY := expr`` per line."""
    relations = []
    names = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = _scan(raw, lineno)
        if not toks:
            continue
        if not (toks[0].kind == "name" and toks[0].text == "rel"):
            raise ParseError(f"expected 'rel', found {toks[0].text!r}",
                             lineno, toks[0].col)
        if len(toks) < 5:
            raise ParseError("incomplete relation declaration", lineno, toks[-1].col)
        name_tok = toks[1]
        if name_tok.kind != "name":
            raise ParseError(f"expected a relation name, found {name_tok.text!r}",
                             lineno, name_tok.col)
        if toks[2].text != "/":
            raise ParseError("expected '/' after the relation name",
                             lineno, toks[2].col)
        if toks[3].kind != "int" or int(toks[3].text) < 1:
            raise ParseError("expected a positive arity", lineno, toks[3].col)
        arity = int(toks[3].text)
        if toks[4].text != ":=":
            raise ParseError("expected ':='", lineno, toks[4].col)
        if name_tok.text in names:
            raise DuplicateNameError(f"relation {name_tok.text!r} declared twice",
                                     lineno, name_tok.col)
        names.add(name_tok.text)
        parser = _ExprParser(toks[5:], lineno, arity)
        relations.append(RelationDef(name_tok.text, arity, Formula(parser.parse())))
    return ConstraintLanguage(tuple(relations))


def format_formula(f: Formula) -> str:
    return _format_node(f.root)


def write_language(lang: ConstraintLanguage) -> str:
    lines = [f"rel {r.name}/{r.arity} := {_format_node(r.formula.root)}"
             for r in lang.relations]
    return "\n".join(lines) + "\n"
