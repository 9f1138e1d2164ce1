"""The propositional closure of a qualitative algebra.

Plain conjunctive formulas cannot express disjunction or negation, and
an arbitrary set of scenarios is in general not the exact model set of
any of them.  Closing the language under the boolean connectives removes
both restrictions: every set of scenarios is the model set of the
disjunction of its members, and every closed formula can be rewritten as
a disjunction of plain conjunctions that uses no negation at all, because
the negation of a single constraint is the constraint built on the
complementary set of base relations.

This module provides the AST, a recursive-descent parser for the ASCII
grammar below, the negation-free disjunctive normal forms, a brute-force
model oracle for small universes, and the model-set operations the
revision engine and the test suites rely on.

Grammar::

    formula := disj
    disj    := conj ('|' conj)*
    conj    := unary ('&' unary)*
    unary   := '!' unary | '(' formula ')' | atom
    atom    := VAR '{' RELTOK* '}' VAR

VAR matches [A-Za-z_][A-Za-z0-9_-]*; RELTOK is a base-relation name of
the active algebra; whitespace is insignificant and '#' comments run to
end of line.  An empty brace pair denotes the empty (inconsistent)
relation.

Problem documents hold an optional ``vars`` header fixing the universe
and ``psi:`` / ``mu:`` sections, each with one formula.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Union

from .algebra import AlgebraSpec
from .errors import (
    FormulaError,
    FormulaSyntaxError,
    SelfConstraint,
    UniverseMismatch,
    UniverseTooLarge,
    UnknownRelationToken,
)
from .qcn import (
    Constraint,
    QAFormula,
    Universe,
    all_top,
    close_from,
    consistent_scenarios,
    normalize,
    path_closure,
    scenarios,
)

DEFAULT_ORACLE_BOUND = 4


@dataclass(frozen=True)
class Atom:
    """A single constraint: x rel y."""

    x: str
    rel: int
    y: str


@dataclass(frozen=True)
class And:
    children: tuple["ClosureFormula", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("And needs at least 2 children")


@dataclass(frozen=True)
class Or:
    children: tuple["ClosureFormula", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("Or needs at least 2 children")


@dataclass(frozen=True)
class Not:
    child: "ClosureFormula"


ClosureFormula = Union[Atom, And, Or, Not]


def conj(children: Iterable[ClosureFormula]) -> ClosureFormula:
    """Conjunction with flattening; singletons collapse to the child."""
    flat: list[ClosureFormula] = []
    for c in children:
        if isinstance(c, And):
            flat.extend(c.children)
        else:
            flat.append(c)
    if not flat:
        raise ValueError("empty conjunction")
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(children: Iterable[ClosureFormula]) -> ClosureFormula:
    """Disjunction with flattening; singletons collapse to the child."""
    flat: list[ClosureFormula] = []
    for c in children:
        if isinstance(c, Or):
            flat.extend(c.children)
        else:
            flat.append(c)
    if not flat:
        raise ValueError("empty disjunction")
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def variables_of(phi: ClosureFormula) -> list[str]:
    """Variables in first-mention order."""
    seen: dict[str, None] = {}

    def walk(node: ClosureFormula):
        if isinstance(node, Atom):
            seen.setdefault(node.x)
            seen.setdefault(node.y)
        elif isinstance(node, Not):
            walk(node.child)
        else:
            for c in node.children:
                walk(c)

    walk(phi)
    return list(seen)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_-]*|[(){}|&!]|\S")
_VAR_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*\Z")


class _Token(tuple):
    __slots__ = ()

    @property
    def text(self):
        return self[0]

    @property
    def line(self):
        return self[1]

    @property
    def column(self):
        return self[2]


def _tokenize(text: str) -> list[_Token]:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        pos = line.find("#")
        if pos >= 0:
            line = line[:pos]
        for m in _TOKEN_RE.finditer(line):
            out.append(_Token((m.group(0), lineno, m.start() + 1)))
    return out


class _Parser:
    def __init__(self, tokens: list[_Token], algebra: AlgebraSpec):
        self.tokens = tokens
        self.pos = 0
        self.algebra = algebra

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is not None:
            self.pos += 1
        return tok

    def error(self, message: str, tok=None):
        tok = tok or self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token(("", 1, 1))
            raise FormulaSyntaxError(f"{message} (at end of input)", last.line, last.column)
        raise FormulaSyntaxError(f"{message} (found {tok.text!r})", tok.line, tok.column)

    def expect(self, text: str):
        tok = self.next()
        if tok is None or tok.text != text:
            self.error(f"expected {text!r}", tok)
        return tok

    def parse_formula(self) -> ClosureFormula:
        node = self.parse_disj()
        if self.peek() is not None:
            self.error("unexpected trailing input")
        return node

    def parse_disj(self) -> ClosureFormula:
        parts = [self.parse_conj()]
        while self.peek() is not None and self.peek().text == "|":
            self.next()
            parts.append(self.parse_conj())
        return disj(parts)

    def parse_conj(self) -> ClosureFormula:
        parts = [self.parse_unary()]
        while self.peek() is not None and self.peek().text == "&":
            self.next()
            parts.append(self.parse_unary())
        return conj(parts)

    def parse_unary(self) -> ClosureFormula:
        tok = self.peek()
        if tok is None:
            self.error("expected a formula")
        if tok.text == "!":
            self.next()
            return Not(self.parse_unary())
        if tok.text == "(":
            self.next()
            node = self.parse_disj()
            self.expect(")")
            return node
        return self.parse_atom()

    def parse_atom(self) -> Atom:
        xtok = self.next()
        if xtok is None or not _VAR_RE.match(xtok.text):
            self.error("expected a variable name", xtok)
        self.expect("{")
        mask = 0
        while True:
            tok = self.next()
            if tok is None:
                self.error("unterminated relation set")
            if tok.text == "}":
                break
            try:
                mask |= 1 << self.algebra.index_of(tok.text)
            except KeyError:
                raise UnknownRelationToken(
                    f"unknown relation token {tok.text!r} for algebra {self.algebra.name!r}",
                    tok.line,
                    tok.column,
                ) from None
        ytok = self.next()
        if ytok is None or not _VAR_RE.match(ytok.text):
            self.error("expected a variable name", ytok)
        if xtok.text == ytok.text:
            raise SelfConstraint(
                f"constraint relates {xtok.text!r} to itself", xtok.line, xtok.column
            )
        return Atom(xtok.text, mask, ytok.text)


def parse(text: str, a: AlgebraSpec) -> tuple[ClosureFormula, Universe]:
    """Parse a formula; the universe is its variables in mention order."""
    tokens = _tokenize(text)
    if not tokens:
        raise FormulaSyntaxError("empty formula", 1, 1)
    node = _Parser(tokens, a).parse_formula()
    return node, tuple(variables_of(node))


@dataclass(frozen=True)
class ProblemDocument:
    """A parsed problem document: universe plus psi/mu (either optional)."""

    universe: Universe
    psi: ClosureFormula | None
    mu: ClosureFormula | None


def parse_problem(text: str, a: AlgebraSpec) -> ProblemDocument:
    """Parse a problem document.

    An optional leading ``vars`` line fixes the head of the universe;
    ``psi:`` and ``mu:`` lines open sections.  Text without section
    markers is a single formula stored as psi.  The universe is the
    declared variables followed by mentioned ones in mention order.
    """
    declared: list[str] = []
    sections: dict[str, list[str]] = {}
    current: list[str] | None = None
    plain: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        pos = raw.find("#")
        line = raw if pos < 0 else raw[:pos]
        stripped = line.strip()
        if not stripped:
            continue
        head = stripped.split()[0]
        if head == "vars" and current is None and not plain:
            for tok in stripped.split()[1:]:
                if not _VAR_RE.match(tok):
                    raise FormulaSyntaxError(f"bad variable name {tok!r}", lineno, 1)
                if tok not in declared:
                    declared.append(tok)
            continue
        if stripped.startswith("psi:") or stripped.startswith("mu:"):
            key, _, rest = stripped.partition(":")
            if key in sections:
                raise FormulaSyntaxError(f"duplicate section {key!r}", lineno, 1)
            sections[key] = current = []
            if rest.strip():
                current.append(rest)
            continue
        (current if current is not None else plain).append(line)

    if plain and sections:
        raise FormulaSyntaxError("text outside psi:/mu: sections", 1, 1)

    def build(lines: list[str] | None) -> ClosureFormula | None:
        if not lines:
            return None
        return parse("\n".join(lines), a)[0]

    if sections:
        psi = build(sections.get("psi"))
        mu = build(sections.get("mu"))
    else:
        psi = build(plain)
        mu = None

    universe = list(declared)
    for node in (psi, mu):
        if node is not None:
            for v in variables_of(node):
                if v not in universe:
                    universe.append(v)
    return ProblemDocument(tuple(universe), psi, mu)


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------


def format_relation(mask: int, a: AlgebraSpec) -> str:
    return "{" + " ".join(a.tokens(mask)) + "}"


def format_formula(phi: ClosureFormula, a: AlgebraSpec) -> str:
    """Canonical ASCII rendering; reparses to an equal AST."""

    def fmt(node: ClosureFormula, parent: str) -> str:
        if isinstance(node, Atom):
            return f"{node.x} {format_relation(node.rel, a)} {node.y}"
        if isinstance(node, Not):
            return "!(" + fmt(node.child, "!") + ")"
        if isinstance(node, And):
            body = " & ".join(fmt(c, "&") for c in node.children)
            return f"({body})" if parent in ("!",) else body
        body = " | ".join(fmt(c, "|") for c in node.children)
        return f"({body})" if parent in ("!", "&") else body

    return fmt(phi, "")


def format_qaformula(phi: QAFormula, a: AlgebraSpec) -> str:
    """Conjunction of one constraint per unordered non-universal pair."""
    parts = [
        f"{c.x} {format_relation(c.rel, a)} {c.y}" for c in phi.constraints(a)
    ]
    if not parts:
        i, j = 0, 1
        full = a.full
        return f"{phi.universe[i]} {format_relation(full, a)} {phi.universe[j]}"
    return " & ".join(parts)


def qaformula_to_closure(phi: QAFormula, a: AlgebraSpec) -> ClosureFormula:
    """The formula as an AST (conjunction of its non-universal constraints)."""
    atoms = [Atom(c.x, c.rel, c.y) for c in phi.constraints(a)]
    if not atoms:
        atoms = [Atom(phi.universe[0], a.full, phi.universe[1])]
    return conj(atoms)


def unsat_formula(universe: Universe) -> ClosureFormula:
    """The canonical inconsistent formula over a universe."""
    if len(universe) < 2:
        raise ValueError("need at least 2 variables")
    return Atom(universe[0], 0, universe[1])


# ---------------------------------------------------------------------------
# Negation-free disjunctive normal forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DNF:
    """A disjunction of normal-form conjunctions, negation-free.

    ``disjuncts`` are algebraically closed, pairwise distinct, and free
    of empty entries; the inconsistent formula is represented by a single
    disjunct containing an empty relation.
    """

    universe: Universe
    disjuncts: tuple[QAFormula, ...]

    @property
    def is_unsat(self) -> bool:
        return len(self.disjuncts) == 1 and self.disjuncts[0].has_empty()


def _nnf(node: ClosureFormula, a: AlgebraSpec, negate: bool) -> ClosureFormula:
    """Push negations to atoms and eliminate them by complementation."""
    if isinstance(node, Atom):
        return Atom(node.x, a.complement(node.rel), node.y) if negate else node
    if isinstance(node, Not):
        return _nnf(node.child, a, not negate)
    children = tuple(_nnf(c, a, negate) for c in node.children)
    if isinstance(node, And):
        return Or(children) if negate else And(children)
    return And(children) if negate else Or(children)


def _merge(f1: QAFormula, f2: QAFormula, a: AlgebraSpec) -> QAFormula | None:
    """Pairwise-intersect two closed formulas and re-close; None if empty."""
    rels = tuple(m1 & m2 for m1, m2 in zip(f1.rels, f2.rels))
    changed = [
        (i, j)
        for i, j in f1.unordered_pairs()
        if rels[i * f1.n + j] != f1.rels[i * f1.n + j]
    ]
    if any(rels[i * f1.n + j] == 0 for i, j in changed):
        return None
    if not changed:
        return f1
    closed = close_from(QAFormula(f1.universe, rels), changed, a)
    return None if closed.has_empty() else closed


def _distribute(node: ClosureFormula, universe: Universe, a: AlgebraSpec) -> list[QAFormula]:
    """Negation-free AST to a list of closed, consistent-looking disjuncts.

    Locally inconsistent products are dropped as they appear, which keeps
    the combinatorial product of nested disjunctions tractable.
    """
    if isinstance(node, Atom):
        closed = path_closure(normalize([Constraint(node.x, node.rel, node.y)], universe, a), a)
        return [] if closed.has_empty() else [closed]
    if isinstance(node, Or):
        out: dict[QAFormula, None] = {}
        for c in node.children:
            for d in _distribute(c, universe, a):
                out.setdefault(d)
        return list(out)
    # And: fold the children's disjunct lists product-wise
    partials: list[QAFormula] | None = None
    for c in node.children:
        branch = _distribute(c, universe, a)
        if partials is None:
            partials = branch
        else:
            merged: dict[QAFormula, None] = {}
            for p in partials:
                for d in branch:
                    m = _merge(p, d, a)
                    if m is not None:
                        merged.setdefault(m)
            partials = list(merged)
        if not partials:
            return []
    return partials or []


def _as_dnf(disjuncts: list[QAFormula], universe: Universe, a: AlgebraSpec) -> DNF:
    if not disjuncts:
        marker = all_top(universe, a).with_pair(0, 1, 0, a)
        return DNF(universe, (marker,))
    uniq = {d: None for d in disjuncts}
    return DNF(universe, tuple(sorted(uniq, key=lambda d: d.rels)))


def to_dnf_won(phi: ClosureFormula, universe: Universe, a: AlgebraSpec) -> DNF:
    """Disjunctive normal form without negation.

    Negations are pushed inward and eliminated by relation complement,
    conjunction is distributed over disjunction, and each disjunct is
    normalized and algebraically closed.  The union of the disjuncts'
    model sets equals the model set of ``phi``.
    """
    universe = tuple(universe)
    if len(universe) < 2:
        raise FormulaError("a universe needs at least 2 variables")
    return _as_dnf(_distribute(_nnf(phi, a, False), universe, a), universe, a)


def to_dnf_base(phi: ClosureFormula, universe: Universe, a: AlgebraSpec) -> DNF:
    """As to_dnf_won, then split every constraint down to base relations.

    The surviving disjuncts are exactly the consistent scenario
    refinements, so the result lists one scenario per model.
    """
    won = to_dnf_won(phi, universe, a)
    if won.is_unsat:
        return won
    out: dict[QAFormula, None] = {}
    for d in won.disjuncts:
        for sc in scenarios(d, a):
            closed = path_closure(sc, a)
            if not closed.has_empty():
                out.setdefault(sc)
    return _as_dnf(list(out), won.universe, a)


# ---------------------------------------------------------------------------
# Brute-force model oracle
# ---------------------------------------------------------------------------


def satisfies(sigma: QAFormula, phi: ClosureFormula) -> bool:
    """Recursive satisfaction of a closed formula by a scenario."""
    if isinstance(phi, Atom):
        mask = sigma.rel(phi.x, phi.y)
        return mask & phi.rel == mask
    if isinstance(phi, Not):
        return not satisfies(sigma, phi.child)
    if isinstance(phi, And):
        return all(satisfies(sigma, c) for c in phi.children)
    return any(satisfies(sigma, c) for c in phi.children)


def models(
    phi: ClosureFormula,
    universe: Universe,
    a: AlgebraSpec,
    bound: int = DEFAULT_ORACLE_BOUND,
) -> frozenset[QAFormula]:
    """All consistent scenarios over ``universe`` satisfying ``phi``.

    Brute force by enumeration; refuses universes above ``bound``.
    """
    universe = tuple(universe)
    if len(universe) > bound:
        raise UniverseTooLarge(f"|universe| = {len(universe)} exceeds bound {bound}")
    return frozenset(
        s for s in consistent_scenarios(universe, a) if satisfies(s, phi)
    )


def scenarios_to_formula(scens: Iterable[QAFormula], a: AlgebraSpec, universe: Universe | None = None) -> ClosureFormula:
    """The disjunction of a set of scenarios; its models are exactly the set.

    An empty set yields the canonical inconsistent formula, which needs an
    explicit universe.
    """
    scens = sorted(scens, key=lambda s: s.rels)
    if scens:
        first = scens[0].universe
        for s in scens:
            if s.universe != first:
                raise UniverseMismatch(f"{s.universe} vs {first}")
        return disj(qaformula_to_closure(s, a) for s in scens)
    if universe is None:
        raise UniverseMismatch("empty scenario set needs an explicit universe")
    return unsat_formula(tuple(universe))


def equivalent(
    phi1: ClosureFormula,
    phi2: ClosureFormula,
    universe: Universe,
    a: AlgebraSpec,
    bound: int = DEFAULT_ORACLE_BOUND,
) -> bool:
    """Model-set equality over a shared universe (oracle-bounded)."""
    return models(phi1, universe, a, bound) == models(phi2, universe, a, bound)
