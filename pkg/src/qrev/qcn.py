"""Normal-form conjunctive formulas over a qualitative algebra.

A formula in normal form assigns exactly one relation to every ordered
pair of distinct variables (unconstrained pairs get the universal
relation).  A scenario assigns a single base relation to every pair;
the consistent scenarios are the interpretations of the semantics, and
the distance between two scenarios is the sum, over all ordered pairs,
of the neighborhood distance between their base relations.

Consistency is decided by backtracking refinement with algebraic closure
(path consistency) as propagation.  Arc plus path consistency of a
scenario is taken as the consistency criterion; this is exact for the
built-in algebras and an approximation for user-loaded algebras where
weak composition is lossy (see AlgebraSpec.assume_closure_decides).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, NamedTuple

from .algebra import AlgebraSpec, base_index, bits, is_base, popcount
from .errors import (
    EmptyRelationPresent,
    UniverseMismatch,
    UnknownVariable,
    Unrealizable,
)

Universe = tuple[str, ...]


class Constraint(NamedTuple):
    """A single stated constraint: x rel y."""

    x: str
    rel: int
    y: str


@dataclass(frozen=True)
class QAFormula:
    """A conjunction in normal form over a fixed variable universe.

    ``rels`` is the row-major n x n matrix of relation masks; diagonal
    entries hold the identity singleton.  Instances are immutable and
    hashable, so they can serve as search states and set members.
    Formulas produced by ``normalize`` and ``path_closure`` are arc-closed
    by construction; ``is_arc_consistent`` checks the property for
    formulas assembled by other means.
    """

    universe: Universe
    rels: tuple[int, ...]

    def __post_init__(self):
        n = len(self.universe)
        if len(self.rels) != n * n:
            raise ValueError("relation matrix does not match universe size")

    @property
    def n(self) -> int:
        return len(self.universe)

    def var_index(self, name: str) -> int:
        try:
            return self.universe.index(name)
        except ValueError:
            raise UnknownVariable(name) from None

    def rel_idx(self, i: int, j: int) -> int:
        return self.rels[i * self.n + j]

    def rel(self, x: str, y: str) -> int:
        return self.rel_idx(self.var_index(x), self.var_index(y))

    def ordered_pairs(self) -> Iterator[tuple[int, int]]:
        n = self.n
        for i in range(n):
            for j in range(n):
                if i != j:
                    yield i, j

    def unordered_pairs(self) -> Iterator[tuple[int, int]]:
        n = self.n
        for i in range(n):
            for j in range(i + 1, n):
                yield i, j

    def has_empty(self) -> bool:
        return any(self.rel_idx(i, j) == 0 for i, j in self.unordered_pairs())

    @property
    def is_scenario(self) -> bool:
        return all(is_base(self.rel_idx(i, j)) for i, j in self.unordered_pairs())

    def with_pair(self, i: int, j: int, mask: int, a: AlgebraSpec) -> "QAFormula":
        """Copy with pair (i, j) set to mask and (j, i) to its inverse."""
        rels = list(self.rels)
        rels[i * self.n + j] = mask
        rels[j * self.n + i] = a.inverse(mask)
        return QAFormula(self.universe, tuple(rels))

    def constraints(self, a: AlgebraSpec) -> list[Constraint]:
        """One constraint per unordered pair, skipping universal entries."""
        out = []
        for i, j in self.unordered_pairs():
            mask = self.rel_idx(i, j)
            if mask != a.full:
                out.append(Constraint(self.universe[i], mask, self.universe[j]))
        return out


def _matrix(universe: Universe, a: AlgebraSpec) -> list[int]:
    n = len(universe)
    rels = [a.full] * (n * n)
    for i in range(n):
        rels[i * n + i] = a.identity_mask
    return rels


def all_top(universe: Universe, a: AlgebraSpec) -> QAFormula:
    """The unconstrained formula over a universe."""
    return QAFormula(tuple(universe), tuple(_matrix(universe, a)))


def normalize(constraints, universe: Universe, a: AlgebraSpec) -> QAFormula:
    """Fold stated constraints into normal form.

    Each ordered pair gets the intersection of everything stated on it,
    further intersected with the inverse of its converse pair, so the
    result is arc-closed (possibly with empty entries when the statements
    contradict each other).
    """
    universe = tuple(universe)
    n = len(universe)
    pos = {v: i for i, v in enumerate(universe)}
    rels = _matrix(universe, a)
    for c in constraints:
        if c.x not in pos:
            raise UnknownVariable(c.x)
        if c.y not in pos:
            raise UnknownVariable(c.y)
        i, j = pos[c.x], pos[c.y]
        if i == j:
            continue  # self-pairs are implicit identity
        rels[i * n + j] &= c.rel
    for i in range(n):
        for j in range(i + 1, n):
            merged = rels[i * n + j] & a.inverse(rels[j * n + i])
            rels[i * n + j] = merged
            rels[j * n + i] = a.inverse(merged)
    return QAFormula(universe, tuple(rels))


def is_arc_consistent(phi: QAFormula, a: AlgebraSpec) -> bool:
    """No empty pair, and every pair is the inverse of its converse."""
    for i, j in phi.unordered_pairs():
        rij = phi.rel_idx(i, j)
        if rij == 0 or rij != a.inverse(phi.rel_idx(j, i)):
            return False
    return True


def _close(rels: list[int], n: int, a: AlgebraSpec, queue) -> bool:
    """Refine to the algebraic-closure fixpoint.

    ``queue`` seeds the unordered pairs to reprocess.  Mutates ``rels``
    (keeping converse entries inverse-synced) and returns False as soon
    as some pair becomes empty.
    """
    compose = a.compose
    inverse = a.inverse
    pending = set(queue)
    work = list(pending)
    while work:
        i, j = work.pop()
        pending.discard((i, j))
        rij = rels[i * n + j]
        rji = rels[j * n + i]
        for k in range(n):
            if k == i or k == j:
                continue
            # tighten (i, k) through j, then (j, k) through i
            for x, y, z, rxy in ((i, j, k, rij), (j, i, k, rji)):
                rxz = rels[x * n + z]
                tightened = rxz & compose(rxy, rels[y * n + z])
                if tightened != rxz:
                    if tightened == 0:
                        rels[x * n + z] = 0
                        rels[z * n + x] = 0
                        return False
                    rels[x * n + z] = tightened
                    rels[z * n + x] = inverse(tightened)
                    pair = (x, z) if x < z else (z, x)
                    if pair not in pending:
                        pending.add(pair)
                        work.append(pair)
    return True


def path_closure(phi: QAFormula, a: AlgebraSpec) -> QAFormula:
    """Algebraic closure: the weakest refinement of ``phi`` that is
    arc-consistent and path-consistent, or a formula with an empty entry
    when ``phi`` is detected inconsistent.  Preserves the model set.
    """
    n = phi.n
    rels = list(phi.rels)
    # restore arc closure first; stated converses may disagree
    for i in range(n):
        for j in range(i + 1, n):
            merged = rels[i * n + j] & a.inverse(rels[j * n + i])
            rels[i * n + j] = merged
            rels[j * n + i] = a.inverse(merged)
            if merged == 0:
                return QAFormula(phi.universe, tuple(rels))
    _close(rels, n, a, [(i, j) for i in range(n) for j in range(i + 1, n)])
    return QAFormula(phi.universe, tuple(rels))


def close_from(phi: QAFormula, seeds, a: AlgebraSpec) -> QAFormula:
    """Re-close an already arc-closed formula after tightening ``seeds``.

    Propagates only from the given unordered pairs; equivalent to
    path_closure when the rest of the formula was already at fixpoint.
    """
    rels = list(phi.rels)
    _close(rels, phi.n, a, seeds)
    return QAFormula(phi.universe, tuple(rels))


def is_path_consistent(phi: QAFormula, a: AlgebraSpec) -> bool:
    """Every pair is within the composition through any third variable."""
    n = phi.n
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            rij = phi.rel_idx(i, j)
            for k in range(n):
                if k == i or k == j:
                    continue
                if rij & ~a.compose(phi.rel_idx(i, k), phi.rel_idx(k, j)):
                    return False
    return True


def scenarios(phi: QAFormula, a: AlgebraSpec) -> Iterator[QAFormula]:
    """Enumerate the scenario refinements of a normal-form formula.

    One base relation is chosen per unordered pair, the inverse goes to
    the converse pair; choices incompatible with the converse relation
    are skipped, so every emitted scenario is arc-consistent.  No path
    consistency filtering happens here.
    """
    n = phi.n
    for i, j in phi.unordered_pairs():
        if phi.rel_idx(i, j) == 0:
            raise EmptyRelationPresent(
                f"empty relation on ({phi.universe[i]}, {phi.universe[j]})"
            )
    pairs = list(phi.unordered_pairs())

    def rec(idx: int, rels: list[int]):
        if idx == len(pairs):
            yield QAFormula(phi.universe, tuple(rels))
            return
        i, j = pairs[idx]
        choices = phi.rel_idx(i, j) & a.inverse(phi.rel_idx(j, i))
        for b in bits(choices):
            rels[i * n + j] = 1 << b
            rels[j * n + i] = 1 << a.inverse_index[b]
            yield from rec(idx + 1, rels)

    yield from rec(0, list(phi.rels))


def _choose_split_pair(phi: QAFormula):
    """Unordered pair with the smallest relation cardinality >= 2."""
    best = None
    best_size = None
    for i, j in phi.unordered_pairs():
        size = popcount(phi.rel_idx(i, j))
        if size >= 2 and (best_size is None or size < best_size):
            best, best_size = (i, j), size
    return best


def is_consistent(phi: QAFormula, a: AlgebraSpec) -> bool:
    """Decide satisfiability by refinement search with closure propagation."""
    closed = path_closure(phi, a)
    if closed.has_empty():
        return False
    pair = _choose_split_pair(closed)
    if pair is None:
        return True  # arc- and path-consistent scenario
    i, j = pair
    for b in bits(closed.rel_idx(i, j)):
        if is_consistent(closed.with_pair(i, j, 1 << b, a), a):
            return True
    return False


@lru_cache(maxsize=64)
def consistent_scenarios(universe: Universe, a: AlgebraSpec) -> tuple[QAFormula, ...]:
    """All consistent scenarios over a universe, in deterministic order.

    Backtracking with closure propagation rather than filtering the full
    |B|^(n(n-1)/2) space; feasible for the universe sizes the brute-force
    model oracle accepts.  Cached per (universe, algebra).
    """
    out: list[QAFormula] = []

    def rec(phi: QAFormula):
        if phi.has_empty():
            return
        pair = _choose_split_pair(phi)
        if pair is None:
            out.append(phi)
            return
        i, j = pair
        for b in bits(phi.rel_idx(i, j)):
            rec(path_closure(phi.with_pair(i, j, 1 << b, a), a))

    rec(path_closure(all_top(tuple(universe), a), a))
    return tuple(out)


def scenario_distance(sigma: QAFormula, tau: QAFormula, a: AlgebraSpec) -> int:
    """Sum over all ordered pairs of the neighborhood distance between
    the two scenarios' base relations."""
    if sigma.universe != tau.universe:
        raise UniverseMismatch(f"{sigma.universe} vs {tau.universe}")
    dm = a.dist_matrix
    total = 0
    for i, j in sigma.ordered_pairs():
        total += dm[base_index(sigma.rel_idx(i, j))][base_index(tau.rel_idx(i, j))]
    return total


# ---------------------------------------------------------------------------
# Interval realization for Allen scenarios: the endpoint comparisons
# implied by each base relation, as (a1?a2, a1?b2, b1?a2, b1?b2) with
# ? in {-1, 0, 1} for <, =, >.
# ---------------------------------------------------------------------------

_ENDPOINT_ORDERS = {
    "eq": (0, -1, 1, 0),
    "b": (-1, -1, -1, -1),
    "bi": (1, 1, 1, 1),
    "m": (-1, -1, 0, -1),
    "mi": (1, 0, 1, 1),
    "o": (-1, -1, 1, -1),
    "oi": (1, -1, 1, 1),
    "s": (0, -1, 1, -1),
    "si": (0, -1, 1, 1),
    "d": (1, -1, 1, -1),
    "di": (-1, -1, 1, 1),
    "f": (1, -1, 1, 0),
    "fi": (-1, -1, 1, 0),
}


def realize_allen_scenario(sigma: QAFormula, a: AlgebraSpec) -> dict[str, tuple[Fraction, Fraction]]:
    """Rational intervals satisfying every constraint of an Allen scenario.

    The 2n endpoints are totally preordered by the base relations; merge
    the equalities, topologically order the strict part, and assign
    increasing rationals.  Raises Unrealizable when the order has a cycle,
    which cannot happen for arc- and path-consistent scenarios.
    """
    if not sigma.is_scenario:
        raise ValueError("realize_allen_scenario expects a scenario")
    n = sigma.n
    total = 2 * n  # point p: start of var i is 2i, end is 2i + 1

    parent = list(range(total))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: int, y: int):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    lt_edges: list[tuple[int, int]] = []
    for i in range(n):
        lt_edges.append((2 * i, 2 * i + 1))  # a_i < b_i
    for i, j in sigma.unordered_pairs():
        token = a.base[base_index(sigma.rel_idx(i, j))].name
        try:
            cmp4 = _ENDPOINT_ORDERS[token]
        except KeyError:
            raise ValueError(f"not an Allen base relation: {token!r}") from None
        points = ((2 * i, 2 * j), (2 * i, 2 * j + 1), (2 * i + 1, 2 * j), (2 * i + 1, 2 * j + 1))
        for (p, q), c in zip(points, cmp4):
            if c == 0:
                union(p, q)
            elif c < 0:
                lt_edges.append((p, q))
            else:
                lt_edges.append((q, p))

    roots = {find(p) for p in range(total)}
    succ: dict[int, set[int]] = {r: set() for r in roots}
    indeg: dict[int, int] = {r: 0 for r in roots}
    for p, q in lt_edges:
        rp, rq = find(p), find(q)
        if rp == rq:
            raise Unrealizable("strict order between merged endpoints")
        if rq not in succ[rp]:
            succ[rp].add(rq)
            indeg[rq] += 1

    order: list[int] = []
    ready = sorted(r for r in roots if indeg[r] == 0)
    while ready:
        u = ready.pop()
        order.append(u)
        for v in sorted(succ[u]):
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(v)
    if len(order) != len(roots):
        raise Unrealizable("cyclic endpoint ordering")

    value = {r: Fraction(rank) for rank, r in enumerate(order)}
    return {
        sigma.universe[i]: (value[find(2 * i)], value[find(2 * i + 1)])
        for i in range(n)
    }
