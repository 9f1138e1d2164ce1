"""Independent oracles and generators shared by the test modules.

Everything here recomputes expectations from first principles (interval
semantics, breadth-first search on a re-typed edge list, exhaustive
enumeration) so the library is checked against code paths it does not
share."""

from __future__ import annotations

import random
from collections import deque
from fractions import Fraction
from functools import lru_cache

import numpy as np

from qrev import (
    And,
    Atom,
    Not,
    Or,
    QAFormula,
    conj,
    consistent_scenarios,
    disj,
)
from qrev.algebra import base_index, bits, popcount

# ---------------------------------------------------------------------------
# Allen interval semantics, reimplemented for the tests
# ---------------------------------------------------------------------------

ALLEN_NAMES = ["b", "bi", "m", "mi", "o", "oi", "s", "si", "d", "di", "f", "fi", "eq"]
ALLEN_INVERSE = {
    "b": "bi", "bi": "b", "m": "mi", "mi": "m", "o": "oi", "oi": "o",
    "s": "si", "si": "s", "d": "di", "di": "d", "f": "fi", "fi": "f", "eq": "eq",
}


def interval_baserel(x: tuple, y: tuple) -> str:
    """Base relation of two rational intervals, from the endpoint orders."""
    a1, b1 = x
    a2, b2 = y
    assert a1 < b1 and a2 < b2
    if a1 == a2 and b1 == b2:
        return "eq"
    if b1 < a2:
        return "b"
    if a1 > b2:
        return "bi"
    if b1 == a2:
        return "m"
    if a1 == b2:
        return "mi"
    if a1 == a2:
        return "s" if b1 < b2 else "si"
    if b1 == b2:
        return "f" if a1 > a2 else "fi"
    if a1 > a2 and b1 < b2:
        return "d"
    if a1 < a2 and b1 > b2:
        return "di"
    return "o" if a1 < a2 else "oi"


def random_interval(rng: random.Random, span: int = 8) -> tuple[Fraction, Fraction]:
    """Random rational interval with endpoints on a coarse grid, so that
    the equality cases (m, s, f, eq and inverses) actually occur."""
    a = Fraction(rng.randint(0, span - 1), rng.choice((1, 2)))
    b = a + Fraction(rng.randint(1, span), rng.choice((1, 2)))
    return a, b


@lru_cache(maxsize=1)
def exact_allen_composition() -> dict[tuple[str, str], frozenset[str]]:
    """The exact composition table, by enumerating every configuration of
    the six endpoints of three intervals over a domain large enough to
    realize every weak order."""
    intervals = [(a, b) for a in range(6) for b in range(6) if a < b]
    table: dict[tuple[str, str], set[str]] = {}
    for x in intervals:
        for y in intervals:
            rxy = interval_baserel(x, y)
            for z in intervals:
                table.setdefault((rxy, interval_baserel(y, z)), set()).add(
                    interval_baserel(x, z)
                )
    return {k: frozenset(v) for k, v in table.items()}


# Conceptual neighborhood edges, re-typed from the single-endpoint-move
# adjacency of the 13 relations (independent copy of the shipped graph).
ALLEN_NEIGHBOR_EDGES = [
    ("b", "m"), ("m", "o"), ("o", "fi"), ("o", "s"), ("fi", "eq"), ("s", "eq"),
    ("fi", "di"), ("s", "d"), ("di", "si"), ("eq", "si"), ("d", "f"),
    ("eq", "f"), ("si", "oi"), ("f", "oi"), ("oi", "mi"), ("mi", "bi"),
]


@lru_cache(maxsize=1)
def bfs_allen_distance() -> dict[tuple[str, str], int]:
    adj: dict[str, set[str]] = {n: set() for n in ALLEN_NAMES}
    for u, v in ALLEN_NEIGHBOR_EDGES:
        adj[u].add(v)
        adj[v].add(u)
    out = {}
    for s in ALLEN_NAMES:
        d = {s: 0}
        q = deque([s])
        while q:
            u = q.popleft()
            for w in adj[u]:
                if w not in d:
                    d[w] = d[u] + 1
                    q.append(w)
        for t, dist in d.items():
            out[(s, t)] = dist
    return out


def allen_predicate_holds(token: str, x: tuple, y: tuple) -> bool:
    """Check one interval pair against the defining predicate of a base
    relation (used to validate realizations)."""
    return interval_baserel(x, y) == token


# ---------------------------------------------------------------------------
# Scenario space with a vectorized pairwise distance matrix
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8)
def scenario_space(universe: tuple, a):
    """(scenarios, index-of-scenario, pairwise ordered-sum distance matrix).

    The distance matrix uses the independent BFS distances when ``a`` is
    the built-in Allen algebra, so Eq-style ground truths never touch the
    library's precomputed matrix.
    """
    scens = consistent_scenarios(universe, a)
    index = {s: k for k, s in enumerate(scens)}
    n = len(universe)
    pair_slots = [(i, j) for i in range(n) for j in range(n) if i != j]
    codes = np.array(
        [[base_index(s.rel_idx(i, j)) for (i, j) in pair_slots] for s in scens],
        dtype=np.int16,
    )
    if a.name == "allen":
        bfs = bfs_allen_distance()
        dm = np.array(
            [[bfs[(r, s)] for s in ALLEN_NAMES] for r in ALLEN_NAMES], dtype=np.int32
        )
        # the test-local name order must match the declaration order
        assert [b.name for b in a.base] == ALLEN_NAMES
    else:
        dm = np.array(a.dist_matrix, dtype=np.int32)
    total = np.zeros((len(scens), len(scens)), dtype=np.int32)
    for p in range(codes.shape[1]):
        col = codes[:, p]
        total += dm[np.ix_(col, col)]
    return scens, index, total


def brute_force_revision(psi_models, mu_models, universe, a):
    """Eq-style ground truth: (delta, optimal mu models) by exhaustive
    enumeration over all model pairs; (None, frozenset()) when mu has no
    models and (None, mu_models) when psi has none."""
    scens, index, dist = scenario_space(tuple(universe), a)
    if not mu_models:
        return None, frozenset()
    if not psi_models:
        return None, frozenset(mu_models)
    psi_idx = np.array(sorted(index[s] for s in psi_models))
    mu_idx = np.array(sorted(index[s] for s in mu_models))
    sub = dist[np.ix_(psi_idx, mu_idx)]
    per_mu = sub.min(axis=0)
    delta = int(per_mu.min())
    chosen = frozenset(scens[mu_idx[k]] for k in np.nonzero(per_mu == delta)[0])
    return delta, chosen


# ---------------------------------------------------------------------------
# Random formulas and model-preserving reformulations
# ---------------------------------------------------------------------------


def random_relation(rng: random.Random, a) -> int:
    mask = rng.getrandbits(a.size)
    return mask if mask else a.full


def random_atom(rng: random.Random, universe, a) -> Atom:
    x, y = rng.sample(universe, 2)
    return Atom(x, random_relation(rng, a), y)


def random_formula(rng: random.Random, universe, a, depth: int):
    if depth <= 0 or rng.random() < 0.35:
        return random_atom(rng, universe, a)
    roll = rng.random()
    if roll < 0.45:
        return conj(random_formula(rng, universe, a, depth - 1) for _ in range(rng.randint(2, 3)))
    if roll < 0.88:
        return disj(random_formula(rng, universe, a, depth - 1) for _ in range(rng.randint(2, 3)))
    return Not(random_formula(rng, universe, a, depth - 1))


def reformulate(rng: random.Random, node, a):
    """A syntactically different formula with exactly the same models:
    converse rewriting, complement double negation, relation splitting,
    child reordering, and De Morgan wrapping."""
    if isinstance(node, Atom):
        roll = rng.random()
        if roll < 0.3:
            return Atom(node.y, a.inverse(node.rel), node.x)
        if roll < 0.5:
            return Not(Atom(node.x, a.complement(node.rel), node.y))
        if roll < 0.7 and popcount(node.rel) >= 2:
            members = list(bits(node.rel))
            cut = rng.randint(1, len(members) - 1)
            left = sum(1 << b for b in members[:cut])
            right = sum(1 << b for b in members[cut:])
            return disj([Atom(node.x, left, node.y), Atom(node.x, right, node.y)])
        return node
    if isinstance(node, Not):
        child = reformulate(rng, node.child, a)
        return Not(Not(Not(child))) if rng.random() < 0.2 else Not(child)
    children = [reformulate(rng, c, a) for c in node.children]
    rng.shuffle(children)
    if isinstance(node, And):
        if rng.random() < 0.25:
            return Not(disj([Not(c) for c in children]))
        return conj(children)
    if rng.random() < 0.25:
        return Not(conj([Not(c) for c in children]))
    return disj(children)


# ---------------------------------------------------------------------------
# RCC8 over grid-cell regions: an exact finite model of the plane
# ---------------------------------------------------------------------------


def _touches(c1: tuple, c2: tuple) -> bool:
    return abs(c1[0] - c2[0]) <= 1 and abs(c1[1] - c2[1]) <= 1


def _closures_touch(r1: frozenset, r2: frozenset) -> bool:
    return any(_touches(c1, c2) for c1 in r1 for c2 in r2)


def _tangential_inside(inner: frozenset, outer: frozenset) -> bool:
    # a boundary point is shared iff some inner cell touches a non-outer cell
    for (i, j) in inner:
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                if (i + di, j + dj) not in outer:
                    return True
    return False


def rcc8_region_rel(r1: frozenset, r2: frozenset) -> str:
    """RCC8 base relation of two unions of closed grid cells in the plane."""
    if r1 == r2:
        return "eq"
    shared = r1 & r2
    if not shared:
        return "ec" if _closures_touch(r1, r2) else "dc"
    if r1 < r2:
        return "tpp" if _tangential_inside(r1, r2) else "ntpp"
    if r2 < r1:
        return "tppi" if _tangential_inside(r2, r1) else "ntppi"
    return "po"


GRID = 6
_CELLS = [(i, j) for i in range(GRID) for j in range(GRID)]


def random_region(rng: random.Random) -> frozenset:
    return frozenset(rng.sample(_CELLS, rng.randint(1, 8)))


def _dilate(region: frozenset) -> frozenset:
    grown = set(region)
    for (i, j) in region:
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                cell = (i + di, j + dj)
                if 0 <= cell[0] < GRID and 0 <= cell[1] < GRID:
                    grown.add(cell)
    return frozenset(grown)


def perturbed_region(rng: random.Random, region: frozenset) -> frozenset:
    """A region related to ``region``: dilated, eroded to a sub-part, or
    jittered; containment relations occur often this way."""
    roll = rng.random()
    if roll < 0.25:
        return _dilate(region)
    if roll < 0.5 and len(region) > 1:
        keep = rng.randint(1, len(region) - 1)
        return frozenset(rng.sample(sorted(region), keep))
    if roll < 0.75:
        out = set(region)
        for _ in range(rng.randint(1, 3)):
            out.add(rng.choice(_CELLS))
        for _ in range(rng.randint(0, 2)):
            if len(out) > 1:
                out.discard(rng.choice(sorted(out)))
        return frozenset(out)
    return random_region(rng)
