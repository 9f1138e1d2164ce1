"""Distance-minimal belief revision and contraction.

Revising old beliefs psi by unquestionable new beliefs mu keeps exactly
the models of mu at minimal scenario distance from the models of psi
(the Katsuno-Mendelzon construction over a distance between
interpretations [AGM 1985; Katsuno & Mendelzon 1991]).  Both operands may
be arbitrary formulas of the propositional closure; the result is always
representable there as a disjunction of scenarios.

The computation puts both operands in negation-free DNF, revises each
pair of plain disjuncts with a best-first search, and keeps the pairs of
globally minimal distance: the minimal distance between unions of model
sets is the minimum of the pairwise distances, and the optimal models of
the whole problem are the union, over the optimal pairs, of each pair's
optimal models.

The per-pair search explores the product of refinements of the two
disjuncts.  A state is a pair of algebraically closed formulas; its
admissible cost is the sum, over ordered variable pairs, of the minimum
neighborhood distance across the two remaining relation sets.  That
bound never decreases under refinement and is exact when both sides are
scenarios, so a best-first expansion pops final states in true distance
order.  The search keeps popping until the frontier minimum exceeds the
best final cost, collecting every optimal scenario, and fails when a
bound ``distmax`` prunes everything.

Contraction (giving up mu without adding anything) is revision by the
negation: psi contracted by mu keeps psi's models and adds the closest
models of not-mu.
"""

from __future__ import annotations

import heapq
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import inf

from .algebra import AlgebraSpec, bits, popcount
from .closure import (
    Atom,
    ClosureFormula,
    DNF,
    Not,
    disj,
    scenarios_to_formula,
    to_dnf_won,
    unsat_formula,
)
from .errors import TimeBudgetExceeded, UniverseMismatch
from .qcn import (
    QAFormula,
    Universe,
    close_from,
    is_consistent,
    path_closure,
    scenarios,
)


@dataclass(frozen=True)
class RevisionProblem:
    """One revision instance: psi revised by mu over a fixed universe."""

    psi: ClosureFormula
    mu: ClosureFormula
    universe: Universe
    algebra: AlgebraSpec


@dataclass(frozen=True)
class QaRevision:
    """Outcome of revising one plain conjunction by another.

    ``delta`` is the minimal scenario distance between the two model
    sets; ``scenarios`` are the mu-side scenarios attaining it.
    """

    delta: int
    scenarios: tuple[QAFormula, ...]


def _pair_bound(psi: QAFormula, mu: QAFormula, a: AlgebraSpec) -> int:
    """Admissible distance bound: per ordered pair, the minimum
    neighborhood distance over the cross product of the two relations."""
    total = 0
    min_rel_distance = a.min_rel_distance
    n = psi.n
    for i in range(n):
        row = i * n
        for j in range(n):
            if i != j:
                total += min_rel_distance(psi.rels[row + j], mu.rels[row + j])
    return total


def _split_choice(psi: QAFormula, mu: QAFormula, a: AlgebraSpec):
    """Pick the side and unordered pair to branch on.

    Chooses the pair whose member-wise bound contributions spread the
    least (ties by side then declaration order), which keeps sibling
    costs close to the parent bound and the frontier shallow.
    """
    best = None
    best_key = None
    for side, (phi, other) in enumerate(((psi, mu), (mu, psi))):
        for i, j in phi.unordered_pairs():
            rel = phi.rel_idx(i, j)
            if popcount(rel) < 2:
                continue
            opposing = other.rel_idx(i, j)
            contributions = [a.min_rel_distance(1 << b, opposing) for b in bits(rel)]
            gap = max(contributions) - min(contributions)
            key = (gap, side, i, j)
            if best_key is None or key < best_key:
                best_key = key
                best = (side, i, j)
    return best


def revise_qa(
    psi: QAFormula,
    mu: QAFormula,
    distmax: float = inf,
    a: AlgebraSpec | None = None,
) -> QaRevision | None:
    """Revise one normal-form conjunction by another.

    Returns the minimal distance and all mu-side scenarios attaining it,
    or None (failure) when either operand is inconsistent or no final
    state costs at most ``distmax``.
    """
    if a is None:
        raise TypeError("revise_qa needs an algebra")
    if psi.universe != mu.universe:
        raise UniverseMismatch(f"{psi.universe} vs {mu.universe}")

    psi0 = path_closure(psi, a)
    mu0 = path_closure(mu, a)
    if psi0.has_empty() or mu0.has_empty():
        return None

    start = (psi0, mu0)
    h0 = _pair_bound(psi0, mu0, a)
    if h0 > distmax:
        return None
    counter = 0
    frontier: list[tuple[int, int, tuple[QAFormula, QAFormula]]] = [(h0, counter, start)]
    seen = {start}
    delta: int | None = None
    optimal: dict[QAFormula, None] = {}

    while frontier:
        f, _, (p, m) = heapq.heappop(frontier)
        if f > distmax or (delta is not None and f > delta):
            break
        choice = _split_choice(p, m, a)
        if choice is None:
            # both sides are closed scenarios; the bound is exact here
            if delta is None:
                delta = f
            optimal.setdefault(m)
            continue
        side, i, j = choice
        phi = (p, m)[side]
        for b in bits(phi.rel_idx(i, j)):
            child_side = close_from(phi.with_pair(i, j, 1 << b, a), ((i, j),), a)
            if child_side.has_empty():
                continue
            child = (child_side, m) if side == 0 else (p, child_side)
            if child in seen:
                continue
            seen.add(child)
            fc = _pair_bound(child[0], child[1], a)
            if fc > distmax or (delta is not None and fc > delta):
                continue
            counter += 1
            heapq.heappush(frontier, (fc, counter, child))

    if delta is None:
        return None
    ordered = sorted(optimal, key=lambda s: s.rels)
    return QaRevision(delta, tuple(ordered))


def _consistent_disjuncts(dnf: DNF, a: AlgebraSpec) -> list[QAFormula]:
    if dnf.is_unsat:
        return []
    return [d for d in dnf.disjuncts if is_consistent(d, a)]


def _revision_scenarios(
    problem: RevisionProblem,
    jobs: int = 1,
    deadline: float | None = None,
    distmax: float = inf,
):
    """Shared core of revise(): (delta, mu-side scenarios) or degenerate markers.

    Returns (None, None) when mu is inconsistent, (None, scenarios) when
    psi is inconsistent (every model of mu is vacuously minimal), and
    (None, ()) when ``distmax`` pruned every pair.
    """
    a = problem.algebra
    universe = tuple(problem.universe)
    psi_disjuncts = _consistent_disjuncts(to_dnf_won(problem.psi, universe, a), a)
    mu_disjuncts = _consistent_disjuncts(to_dnf_won(problem.mu, universe, a), a)

    if not mu_disjuncts:
        return None, None
    if not psi_disjuncts:
        collected: dict[QAFormula, None] = {}
        for d in mu_disjuncts:
            for sc in scenarios(d, a):
                if sc not in collected and not path_closure(sc, a).has_empty():
                    collected[sc] = None
        return None, tuple(sorted(collected, key=lambda s: s.rels))

    pairs = [(p, m) for p in psi_disjuncts for m in mu_disjuncts]
    best: dict[QAFormula, None] = {}
    state = {"distmax": distmax, "delta": None}
    lock = threading.Lock()

    def check_deadline():
        if deadline is not None and time.monotonic() > deadline:
            raise TimeBudgetExceeded("revision exceeded its time budget")

    def run_pair(pair):
        check_deadline()
        bound = state["distmax"]  # stale reads only waste work
        return revise_qa(pair[0], pair[1], bound, a)

    def merge(outcome: QaRevision | None):
        if outcome is None:
            return
        with lock:
            if state["delta"] is None or outcome.delta < state["delta"]:
                state["delta"] = outcome.delta
                state["distmax"] = outcome.delta
                best.clear()
                for s in outcome.scenarios:
                    best.setdefault(s)
            elif outcome.delta == state["delta"]:
                for s in outcome.scenarios:
                    best.setdefault(s)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for outcome in pool.map(run_pair, pairs):
                merge(outcome)
    else:
        for pair in pairs:
            merge(run_pair(pair))

    # a consistent disjunct always admits some scenario, so a delta exists
    return state["delta"], tuple(sorted(best, key=lambda s: s.rels))


def revise(
    problem: RevisionProblem,
    jobs: int = 1,
    time_budget: float | None = None,
    distmax: float = inf,
) -> ClosureFormula:
    """Revision over the propositional closure.

    Degenerate operands have defined results: an inconsistent mu yields
    the canonical inconsistent formula, and an inconsistent psi yields a
    disjunction of all of mu's models (nothing needs repair, mu is
    adopted wholesale).  A finite ``distmax`` that prunes every disjunct
    pair also yields the inconsistent formula.
    """
    deadline = None if time_budget is None else time.monotonic() + time_budget
    delta, scens = _revision_scenarios(problem, jobs=jobs, deadline=deadline, distmax=distmax)
    universe = tuple(problem.universe)
    if scens is None or not scens:
        return unsat_formula(universe)
    return scenarios_to_formula(scens, problem.algebra, universe)


def contract(problem: RevisionProblem, jobs: int = 1, time_budget: float | None = None) -> ClosureFormula:
    """Contraction via revision by the negation: psi or (psi revised by not-mu).

    The result never entails mu when not-mu is consistent, because it
    keeps at least one model violating mu.
    """
    negated = RevisionProblem(problem.psi, Not(problem.mu), problem.universe, problem.algebra)
    revised = revise(negated, jobs=jobs, time_budget=time_budget)
    if isinstance(revised, Atom) and revised.rel == 0:
        return problem.psi  # not-mu inconsistent: nothing to add
    return disj([problem.psi, revised])


def revision_delta(problem: RevisionProblem, jobs: int = 1) -> int | None:
    """The minimal distance of a revision problem, or None when undefined
    (inconsistent mu, or inconsistent psi where every model of mu is
    vacuously minimal)."""
    delta, _ = _revision_scenarios(problem, jobs=jobs)
    return delta


def revision_outcome(
    problem: RevisionProblem,
    jobs: int = 1,
    time_budget: float | None = None,
    distmax: float = inf,
):
    """(delta, mu-side scenarios) as computed by revise(); see revise for
    the degenerate-case conventions."""
    deadline = None if time_budget is None else time.monotonic() + time_budget
    return _revision_scenarios(problem, jobs=jobs, deadline=deadline, distmax=distmax)
