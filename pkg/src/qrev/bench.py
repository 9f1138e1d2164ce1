"""Parametrized scheduling problems and a benchmark runner.

The generator builds the morning-schedule family: n courses must each
occupy one of n meets-chained periods, no two courses may share a
period, last year's assignment is the old belief, and this year one
pair of courses assigned to consecutive periods must be separated by a
strict gap.  Revising the old assignment by the new constraint yields
the minimal reshufflings.

Parameters: ``n`` courses and periods, ``p`` extra break intervals
spliced into the period chain at evenly spread positions, and a
``variant`` index choosing which consecutive course pair the gap
constraint targets.  Pairs whose periods are already separated by a
break satisfy the gap constraint outright (distance 0), so the variant
indexes only the pairs still meeting directly, cycling when breaks
reduce their number; every generated instance therefore has a strictly
positive revision distance.

The runner revises each variant, averages distance and wall time per
(n, p), and renders an aligned text table plus CSV rows
``n,p,variables,delta,seconds``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .algebra import AlgebraSpec, allen
from .closure import Atom, ClosureFormula, Not, conj, disj
from .errors import InvalidParameters, TimeBudgetExceeded
from .qcn import Universe
from .revision import RevisionProblem, revision_outcome

ZOE_COURSES = ("English", "biology", "history", "maths")
ZOE_PERIODS = ("p8-9", "p9-10", "p10-11", "p11-12")


@dataclass(frozen=True)
class ScheduleProblem:
    n: int
    p: int
    variant: int
    courses: tuple[str, ...]
    periods: tuple[str, ...]
    breaks: tuple[str, ...]
    constrained_pair: tuple[str, str]
    psi_hat: ClosureFormula
    mu_hat: ClosureFormula
    universe: Universe


@dataclass(frozen=True)
class BenchRow:
    n: int
    p: int
    variable_count: int
    delta: float | None  # average over the variant series; None when over budget
    wall_time: float | None


def _chain(names: list[str], meets: int) -> list[Atom]:
    return [Atom(a, meets, b) for a, b in zip(names, names[1:])]


def generate_schedule(n: int, p: int, variant: int, a: AlgebraSpec | None = None) -> ScheduleProblem:
    """Build one instance of the scheduling family.

    Universe size is 2n + p.  ``variant`` must lie in [0, n-1); it
    selects a consecutive course pair among those whose periods still
    meet directly (cycling when breaks removed some), so the revision
    distance is strictly positive.
    """
    if a is None:
        a = allen()
    if n < 2 or p < 0 or not (0 <= variant < n - 1):
        raise InvalidParameters(f"n={n}, p={p}, variant={variant}")

    if n == 4:
        courses, periods = list(ZOE_COURSES), list(ZOE_PERIODS)
    else:
        courses = [f"course{k}" for k in range(1, n + 1)]
        periods = [f"period{k}" for k in range(1, n + 1)]
    breaks = [f"break{k}" for k in range(1, p + 1)]

    meets = a.relation("m")
    eq = a.relation("eq")
    gap = a.relation("b", "bi")

    # splice breaks into the period chain at evenly spread gap positions
    gap_of_break = [k * (n - 1) // (p + 1) for k in range(1, p + 1)]
    chain: list[list[str]] = [[q] for q in periods]
    for br, g in zip(breaks, gap_of_break):
        chain[g].append(br)
    sequence = [v for cell in chain for v in cell]
    beta1 = _chain(sequence, meets)

    beta2 = [
        Not(Atom(c1, eq, c2))
        for i, c1 in enumerate(courses)
        for c2 in courses[i + 1 :]
    ]
    beta3 = [disj([Atom(c, eq, q) for q in periods]) for c in courses]
    pi = [Atom(c, eq, q) for c, q in zip(courses, periods)]

    direct_pairs = [k for k in range(n - 1) if not chain[k][1:]]
    if not direct_pairs:
        raise InvalidParameters(f"no directly meeting period pair for n={n}, p={p}")
    k = direct_pairs[variant % len(direct_pairs)]
    pair = (courses[k], courses[k + 1])
    gamma = Atom(pair[0], gap, pair[1])

    background = beta1 + beta2 + beta3
    psi_hat = conj(background + pi)
    mu_hat = conj(background + [gamma])
    universe = tuple(courses) + tuple(periods) + tuple(breaks)
    return ScheduleProblem(
        n=n,
        p=p,
        variant=variant,
        courses=tuple(courses),
        periods=tuple(periods),
        breaks=tuple(breaks),
        constrained_pair=pair,
        psi_hat=psi_hat,
        mu_hat=mu_hat,
        universe=universe,
    )


@dataclass(frozen=True)
class VariantResult:
    n: int
    p: int
    variant: int
    delta: int
    seconds: float


def run_bench(
    params: list[tuple[int, int]],
    a: AlgebraSpec | None = None,
    time_budget: float = 3600.0,
    jobs: int = 1,
) -> tuple[list[BenchRow], list[VariantResult]]:
    """Run the variant series for each (n, p) and average the results.

    Each (n, p) runs its n-1 variants inside ``time_budget`` seconds;
    exceeding it marks the row (delta and time None) and moves on.
    """
    if a is None:
        a = allen()
    rows: list[BenchRow] = []
    details: list[VariantResult] = []
    for n, p in params:
        deltas: list[int] = []
        times: list[float] = []
        row_start = time.perf_counter()
        exceeded = False
        for variant in range(n - 1):
            if time.perf_counter() - row_start > time_budget:
                exceeded = True
                break
            problem = generate_schedule(n, p, variant, a)
            rev_problem = RevisionProblem(problem.psi_hat, problem.mu_hat, problem.universe, a)
            t0 = time.perf_counter()
            delta, _ = revision_outcome(rev_problem, jobs=jobs)
            elapsed = time.perf_counter() - t0
            if delta is None:
                raise TimeBudgetExceeded(
                    f"degenerate schedule instance n={n} p={p} variant={variant}"
                )
            deltas.append(delta)
            times.append(elapsed)
            details.append(VariantResult(n, p, variant, delta, elapsed))
        if exceeded or not deltas:
            rows.append(BenchRow(n, p, 2 * n + p, None, None))
        else:
            rows.append(
                BenchRow(n, p, 2 * n + p, sum(deltas) / len(deltas), sum(times) / len(times))
            )
    return rows, details


def format_table(rows: list[BenchRow], time_budget: float = 3600.0) -> str:
    """Aligned text table of averaged results."""
    header = ("n", "p", "#Variables", "Avg distance", "Avg time (s)")
    cells = [header]
    for r in rows:
        if r.delta is None:
            cells.append((str(r.n), str(r.p), str(r.variable_count), "-", f"> {time_budget:g}"))
        else:
            cells.append(
                (str(r.n), str(r.p), str(r.variable_count), f"{r.delta:.1f}", f"{r.wall_time:.3f}")
            )
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = []
    for row in cells:
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
    return "\n".join(lines)


def format_csv(rows: list[BenchRow]) -> str:
    lines = ["n,p,variables,delta,seconds"]
    for r in rows:
        delta = "" if r.delta is None else f"{r.delta:g}"
        seconds = "" if r.wall_time is None else f"{r.wall_time:.6f}"
        lines.append(f"{r.n},{r.p},{r.variable_count},{delta},{seconds}")
    return "\n".join(lines)
