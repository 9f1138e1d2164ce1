"""Command-line interface.

Subcommands: revise, contract, consistent, dnf, models, bench,
dump-algebra.  Exit codes: 0 success, 1 inconsistent result, 2 parse or
validation error, 3 resource bound exceeded.  Diagnostics go to stderr
with line/column positions where available.  All output is ASCII and
deterministic (disjunct lines sort lexicographically).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .algebra import AlgebraSpec, BUILTIN_SPEC_TEXTS, builtin, load_algebra
from .bench import format_csv, format_table, run_bench
from .closure import (
    Atom,
    DEFAULT_ORACLE_BOUND,
    Not,
    ProblemDocument,
    format_formula,
    format_qaformula,
    models,
    parse_problem,
    to_dnf_base,
    to_dnf_won,
)
from .errors import (
    AlgebraError,
    FormulaError,
    InvalidParameters,
    QrevError,
    TimeBudgetExceeded,
    UniverseTooLarge,
)
from .qcn import is_consistent, normalize
from .revision import RevisionProblem, contract, revise, revision_outcome

EXIT_OK = 0
EXIT_INCONSISTENT = 1
EXIT_INPUT_ERROR = 2
EXIT_RESOURCE = 3


class _CliFailure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load_algebra_arg(selector: str) -> AlgebraSpec:
    if selector in BUILTIN_SPEC_TEXTS:
        return builtin(selector)
    path = Path(selector)
    if not path.exists():
        raise _CliFailure(EXIT_INPUT_ERROR, f"no built-in algebra or file named {selector!r}")
    try:
        return load_algebra(path.read_text())
    except AlgebraError as exc:
        raise _CliFailure(EXIT_INPUT_ERROR, f"{selector}: {exc}") from exc


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    p = Path(path)
    if not p.exists():
        raise _CliFailure(EXIT_INPUT_ERROR, f"no such file: {path}")
    return p.read_text()


def _parse_document(path: str, a: AlgebraSpec) -> ProblemDocument:
    try:
        return parse_problem(_read_input(path), a)
    except FormulaError as exc:
        raise _CliFailure(EXIT_INPUT_ERROR, str(exc)) from exc


def _require_revision_document(doc: ProblemDocument) -> None:
    if doc.psi is None or doc.mu is None:
        raise _CliFailure(EXIT_INPUT_ERROR, "document needs both psi: and mu: sections")


def _require_single_formula(doc: ProblemDocument):
    if doc.mu is not None:
        raise _CliFailure(EXIT_INPUT_ERROR, "expected a single formula, not psi:/mu: sections")
    if doc.psi is None:
        raise _CliFailure(EXIT_INPUT_ERROR, "empty document")
    return doc.psi


def _scenario_lines(scens, a: AlgebraSpec) -> list[str]:
    return sorted(format_qaformula(s, a) for s in scens)


def _cmd_revise(args) -> int:
    a = _load_algebra_arg(args.algebra)
    doc = _parse_document(args.input, a)
    _require_revision_document(doc)
    problem = RevisionProblem(doc.psi, doc.mu, doc.universe, a)
    distmax = float("inf") if args.distmax is None else args.distmax
    try:
        delta, scens = revision_outcome(
            problem, jobs=args.jobs, time_budget=args.time_budget, distmax=distmax
        )
    except TimeBudgetExceeded as exc:
        raise _CliFailure(EXIT_RESOURCE, str(exc)) from exc
    if scens is None:
        print("UNSAT")
        return EXIT_INCONSISTENT
    if not scens:
        print("failure")  # every disjunct pair pruned by --distmax
        return EXIT_INCONSISTENT
    print(f"delta: {0 if delta is None else delta}")
    for line in _scenario_lines(scens, a):
        print(line)
    return EXIT_OK


def _cmd_contract(args) -> int:
    a = _load_algebra_arg(args.algebra)
    doc = _parse_document(args.input, a)
    _require_revision_document(doc)
    problem = RevisionProblem(doc.psi, doc.mu, doc.universe, a)
    if args.show_delta:
        negated = RevisionProblem(doc.psi, Not(doc.mu), doc.universe, a)
        delta, _ = revision_outcome(negated, jobs=args.jobs)
        print(f"delta: {0 if delta is None else delta}")
    try:
        result = contract(problem, jobs=args.jobs, time_budget=args.time_budget)
    except TimeBudgetExceeded as exc:
        raise _CliFailure(EXIT_RESOURCE, str(exc)) from exc
    if isinstance(result, Atom) and result.rel == 0:
        print("UNSAT")
        return EXIT_INCONSISTENT
    print(format_formula(result, a))
    return EXIT_OK


def _cmd_consistent(args) -> int:
    a = _load_algebra_arg(args.algebra)
    doc = _parse_document(args.input, a)
    phi = _require_single_formula(doc)
    dnf = to_dnf_won(phi, doc.universe, a)
    ok = not dnf.is_unsat and any(is_consistent(d, a) for d in dnf.disjuncts)
    print("yes" if ok else "no")
    return EXIT_OK


def _cmd_dnf(args) -> int:
    a = _load_algebra_arg(args.algebra)
    doc = _parse_document(args.input, a)
    phi = _require_single_formula(doc)
    dnf = (to_dnf_base if args.base else to_dnf_won)(phi, doc.universe, a)
    if dnf.is_unsat:
        print("UNSAT")
        return EXIT_OK
    print("vars " + " ".join(doc.universe))
    for line in sorted(format_qaformula(d, a) for d in dnf.disjuncts):
        print(line)
    return EXIT_OK


def _cmd_models(args) -> int:
    a = _load_algebra_arg(args.algebra)
    doc = _parse_document(args.input, a)
    phi = _require_single_formula(doc)
    try:
        found = models(phi, doc.universe, a, bound=args.oracle_bound)
    except UniverseTooLarge as exc:
        raise _CliFailure(EXIT_RESOURCE, str(exc)) from exc
    print("vars " + " ".join(doc.universe))
    for line in _scenario_lines(found, a):
        print(line)
    return EXIT_OK


def _cmd_bench(args) -> int:
    a = _load_algebra_arg(args.algebra)
    try:
        params = []
        for chunk in args.grid.split(";"):
            n_str, p_str = chunk.split(",")
            params.append((int(n_str), int(p_str)))
    except ValueError as exc:
        raise _CliFailure(EXIT_INPUT_ERROR, f"bad --grid value {args.grid!r}") from exc
    try:
        rows, _ = run_bench(params, a, time_budget=args.time_budget or 3600.0, jobs=args.jobs)
    except (InvalidParameters, TimeBudgetExceeded) as exc:
        raise _CliFailure(EXIT_INPUT_ERROR, str(exc)) from exc
    if args.format == "csv":
        print(format_csv(rows))
    else:
        print(format_table(rows, time_budget=args.time_budget or 3600.0))
    return EXIT_OK


def _cmd_dump_algebra(args) -> int:
    if args.algebra in BUILTIN_SPEC_TEXTS:
        sys.stdout.write(BUILTIN_SPEC_TEXTS[args.algebra])
        return EXIT_OK
    path = Path(args.algebra)
    if not path.exists():
        raise _CliFailure(EXIT_INPUT_ERROR, f"no built-in algebra or file named {args.algebra!r}")
    text = path.read_text()
    try:
        load_algebra(text)
    except AlgebraError as exc:
        raise _CliFailure(EXIT_INPUT_ERROR, f"{args.algebra}: {exc}") from exc
    sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qrev",
        description="Belief revision and contraction in the propositional closure of qualitative algebras.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_input=True):
        p.add_argument("--algebra", default="allen", help="built-in name (allen, rcc8) or spec-file path")
        if with_input:
            p.add_argument("input", help="problem document path, or - for stdin")

    p = sub.add_parser("revise", help="revise psi by mu; prints delta and one scenario per line")
    add_common(p)
    p.add_argument("--distmax", type=float, default=None, help="report UNSAT when the distance exceeds this bound")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--time-budget", type=float, default=None, help="seconds; exceeded -> exit 3")
    p.set_defaults(func=_cmd_revise)

    p = sub.add_parser("contract", help="contract psi by mu (revision by the negation)")
    add_common(p)
    p.add_argument("--show-delta", action="store_true", help="also print the revision distance")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--time-budget", type=float, default=None)
    p.set_defaults(func=_cmd_contract)

    p = sub.add_parser("consistent", help="print yes/no for a single formula")
    add_common(p)
    p.set_defaults(func=_cmd_consistent)

    p = sub.add_parser("dnf", help="print the negation-free DNF, one disjunct per line")
    add_common(p)
    p.add_argument("--base", action="store_true", help="split constraints down to base relations")
    p.set_defaults(func=_cmd_dnf)

    p = sub.add_parser("models", help="enumerate models (small universes only)")
    add_common(p)
    p.add_argument("--oracle-bound", type=int, default=DEFAULT_ORACLE_BOUND)
    p.set_defaults(func=_cmd_models)

    p = sub.add_parser("bench", help="run the scheduling benchmark family")
    add_common(p, with_input=False)
    p.add_argument("--grid", default="3,0;3,1;4,0", help="semicolon-separated n,p pairs")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--time-budget", type=float, default=None, help="seconds per (n,p) row; exceeded rows are marked")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("dump-algebra", help="print an algebra-spec document")
    add_common(p, with_input=False)
    p.set_defaults(func=_cmd_dump_algebra)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CliFailure as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except QrevError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INPUT_ERROR


def main_entry() -> None:
    sys.exit(main())
