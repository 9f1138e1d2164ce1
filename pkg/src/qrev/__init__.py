"""Belief revision and contraction in the propositional closure of
qualitative algebras (Allen interval algebra and RCC8 built in, others
loadable from spec documents)."""

from .algebra import (
    AlgebraSpec,
    BaseRelation,
    Relation,
    allen,
    builtin,
    load_algebra,
    rcc8,
)
from .closure import (
    And,
    Atom,
    ClosureFormula,
    DNF,
    Not,
    Or,
    conj,
    disj,
    equivalent,
    format_formula,
    format_qaformula,
    models,
    parse,
    parse_problem,
    qaformula_to_closure,
    satisfies,
    scenarios_to_formula,
    to_dnf_base,
    to_dnf_won,
    unsat_formula,
)
from .errors import (
    AlgebraError,
    DisconnectedNeighborGraph,
    DuplicateRelationName,
    EmptyRelationPresent,
    FormulaError,
    FormulaSyntaxError,
    IncompleteCompositionTable,
    InvalidParameters,
    MissingIdentity,
    NonInvolutiveInverse,
    QrevError,
    SelfConstraint,
    TimeBudgetExceeded,
    UniverseMismatch,
    UniverseTooLarge,
    UnknownRelationToken,
    UnknownVariable,
    Unrealizable,
)
from .qcn import (
    Constraint,
    QAFormula,
    all_top,
    consistent_scenarios,
    is_arc_consistent,
    is_consistent,
    is_path_consistent,
    normalize,
    path_closure,
    realize_allen_scenario,
    scenario_distance,
    scenarios,
)
from .revision import (
    QaRevision,
    RevisionProblem,
    contract,
    revise,
    revise_qa,
    revision_delta,
    revision_outcome,
)
from .bench import (
    BenchRow,
    ScheduleProblem,
    VariantResult,
    format_csv,
    format_table,
    generate_schedule,
    run_bench,
)

__version__ = "0.1.0"
