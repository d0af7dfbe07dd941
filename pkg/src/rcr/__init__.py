"""Relax, compensate and recover: upper bounds, lower bounds and certified
exact answers for discrete graphical models.

Every pairwise-or-larger factor gets its own copies of its variables; the
copies are tied back to the originals by equivalence constraints that are
relaxed and replaced by single-variable compensation tables.  Tightening
the tables gives an upper bound, decoding gives a lower bound, and
recovering constraints a few at a time closes the gap.
"""

from .bench import GridSpec, generate_clique_chain, generate_grid, run_experiment
from .compensate import (
    BoundContractError,
    ConvergenceReport,
    DegenerateConstraintError,
    NotDecoupledError,
    Scheme,
    compensate,
    dual_objective_closed_form,
    split_correction,
    split_estimate,
    update_dd_binary,
    update_dd_decoupled,
    update_split_pair,
    upper_bound,
)
from .decompose import (
    DecomposedModel,
    EquivalenceConstraint,
    Status,
    fully_decompose,
    project,
    recover,
    violated_constraints,
)
from .exact import Semiring, Task, decode_mpe, make_plan, marginal, pair_marginal, query
from .model import (
    LOG_ZERO,
    Factor,
    FactorGraph,
    ModelError,
    UAIParseError,
    UnsupportedModelError,
    Variable,
    condition,
    evaluate,
    parse_evidence,
    parse_uai,
    read_evidence,
    read_uai,
    write_uai,
)
from .oracle import StateSpaceTooLarge, brute_force
from .recover import (
    BoundState,
    Heuristic,
    RecoveryConfig,
    SolveTrace,
    impact_of_recovery,
    rank_constraints,
    rcr_solve,
)
