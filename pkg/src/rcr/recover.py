"""Recovery heuristics and the relax / compensate / recover solve loop."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from . import exact
from .compensate import Scheme, build_engine, compensate, split_correction
from .decompose import DecomposedModel, fully_decompose, project, recover, violated_constraints
from .exact import Task
from .model import LOG_ZERO, FactorGraph, UnsupportedModelError, evaluate, is_log_zero


class Heuristic(enum.Enum):
    IMPACT = "impact"
    VIOLATION = "violation"
    IMPACT_THEN_VIOLATION = "impact-violation"
    NONE = "none"


@dataclass(frozen=True)
class RecoveryConfig:
    heuristic: Heuristic = Heuristic.IMPACT_THEN_VIOLATION
    batch_size: int = 5
    max_rounds: int | None = None
    task: Task = Task.MPE
    scheme: Scheme = Scheme.MPE_DD
    cost_budget: int | None = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.max_rounds is not None and self.max_rounds < 0:
            raise ValueError("max_rounds must be non-negative")
        if self.heuristic in (Heuristic.VIOLATION, Heuristic.IMPACT_THEN_VIOLATION):
            if self.task is not Task.MPE or self.scheme is not Scheme.MPE_DD:
                raise UnsupportedModelError(
                    f"heuristic {self.heuristic.value} needs task mpe and scheme mpe-dd")

    def check_model(self, fg: FactorGraph):
        nonbinary = [v.id for v in fg.variables if v.cardinality != 2]
        if not nonbinary:
            return
        v = nonbinary[0]
        card = fg.variables[v].cardinality
        if self.heuristic in (Heuristic.IMPACT, Heuristic.IMPACT_THEN_VIOLATION):
            raise UnsupportedModelError(
                f"variable {v} has {card} states; impact-based recovery needs binary variables")
        if self.scheme.is_upper_bound and self.heuristic is not Heuristic.NONE:
            raise UnsupportedModelError(
                f"variable {v} has {card} states; {self.scheme.value} with recovery "
                f"needs binary variables")


@dataclass
class BoundState:
    upper: float
    lower: float = LOG_ZERO
    incumbent: np.ndarray | None = None
    violated: set[int] = field(default_factory=set)
    certified: bool = False


_TRACE_FIELDS = ("round", "recovered_total", "upper_bound_log", "lower_bound_log",
                 "violated_count", "plan_total_table_entries", "certified")


@dataclass
class SolveTrace:
    records: list[dict] = field(default_factory=list)

    def add(self, **rec):
        self.records.append({k: rec[k] for k in _TRACE_FIELDS})

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r) + "\n" for r in self.records)

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())

    def __len__(self):
        return len(self.records)


def impact_of_recovery(dm: DecomposedModel, c: int, task: Task) -> float:
    """The bound that recovering ``c`` alone would give, from one pair marginal."""
    x, xi = dm.endpoints(c)
    g = dm.graph
    if g.variables[x].cardinality != 2:
        raise UnsupportedModelError(
            f"constraint {c}: impact needs binary variables "
            f"(variable {x} has {g.variables[x].cardinality} states)")
    pair = dm.constraints[c].compensation
    pm = exact.pair_marginal(g, task.semiring, x, xi)
    diag = np.diag(pm) - pair.theta_on_original - pair.theta_on_clone
    diag = np.where(is_log_zero(np.diag(pm)), LOG_ZERO, diag)
    return float(task.semiring.combine(diag))


def rank_constraints(dm: DecomposedModel, state: BoundState, config: RecoveryConfig,
                     impacts: dict[int, float] | None = None) -> list[int]:
    """Relaxed constraints in recovery order."""
    relaxed = dm.relaxed()
    h = config.heuristic
    if h is Heuristic.VIOLATION:
        return sorted(relaxed, key=lambda c: (c not in state.violated, c))
    if h is Heuristic.NONE:
        return relaxed
    if impacts is None:
        impacts = {c: impact_of_recovery(dm, c, config.task) for c in relaxed}
    if h is Heuristic.IMPACT:
        return sorted(relaxed, key=lambda c: (impacts[c], c))
    return sorted(relaxed, key=lambda c: (c not in state.violated, impacts[c], c))


def _finish_exact(dm: DecomposedModel, task: Task, state: BoundState):
    g = dm.graph
    value = exact.query(g, task.semiring).value
    state.upper = value
    if task is Task.MPE:
        a = project(dm, exact.decode_mpe(g))
        state.incumbent = a
        state.lower = evaluate(dm.source, a)
    else:
        state.lower = value
    state.violated = set()
    state.certified = True


def rcr_solve(fg: FactorGraph, config: RecoveryConfig, tolerance: float = 1e-8,
              max_iterations: int = 1000) -> tuple[BoundState, SolveTrace]:
    """Relax every constraint, then alternate compensation and batch recovery.

    Each round compensates the relaxed constraints (tables carried over from
    the previous round), bounds, decodes an assignment for the lower bound,
    and stops once nothing is violated, no relaxed constraint is left, the
    round limit is hit, or the next model would exceed ``cost_budget``.
    """
    config.check_model(fg)
    task, scheme = config.task, config.scheme
    task_max = task is Task.MPE
    dm = fully_decompose(fg)
    state = BoundState(upper=np.inf)
    trace = SolveTrace()
    rnd = 0
    while True:
        plan = exact.make_plan(dm.graph)
        if rnd > 0 and config.cost_budget is not None and plan.total_table_entries > config.cost_budget:
            break
        if not dm.relaxed():
            _finish_exact(dm, task, state)
            trace.add(round=rnd, recovered_total=len(dm.recovered()), upper_bound_log=state.upper,
                      lower_bound_log=state.lower, violated_count=0,
                      plan_total_table_entries=plan.total_table_entries, certified=True)
            break

        engine = build_engine(dm)
        report = compensate(dm, scheme, tolerance, max_iterations, engine=engine)
        value = engine.value(task_max)
        if scheme.is_upper_bound:
            state.upper = min(state.upper, value)
        else:
            state.upper = value - split_correction(dm)

        state.violated = set()
        if task_max:
            a = engine.decode()
            state.violated = violated_constraints(dm, a)
            cand = project(dm, a)
            lower = evaluate(fg, cand)
            if state.incumbent is None or lower > state.lower:
                state.lower, state.incumbent = lower, cand
            if (scheme.is_upper_bound and not state.violated
                    and abs(state.upper - state.lower) <= 1e-6):
                state.certified = True

        trace.add(round=rnd, recovered_total=len(dm.recovered()), upper_bound_log=state.upper,
                  lower_bound_log=state.lower, violated_count=len(state.violated),
                  plan_total_table_entries=plan.total_table_entries, certified=state.certified)
        if state.certified or config.heuristic is Heuristic.NONE:
            break
        if config.max_rounds is not None and rnd >= config.max_rounds:
            break

        impacts = None
        if config.heuristic in (Heuristic.IMPACT, Heuristic.IMPACT_THEN_VIOLATION):
            if scheme.semiring is task.semiring and len(report.impacts) == len(dm.relaxed()):
                impacts = report.impacts
            else:
                imp = engine.impacts(task_max)
                impacts = {c: float(imp[c]) for c in dm.relaxed()}
        for c in rank_constraints(dm, state, config, impacts)[: config.batch_size]:
            recover(dm, c)
        rnd += 1
    return state, trace
