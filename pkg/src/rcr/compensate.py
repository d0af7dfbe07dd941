"""Compensation schemes for relaxed equivalence constraints.

Three schemes are supported:

* ``MODEL_SPLIT``: normalized sum-product updates; on a fully decomposed
  model this is iterative belief propagation.
* ``PR_DD`` / ``MPE_DD``: tables satisfying ``theta(x) * theta(x_i) = 1``
  (so every compensated value is an upper bound) and equalizing the
  sum-product / max-product marginals of ``X`` and ``X_i``.

The single-constraint update functions here work on the materialized graph
through :mod:`rcr.exact` and serve as the reference implementation.
:func:`compensate` runs full sweeps on the compiled junction forest.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import exact
from ._forest import MODEL_SPLIT, MPE_DD, PR_DD, THETA_FLOOR, JunctionForest
from .decompose import CompensationPair, DecomposedModel
from .exact import Semiring, Task
from .model import LOG_ZERO, Potential, UnsupportedModelError, is_log_zero, saturate

EQ2_TOLERANCE = 1e-9


class Scheme(enum.Enum):
    MODEL_SPLIT = "model-split"
    PR_DD = "pr-dd"
    MPE_DD = "mpe-dd"

    @property
    def semiring(self) -> Semiring:
        return Semiring.MAX_PRODUCT if self is Scheme.MPE_DD else Semiring.SUM_PRODUCT

    @property
    def is_upper_bound(self) -> bool:
        return self is not Scheme.MODEL_SPLIT

    @property
    def _code(self) -> int:
        return {Scheme.MODEL_SPLIT: MODEL_SPLIT, Scheme.PR_DD: PR_DD, Scheme.MPE_DD: MPE_DD}[self]


class DegenerateConstraintError(ValueError):
    pass


class NotDecoupledError(ValueError):
    pass


class BoundContractError(ValueError):
    """Compensation tables violate theta(x) * theta(x_i) = 1, so no bound holds."""


class CompensationWarning(UserWarning):
    pass


@dataclass
class ConvergenceReport:
    iterations: int
    max_delta: float
    converged: bool
    bound_trajectory: np.ndarray
    warnings: int = 0
    update_trajectory: np.ndarray | None = None  # (iterations, relaxed constraints) if recorded
    impacts: dict[int, float] = field(default_factory=dict, repr=False)


# ---------------------------------------------------------------------------
# reference single-constraint updates


def _components(dm: DecomposedModel) -> np.ndarray:
    g = dm.graph
    root = list(range(g.num_variables))

    def find(u):
        while root[u] != u:
            root[u] = root[root[u]]
            u = root[u]
        return u

    for f in g.factors:
        if isinstance(f.kind, Potential):
            for u in f.scope[1:]:
                ru, rv = find(u), find(f.scope[0])
                if ru != rv:
                    root[ru] = rv
    return np.array([find(v) for v in range(g.num_variables)])


def _relaxed_pair(dm: DecomposedModel, c: int) -> CompensationPair:
    con = dm.constraints[c]
    if not con.relaxed:
        raise ValueError(f"constraint {c} is not relaxed")
    return con.compensation


def _divide(marg: np.ndarray, theta: np.ndarray) -> np.ndarray:
    return np.where(is_log_zero(marg), LOG_ZERO, marg - theta)


def _store(dm: DecomposedModel, c: int, theta_o, theta_i):
    dm.constraints[c].compensation = CompensationPair(np.array(theta_o, dtype=float),
                                                      np.array(theta_i, dtype=float))
    dm.invalidate()


def update_split_pair(dm: DecomposedModel, c: int) -> None:
    """theta(x) <- alpha Z(x_i)/theta(x_i), theta(x_i) <- alpha Z(x)/theta(x), each summing to 1."""
    pair = _relaxed_pair(dm, c)
    x, xi = dm.endpoints(c)
    g = dm.graph
    s = Semiring.SUM_PRODUCT
    a = _divide(exact.marginal(g, s, x), pair.theta_on_original)
    b = _divide(exact.marginal(g, s, xi), pair.theta_on_clone)
    za, zb = exact.logsumexp(a), exact.logsumexp(b)
    if is_log_zero(za) or is_log_zero(zb):
        raise DegenerateConstraintError(f"constraint {c}: every state has zero marginal")
    _store(dm, c, np.maximum(b - zb, THETA_FLOOR), np.maximum(a - za, THETA_FLOOR))


def _dd_semiring(scheme: Scheme) -> Semiring:
    if not scheme.is_upper_bound:
        raise ValueError(f"{scheme.value} is not a dual-decomposition scheme")
    return scheme.semiring


def update_dd_decoupled(dm: DecomposedModel, c: int, scheme: Scheme) -> None:
    """Closed-form update for a constraint whose ends lie in different components.

    ``theta(x) = ((Z(x_i)/theta(x_i)) / (Z(x)/theta(x)))**0.5`` and
    ``theta(x_i) = 1/theta(x)``, with ``mpe`` in place of ``Z`` for MPE_DD.
    States with a zero marginal keep their current tables.
    """
    s = _dd_semiring(scheme)
    pair = _relaxed_pair(dm, c)
    x, xi = dm.endpoints(c)
    comp = _components(dm)
    if comp[x] == comp[xi]:
        raise NotDecoupledError(
            f"constraint {c}: X and X_i share a component; use update_dd_binary")
    g = dm.graph
    a = _divide(exact.marginal(g, s, x), pair.theta_on_original)
    b = _divide(exact.marginal(g, s, xi), pair.theta_on_clone)
    dead = is_log_zero(a) | is_log_zero(b)
    theta = np.where(dead, pair.theta_on_original, 0.5 * (b - a))
    if dead.any():
        warnings.warn(f"constraint {c}: {int(dead.sum())} zero-marginal state(s) skipped",
                      CompensationWarning, stacklevel=2)
    _store(dm, c, theta, -theta)


def update_dd_binary(dm: DecomposedModel, c: int, scheme: Scheme) -> None:
    """Binary update valid in any model, with theta(not x) = theta(not x_i) = 1.

    ``x`` is state 0; ``theta(x)`` is the square root of the ratio of the
    cross pair marginals ``Z(not x, x_i)`` over ``Z(x, not x_i)``, each with
    this constraint's tables divided out.
    """
    s = _dd_semiring(scheme)
    pair = _relaxed_pair(dm, c)
    x, xi = dm.endpoints(c)
    g = dm.graph
    if g.variables[x].cardinality != 2:
        raise UnsupportedModelError(
            f"constraint {c}: the binary update needs binary variables "
            f"(variable {x} has {g.variables[x].cardinality} states)")
    pm = exact.pair_marginal(g, s, x, xi)
    r = _divide(pm, pair.theta_on_original[:, None] + pair.theta_on_clone[None, :])
    r10, r01 = r[1, 0], r[0, 1]
    if is_log_zero(r10) or is_log_zero(r01):
        warnings.warn(f"constraint {c}: a cross pair marginal is zero; update skipped",
                      CompensationWarning, stacklevel=2)
        return
    t = 0.5 * (r10 - r01)
    _store(dm, c, np.array([t, 0.0]), np.array([-t, 0.0]))


# ---------------------------------------------------------------------------
# sweeps, bounds


def check_upper_bound_tables(dm: DecomposedModel, tol: float = EQ2_TOLERANCE) -> None:
    for c in dm.relaxed():
        r = dm.constraints[c].compensation.upper_bound_residual()
        if r > tol:
            raise BoundContractError(
                f"constraint {c}: log theta(x) + log theta(x_i) deviates by {r:.3g}")


def build_engine(dm: DecomposedModel) -> JunctionForest:
    ends = {c: dm.endpoints(c) for c in dm.relaxed()}
    theta_o, theta_i = dm.thetas()
    return JunctionForest(dm.graph, ends, theta_o, theta_i)


def _check_scheme(dm: DecomposedModel, scheme: Scheme, engine: JunctionForest):
    if not scheme.is_upper_bound:
        return
    g = dm.graph
    for c, same in engine.same_component.items():
        x = dm.constraints[c].original
        if same and g.variables[x].cardinality != 2:
            raise UnsupportedModelError(
                f"constraint {c}: {scheme.value} on a non-decomposed constraint needs "
                f"binary variables (variable {x} has {g.variables[x].cardinality} states)")


def compensate(dm: DecomposedModel, scheme: Scheme, tolerance: float = 1e-8,
               max_iterations: int = 1000, *, record_updates: bool = False,
               engine: JunctionForest | None = None) -> ConvergenceReport:
    """Round-robin single-constraint updates until the tables settle.

    Constraints are visited in id order with fresh marginals before each
    update.  Constraints whose ends are in different components get the
    closed-form decoupled update; the others get the binary update.  The
    compensated tables are written back into ``dm``.
    """
    engine = engine if engine is not None else build_engine(dm)
    _check_scheme(dm, scheme, engine)
    res = engine.sweeps(scheme._code, tolerance, max_iterations, record_updates)
    if res["error_constraint"] >= 0:
        raise DegenerateConstraintError(
            f"constraint {res['error_constraint']}: every state has zero marginal")
    dm.set_thetas(engine.theta_o, engine.theta_i)
    impacts = {int(c): float(res["impacts"][c]) for c in engine.active
               if not np.isnan(res["impacts"][c])}
    return ConvergenceReport(res["iterations"], res["max_delta"], res["converged"],
                             res["trajectory"], res["warnings"], res["update_trajectory"],
                             impacts)


def upper_bound(dm: DecomposedModel, task: Task) -> float:
    """Compensated MPE value or log partition function; a bound on the source's."""
    check_upper_bound_tables(dm)
    return exact.query(dm.graph, task.semiring).value


def split_correction(dm: DecomposedModel) -> float:
    """Sum over relaxed constraints of ``log sum_x theta(x) theta(x_i)``.

    With model-split tables, subtracting this from the compensated log Z
    gives the usual estimate of the source's log Z.  It is exact whenever
    each relaxed constraint splits its component in two, so on trees.
    """
    total = 0.0
    for c in dm.relaxed():
        pair = dm.constraints[c].compensation
        total += float(exact.logsumexp(pair.theta_on_original + pair.theta_on_clone))
    return total


def split_estimate(dm: DecomposedModel, task: Task) -> float:
    """Compensated value with the model-split scale removed; no bound guarantee."""
    return exact.query(dm.graph, task.semiring).value - split_correction(dm)


def dual_objective_closed_form(dm: DecomposedModel) -> float:
    """Separable dual objective of a fully decomposed model.

    Sum over original variables of ``max_x`` (unary potentials plus the
    theta tables on ``X``), plus, per factor, the max over its states of
    ``log psi`` plus the theta tables on its clones.
    """
    if dm.recovered():
        raise ValueError("the closed form needs a fully decomposed model")
    src = dm.source
    n = src.num_variables
    var_terms = [np.zeros(v.cardinality) for v in src.variables]
    total = 0.0
    for f in src.factors:
        if f.arity == 0:
            total += float(f.table)
        elif f.arity == 1:
            var_terms[f.scope[0]] = var_terms[f.scope[0]] + f.table
    clone_theta: dict[int, list[np.ndarray]] = {}
    for con in dm.constraints:
        var_terms[con.original] = var_terms[con.original] + con.compensation.theta_on_original
        clone_theta.setdefault(con.factor, []).append(con.compensation.theta_on_clone)
    for v in range(n):
        total += float(np.max(var_terms[v]))
    for f in src.factors:
        if f.arity < 2:
            continue
        t = np.array(f.table)
        for axis, th in enumerate(clone_theta[f.id]):
            shape = [1] * f.arity
            shape[axis] = -1
            t = t + th.reshape(shape)
        total += float(np.max(saturate(t)))
    return float(saturate(total))
