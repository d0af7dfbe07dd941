"""Relaxation by variable cloning, and recovery by merging clones back."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .model import (
    CloneOf,
    Compensation,
    Factor,
    FactorGraph,
    Variable,
    equivalence_factor,
)


class Status(enum.Enum):
    RELAXED = "relaxed"
    RECOVERED = "recovered"


@dataclass
class CompensationPair:
    """Log tables theta(X) and theta(X_i) standing in for one relaxed eq(X, X_i)."""

    theta_on_original: np.ndarray
    theta_on_clone: np.ndarray

    @classmethod
    def neutral(cls, card: int) -> "CompensationPair":
        return cls(np.zeros(card), np.zeros(card))

    def upper_bound_residual(self) -> float:
        """Largest |log theta(x) + log theta(x_i)|; zero under the upper-bound scheme."""
        return float(np.max(np.abs(self.theta_on_original + self.theta_on_clone)))


@dataclass
class EquivalenceConstraint:
    id: int
    original: int
    clone: int  # id of the clone in the fully decomposed graph
    factor: int
    status: Status = Status.RELAXED
    compensation: CompensationPair | None = None

    @property
    def relaxed(self) -> bool:
        return self.status is Status.RELAXED


class DecomposedModel:
    """A source graph, its clone constraints, and the current compensated graph.

    Original variables keep their source ids in :attr:`graph`; relaxed
    clones follow them, numbered in constraint order.  Recovering a
    constraint removes its clone, so clone ids in :attr:`graph` shift; use
    :meth:`endpoints` to locate a constraint in the current graph.
    """

    def __init__(self, source: FactorGraph, factor_scopes, constraints):
        self.source = source
        self.constraints: list[EquivalenceConstraint] = constraints
        # factor scopes over "extended" ids: originals 0..n-1, clone of constraint c = n + c
        self._scopes = factor_scopes
        self._graph: FactorGraph | None = None
        self._clone_pos: dict[int, int] = {}

    @property
    def num_original(self) -> int:
        return self.source.num_variables

    def relaxed(self) -> list[int]:
        return [c.id for c in self.constraints if c.relaxed]

    def recovered(self) -> list[int]:
        return [c.id for c in self.constraints if not c.relaxed]

    def invalidate(self):
        """Drop the cached graph; call after editing compensation tables in place."""
        self._graph = None

    def endpoints(self, c: int) -> tuple[int, int]:
        """Graph ids of ``(X, X_i)`` for a relaxed constraint."""
        con = self.constraints[c]
        if not con.relaxed:
            raise ValueError(f"constraint {c} is recovered")
        self.graph  # refresh clone positions
        return con.original, self._clone_pos[c]

    def _rep(self, ext: int) -> int:
        n = self.num_original
        if ext < n:
            return ext
        con = self.constraints[ext - n]
        return con.original if not con.relaxed else self._clone_pos[con.id]

    @property
    def graph(self) -> FactorGraph:
        if self._graph is None:
            self._graph = self._build()
        return self._graph

    def _build(self) -> FactorGraph:
        src = self.source
        variables = list(src.variables)
        self._clone_pos = {}
        for con in self.constraints:
            if con.relaxed:
                vid = len(variables)
                self._clone_pos[con.id] = vid
                variables.append(Variable(vid, src.variables[con.original].cardinality,
                                          CloneOf(con.original, con.factor)))
        factors = []
        for f, scope in zip(src.factors, self._scopes):
            factors.append(Factor(f.id, tuple(self._rep(u) for u in scope), f.table, f.kind))
        fid = len(src.factors)
        for con in self.constraints:
            if con.relaxed:
                pair = con.compensation
                factors.append(Factor(fid, (con.original,), pair.theta_on_original,
                                      Compensation(con.id, "original")))
                factors.append(Factor(fid + 1, (self._clone_pos[con.id],), pair.theta_on_clone,
                                      Compensation(con.id, "clone")))
                fid += 2
        return FactorGraph(tuple(variables), tuple(factors))

    def with_equivalence(self, c: int) -> FactorGraph:
        """Current graph with c's compensation pair replaced by the factor eq(X, X_i)."""
        x, xi = self.endpoints(c)
        g = self.graph
        kept = [f for f in g.factors
                if not (isinstance(f.kind, Compensation) and f.kind.constraint == c)]
        card = g.variables[x].cardinality
        kept.append(equivalence_factor(len(g.factors), x, xi, card, c))
        return g.with_factors(kept)

    def thetas(self) -> tuple[np.ndarray, np.ndarray]:
        """Stacked ``(theta_on_original, theta_on_clone)`` for all constraints, padded."""
        m = len(self.constraints)
        width = max((len(c.compensation.theta_on_original) for c in self.constraints
                     if c.compensation is not None), default=1)
        to = np.zeros((m, width))
        ti = np.zeros((m, width))
        for con in self.constraints:
            if con.compensation is not None:
                k = len(con.compensation.theta_on_original)
                to[con.id, :k] = con.compensation.theta_on_original
                ti[con.id, :k] = con.compensation.theta_on_clone
        return to, ti

    def set_thetas(self, theta_o: np.ndarray, theta_i: np.ndarray, ids=None):
        ids = self.relaxed() if ids is None else ids
        for c in ids:
            con = self.constraints[c]
            k = len(con.compensation.theta_on_original)
            con.compensation = CompensationPair(np.array(theta_o[c, :k]), np.array(theta_i[c, :k]))
        self._graph = None


def fully_decompose(fg: FactorGraph) -> DecomposedModel:
    """Clone every variable occurrence in factors of arity >= 2."""
    n = fg.num_variables
    scopes, constraints = [], []
    for f in fg.factors:
        if f.arity < 2:
            scopes.append(f.scope)
            continue
        scope = []
        for v in f.scope:
            cid = len(constraints)
            constraints.append(EquivalenceConstraint(
                cid, v, n + cid, f.id,
                compensation=CompensationPair.neutral(fg.variables[v].cardinality)))
            scope.append(n + cid)
        scopes.append(tuple(scope))
    return DecomposedModel(fg, scopes, constraints)


def recover(dm: DecomposedModel, c: int) -> None:
    """Merge the clone of constraint ``c`` back into its original variable."""
    con = dm.constraints[c]
    if not con.relaxed:
        raise ValueError(f"constraint {c} is already recovered")
    con.status = Status.RECOVERED
    con.compensation = None
    dm.invalidate()


def violated_constraints(dm: DecomposedModel, a) -> set[int]:
    """Relaxed constraints whose original and clone disagree under ``a``."""
    a = np.asarray(a)
    g = dm.graph
    if a.shape != (g.num_variables,):
        raise ValueError("assignment must cover the current graph")
    out = set()
    for c in dm.relaxed():
        x, xi = dm.endpoints(c)
        if a[x] != a[xi]:
            out.add(c)
    return out


def project(dm: DecomposedModel, a) -> np.ndarray:
    """Keep the states of original variables, drop clone states."""
    a = np.asarray(a, dtype=np.int64)
    if a.shape != (dm.graph.num_variables,):
        raise ValueError("assignment must cover the current graph")
    return a[: dm.num_original].copy()
