"""Variable elimination over the sum-product and max-product semirings.

This is the reference exact engine: marginals are obtained by one
elimination run per query, and every intermediate table is a dense numpy
array in the log domain.  Elimination cost is also what the solver reports
as its inference-cost proxy.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import LOG_ZERO, FactorGraph, is_log_zero, saturate


class Semiring(enum.Enum):
    SUM_PRODUCT = "sum-product"
    MAX_PRODUCT = "max-product"

    def combine(self, table: np.ndarray, axis=None) -> np.ndarray:
        if self is Semiring.MAX_PRODUCT:
            return saturate(np.max(table, axis=axis))
        return logsumexp(table, axis=axis)


class Task(enum.Enum):
    MPE = "mpe"
    PR = "pr"

    @property
    def semiring(self) -> Semiring:
        return Semiring.MAX_PRODUCT if self is Task.MPE else Semiring.SUM_PRODUCT


def logsumexp(table, axis=None) -> np.ndarray:
    """Max-shifted log-sum-exp that maps all-zero slices to ``LOG_ZERO``."""
    table = np.asarray(table, dtype=float)
    m = np.max(table, axis=axis, keepdims=True)
    dead = is_log_zero(m)
    shift = np.where(dead, 0.0, m)
    with np.errstate(under="ignore"):
        s = np.sum(np.exp(table - shift), axis=axis, keepdims=True)
    with np.errstate(divide="ignore"):
        out = np.where(dead, LOG_ZERO, shift + np.log(s))
    if axis is None:
        return saturate(out.reshape(()))
    return saturate(np.squeeze(out, axis=axis))


@dataclass(frozen=True)
class EliminationPlan:
    order: tuple[int, ...]
    max_cluster_size: float  # log2 of the largest intermediate table
    total_table_entries: int
    cliques: tuple[tuple[int, ...], ...] = field(default=(), repr=False, compare=False)


@dataclass
class QueryResult:
    value: float
    marginals: dict = field(default_factory=dict)


def interaction_graph(fg: FactorGraph, extra_edges: Sequence[tuple[int, int]] = ()):
    adj = [set() for _ in range(fg.num_variables)]
    for f in fg.factors:
        for u in f.scope:
            adj[u].update(w for w in f.scope if w != u)
    for u, w in extra_edges:
        if u != w:
            adj[u].add(w)
            adj[w].add(u)
    return adj


def _fill(adj, v) -> int:
    nb = list(adj[v])
    missing = 0
    for i, a in enumerate(nb):
        na = adj[a]
        for b in nb[i + 1:]:
            if b not in na:
                missing += 1
    return missing


def min_fill(cards: Sequence[int], adj: list[set[int]]):
    """Greedy min-fill ordering, ties to the lowest variable id.

    Returns ``(order, cliques)`` where ``cliques[i]`` is the eliminated
    variable followed by its (sorted) neighbours at elimination time.
    ``adj`` is consumed.
    """
    n = len(adj)
    fill = [_fill(adj, v) for v in range(n)]
    heap = [(fill[v], v) for v in range(n)]
    heapq.heapify(heap)
    done = [False] * n
    order, cliques = [], []
    while heap:
        f, v = heapq.heappop(heap)
        if done[v] or f != fill[v]:
            continue
        done[v] = True
        nb = sorted(adj[v])
        order.append(v)
        cliques.append((v, *nb))
        touched = set(nb)
        for i, a in enumerate(nb):
            adj[a].discard(v)
            for b in nb[i + 1:]:
                if b not in adj[a]:
                    adj[a].add(b)
                    adj[b].add(a)
        for a in nb:
            touched.update(adj[a])
        adj[v] = set()
        for u in touched:
            if not done[u]:
                nf = _fill(adj, u)
                if nf != fill[u]:
                    fill[u] = nf
                    heapq.heappush(heap, (nf, u))
    return order, cliques


def make_plan(fg: FactorGraph) -> EliminationPlan:
    """Min-fill elimination plan with table-size accounting."""
    if fg.num_variables == 0:
        return EliminationPlan((), 0.0, 0)
    cards = fg.cards
    order, cliques = min_fill(cards, interaction_graph(fg))
    total, largest = 0, 1
    for cl in cliques:
        size = math.prod(cards[u] for u in cl)
        total += size
        largest = max(largest, size)
    return EliminationPlan(tuple(order), math.log2(largest), total, tuple(cliques))


# ---------------------------------------------------------------------------
# Table algebra


def _expand(scope: tuple, table: np.ndarray, target: tuple) -> np.ndarray:
    """View ``table`` so that it broadcasts against axes ordered as ``target``."""
    if not scope:
        return table.reshape((1,) * len(target))
    pos = [target.index(v) for v in scope]
    perm = np.argsort(pos)
    t = np.transpose(table, perm)
    shape = [1] * len(target)
    for p, n in zip(sorted(pos), t.shape):
        shape[p] = n
    return t.reshape(shape)


def _product(tables, cards) -> tuple[tuple, np.ndarray]:
    scope = []
    for s, _ in tables:
        for v in s:
            if v not in scope:
                scope.append(v)
    scope = tuple(sorted(scope))
    out = np.zeros([cards[v] for v in scope])
    for s, t in tables:
        out = out + _expand(s, t, scope)
    return scope, saturate(out)


class _Buckets:
    def __init__(self, fg: FactorGraph):
        self.cards = fg.cards
        self.tables: dict[int, tuple[tuple, np.ndarray]] = {}
        self.by_var: list[set[int]] = [set() for _ in range(fg.num_variables)]
        self.scalar = 0.0
        self._next = 0
        for f in fg.factors:
            self.add(f.scope, f.table)

    def add(self, scope, table):
        if not scope:
            self.scalar = float(saturate(self.scalar + float(table)))
            return
        key = self._next
        self._next += 1
        self.tables[key] = (tuple(scope), table)
        for v in scope:
            self.by_var[v].add(key)

    def pop(self, v):
        keys = sorted(self.by_var[v])
        out = []
        for k in keys:
            scope, table = self.tables.pop(k)
            for u in scope:
                self.by_var[u].discard(k)
            out.append((scope, table))
        return out


def _eliminate(fg: FactorGraph, s: Semiring, order, keep=(), record=None) -> _Buckets:
    b = _Buckets(fg)
    keep = set(keep)
    for v in order:
        if v in keep:
            continue
        bucket = b.pop(v)
        if not bucket:
            bucket = [((v,), np.zeros(b.cards[v]))]
        scope, prod = _product(bucket, b.cards)
        axis = scope.index(v)
        if record is not None:
            record.append((v, scope, prod))
        rest = scope[:axis] + scope[axis + 1:]
        b.add(rest, s.combine(prod, axis=axis))
    return b


def _plan_order(fg: FactorGraph, plan: EliminationPlan | None):
    plan = plan if plan is not None else make_plan(fg)
    if len(plan.order) != fg.num_variables:
        raise ValueError("elimination plan does not cover the graph's variables")
    return plan.order


def query(fg: FactorGraph, s: Semiring, plan: EliminationPlan | None = None) -> QueryResult:
    """Log partition function (sum-product) or log MPE value (max-product)."""
    b = _eliminate(fg, s, _plan_order(fg, plan))
    return QueryResult(b.scalar)


def _kept_table(fg, s, keep, plan):
    for v in keep:
        if not 0 <= v < fg.num_variables:
            raise ValueError(f"unknown variable {v}")
    b = _eliminate(fg, s, _plan_order(fg, plan), keep=keep)
    keep = tuple(keep)
    out = np.full([fg.cards[v] for v in keep], b.scalar)
    for scope, table in b.tables.values():
        out = out + _expand(scope, table, keep)
    return saturate(out)


def marginal(fg: FactorGraph, s: Semiring, x: int, plan: EliminationPlan | None = None) -> np.ndarray:
    """Per-state log Z(x) or log mpe(x)."""
    return _kept_table(fg, s, (x,), plan)


def pair_marginal(fg: FactorGraph, s: Semiring, x: int, y: int,
                  plan: EliminationPlan | None = None) -> np.ndarray:
    """Table of log Z(x, y) or log mpe(x, y), indexed ``[x_state, y_state]``."""
    if x == y:
        raise ValueError("pair_marginal needs two distinct variables")
    return _kept_table(fg, s, (x, y), plan)


def decode_mpe(fg: FactorGraph, plan: EliminationPlan | None = None) -> np.ndarray:
    """MPE assignment by max-product elimination and backtracking."""
    record = []
    _eliminate(fg, Semiring.MAX_PRODUCT, _plan_order(fg, plan), record=record)
    a = np.zeros(fg.num_variables, dtype=np.int64)
    for v, scope, table in reversed(record):
        idx = tuple(slice(None) if u == v else a[u] for u in scope)
        a[v] = int(np.argmax(table[idx]))
    return a
