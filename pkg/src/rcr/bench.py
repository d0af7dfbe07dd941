"""Benchmark generators and the grid experiment driver."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass

import numpy as np

from . import exact
from .decompose import fully_decompose
from .model import FactorGraph
from .recover import RecoveryConfig, rcr_solve


@dataclass(frozen=True)
class GridSpec:
    rows: int
    cols: int
    unary_strength: float = 1.0
    coupling_strength: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.rows < 2 or self.cols < 2:
            raise ValueError("grids need at least 2 rows and 2 columns")


def grid_edges(rows: int, cols: int) -> list[tuple[int, int]]:
    """Lattice edges, row-major nodes, each node's right edge before its down edge."""
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return edges


def generate_grid(spec: GridSpec) -> FactorGraph:
    """Binary Ising-style grid with mixed attractive and repulsive couplings.

    Unary log-potentials are drawn uniformly from [-u, u] per entry; each
    edge gets log table ``[[w, -w], [-w, w]]`` with ``w`` uniform in [-w, w].
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.rows * spec.cols
    edges = grid_edges(spec.rows, spec.cols)
    u, w = spec.unary_strength, spec.coupling_strength
    unary = rng.uniform(-u, u, size=(n, 2))
    coupling = rng.uniform(-w, w, size=len(edges))
    tables = [((v,), unary[v]) for v in range(n)]
    for (a, b), j in zip(edges, coupling):
        tables.append(((a, b), np.array([[j, -j], [-j, j]])))
    return FactorGraph.from_tables([2] * n, tables)


def generate_clique_chain(num_variables: int = 201, max_clique: int = 4, seed: int = 0,
                          window: int = 3) -> FactorGraph:
    """Bayesian-network-like chain of small cliques with bounded treewidth.

    Variable ``v`` gets a conditional table over itself and up to
    ``max_clique - 1`` parents drawn from the previous ``window`` variables.
    """
    rng = np.random.default_rng(seed)
    tables = []
    for v in range(num_variables):
        pool = list(range(max(0, v - window), v))
        k = int(rng.integers(0, min(len(pool), max_clique - 1) + 1))
        parents = sorted(rng.choice(pool, size=k, replace=False).tolist()) if k else []
        cpt = rng.dirichlet(np.ones(2), size=2**k).reshape([2] * k + [2])
        tables.append((tuple(parents) + (v,), np.log(cpt)))
    return FactorGraph.from_tables([2] * num_variables, tables)


def bucket_edges(total: int) -> list[int]:
    """Upper ends of the recovery-count buckets: a first quarter, then twelfths."""
    return [round(total * k / 12) for k in range(3, 13)]


@dataclass
class ExperimentResult:
    rows: list[dict]
    buckets: list[dict]

    def to_csv(self, include_time: bool = False) -> str:
        if not self.rows:
            return ""
        cols = [k for k in self.rows[0] if include_time or k != "wall_time_s"]
        out = io.StringIO()
        wr = csv.DictWriter(out, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
        wr.writeheader()
        for r in self.rows:
            wr.writerow({k: _fmt(r[k]) for k in cols})
        return out.getvalue()

    def buckets_csv(self) -> str:
        out = io.StringIO()
        wr = csv.writer(out, lineterminator="\n")
        wr.writerow(["constraints_recovered", "instances", "percent_instances",
                     "mean_percent_cost_increase"])
        for b in self.buckets:
            inc = "---" if b["mean_cost_increase"] is None else f"{100 * b['mean_cost_increase']:.2f}"
            wr.writerow([b["label"], b["count"], f"{b['percent']:.1f}", inc])
        return out.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def summarize(rows: list[dict]) -> list[dict]:
    if not rows:
        return []
    total = rows[0]["constraints_total"]
    n = len(rows)
    out, lo = [], 0
    for hi in bucket_edges(total):
        sel = [r for r in rows if r["certified"] and lo <= r["recovered"] <= hi]
        inc = float(np.mean([r["cost_increase"] for r in sel])) if sel else None
        out.append(dict(label=f"{lo}-{hi}", count=len(sel), percent=100.0 * len(sel) / n,
                        mean_cost_increase=inc))
        lo = hi + 1
    unc = [r for r in rows if not r["certified"]]
    out.append(dict(label="uncertified", count=len(unc), percent=100.0 * len(unc) / n,
                    mean_cost_increase=None))
    return out


def run_experiment(specs, config: RecoveryConfig, tolerance: float = 1e-8,
                   max_iterations: int = 1000, check_exact: bool = False) -> ExperimentResult:
    """Solve each grid and tabulate recovery counts and cost-proxy growth.

    Cost increase is final plan size over the fully decomposed plan size,
    minus one, both in total elimination table entries.
    """
    rows = []
    for spec in specs:
        fg = generate_grid(spec)
        dm0 = fully_decompose(fg)
        base = exact.make_plan(dm0.graph).total_table_entries
        t0 = time.perf_counter()
        state, trace = rcr_solve(fg, config, tolerance, max_iterations)
        elapsed = time.perf_counter() - t0
        last = trace.records[-1]
        final = last["plan_total_table_entries"]
        row = dict(seed=spec.seed, rows=spec.rows, cols=spec.cols,
                   unary_strength=spec.unary_strength, coupling_strength=spec.coupling_strength,
                   constraints_total=len(dm0.constraints), recovered=last["recovered_total"],
                   rounds=len(trace), certified=state.certified,
                   upper_bound_log=state.upper, lower_bound_log=state.lower,
                   decomposed_plan_entries=base, final_plan_entries=final,
                   cost_increase=final / base - 1.0)
        if check_exact:
            row["exact_log"] = exact.query(fg, config.task.semiring).value
        row["wall_time_s"] = elapsed
        rows.append(row)
    return ExperimentResult(rows, summarize(rows))
