"""Random model builders shared by the tests."""

import numpy as np

from rcr.bench import GridSpec, generate_grid
from rcr.decompose import fully_decompose
from rcr.model import FactorGraph


def grid(rows, cols, seed, u=1.0, w=1.0):
    return generate_grid(GridSpec(rows, cols, u, w, seed))


def random_model(seed, max_vars=7, max_card=3, max_arity=3, max_factors=8, zeros=False):
    """Small model with mixed arities and cardinalities; every variable is covered."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_vars + 1))
    cards = rng.integers(2, max_card + 1, size=n).tolist()
    tables = []
    for v in range(n):
        if rng.random() < 0.6:
            tables.append(((v,), rng.normal(size=cards[v])))
    for _ in range(int(rng.integers(1, max_factors + 1))):
        k = int(rng.integers(1, min(max_arity, n) + 1))
        scope = tuple(int(v) for v in rng.choice(n, size=k, replace=False))
        t = rng.normal(size=[cards[v] for v in scope])
        if zeros and rng.random() < 0.3:
            t.flat[int(rng.integers(t.size))] = -1e30
        tables.append((scope, t))
    covered = {v for s, _ in tables for v in s}
    for v in range(n):
        if v not in covered:
            tables.append(((v,), rng.normal(size=cards[v])))
    return FactorGraph.from_tables(cards, tables)


def random_binary_model(seed, n_vars, n_pairs, strength=1.0):
    """Binary pairwise model on random edges plus unary terms."""
    rng = np.random.default_rng(seed)
    tables = [((v,), rng.uniform(-strength, strength, 2)) for v in range(n_vars)]
    seen = set()
    while len(seen) < n_pairs:
        a, b = sorted(rng.choice(n_vars, size=2, replace=False).tolist())
        if (a, b) in seen:
            continue
        seen.add((a, b))
        tables.append(((a, b), rng.uniform(-strength, strength, (2, 2))))
    return FactorGraph.from_tables([2] * n_vars, tables)


def random_tree(n, seed, strength=1.0):
    """Binary tree-structured pairwise model: node v > 0 attaches to a random earlier node."""
    rng = np.random.default_rng(seed)
    tables = [((v,), rng.uniform(-strength, strength, 2)) for v in range(n)]
    for v in range(1, n):
        p = int(rng.integers(v))
        tables.append(((p, v), rng.uniform(-strength, strength, (2, 2))))
    return FactorGraph.from_tables([2] * n, tables)


def triangle(seed=0, strength=1.0):
    rng = np.random.default_rng(seed)
    tables = [((0, 1), rng.uniform(-strength, strength, (2, 2))),
              ((1, 2), rng.uniform(-strength, strength, (2, 2))),
              ((0, 2), rng.uniform(-strength, strength, (2, 2)))]
    return FactorGraph.from_tables([2, 2, 2], tables)


def random_conforming_thetas(dm, rng, scale=1.0):
    """Random tables with theta(x) * theta(x_i) = 1 on every relaxed constraint."""
    to, ti = dm.thetas()
    for c in dm.relaxed():
        k = len(dm.constraints[c].compensation.theta_on_original)
        t = rng.normal(scale=scale, size=k)
        to[c, :k] = t
        ti[c, :k] = -t
    dm.set_thetas(to, ti)
    return dm


def decomposed_grid(rows, cols, seed):
    return fully_decompose(grid(rows, cols, seed))
