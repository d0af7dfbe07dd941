"""Brute-force enumeration, used as ground truth in the tests."""

from __future__ import annotations

import numpy as np

from .exact import Task, logsumexp
from .model import FactorGraph, ModelError, saturate

MAX_STATES = 2**24


class StateSpaceTooLarge(ModelError):
    pass


def joint_table(fg: FactorGraph) -> np.ndarray:
    """Log weight of every complete assignment, axis ``v`` indexing variable ``v``."""
    size = fg.state_space_size()
    if size > MAX_STATES:
        raise StateSpaceTooLarge(
            f"state space has {size} assignments, above the limit of {MAX_STATES}")
    n = fg.num_variables
    joint = np.zeros(fg.cards)
    for f in fg.factors:
        shape = [1] * n
        for v, k in zip(f.scope, f.table.shape):
            shape[v] = k
        # factor scopes may list variables in any order
        t = np.transpose(f.table, np.argsort(f.scope)) if f.arity > 1 else f.table
        joint = joint + np.reshape(t, shape)
    return saturate(joint)


def brute_force(fg: FactorGraph, task: Task) -> tuple[float, np.ndarray | None]:
    """Exact log value by enumeration; for MPE also the lexicographically smallest maximizer."""
    joint = joint_table(fg)
    if task is Task.PR:
        return float(logsumexp(joint)), None
    flat = int(np.argmax(joint))
    a = np.array(np.unravel_index(flat, fg.cards), dtype=np.int64).reshape(-1)
    return float(joint.reshape(-1)[flat]), a
