"""The fully decomposed MPE bound is a sum of independent maximizations."""

import numpy as np

from rcr import exact
from rcr.compensate import Scheme, compensate, dual_objective_closed_form, upper_bound
from rcr.decompose import fully_decompose
from rcr.exact import Task
from rcr.model import FactorGraph

rng = np.random.default_rng(0)
tables = [((0, 1), rng.normal(size=(2, 2))), ((1, 2), rng.normal(size=(2, 2))),
          ((0, 2), rng.normal(size=(2, 2)))]
fg = FactorGraph.from_tables([2, 2, 2], tables)
dm = fully_decompose(fg)

# With neutral tables each factor is maximized on its own.
print(dual_objective_closed_form(dm), sum(t.max() for _, t in tables))

# Any tables whose products are one keep the bound valid; both routes agree.
to, ti = dm.thetas()
noise = rng.normal(size=to.shape)
dm.set_thetas(noise, -noise)
print(dual_objective_closed_form(dm), upper_bound(dm, Task.MPE))

# Block coordinate descent drives the bound down toward the exact value.
compensate(dm, Scheme.MPE_DD)
print(upper_bound(dm, Task.MPE), exact.query(fg, exact.Semiring.MAX_PRODUCT).value)
