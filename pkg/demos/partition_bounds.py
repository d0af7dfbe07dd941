"""Bounds and approximations of the log partition function on a small grid."""

from rcr import GridSpec, Scheme, generate_grid
from rcr.compensate import compensate, split_estimate, upper_bound
from rcr.decompose import fully_decompose, recover
from rcr.exact import Task
from rcr.oracle import brute_force

fg = generate_grid(GridSpec(4, 4, seed=3))
log_z = brute_force(fg, Task.PR)[0]
print("exact log Z:", log_z)

# Neutral tables already give a valid, if loose, bound.
dm = fully_decompose(fg)
print("neutral tables:", upper_bound(dm, Task.PR))

# Coordinate descent on the tables tightens it.
rep = compensate(dm, Scheme.PR_DD)
print(f"after {rep.iterations} sweeps:", upper_bound(dm, Task.PR))

# Recovering a third of the constraints tightens it further.
for c in range(0, len(dm.constraints), 3):
    recover(dm, c)
compensate(dm, Scheme.PR_DD)
print(f"{len(dm.recovered())} recovered:", upper_bound(dm, Task.PR))

# Model-split tables give an estimate with no bound guarantee, the loopy BP one.
ms = fully_decompose(fg)
compensate(ms, Scheme.MODEL_SPLIT)
print("model-split estimate:", split_estimate(ms, Task.PR))
