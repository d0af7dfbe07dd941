import itertools
import math

import numpy as np
import pytest

from helpers import random_model
from rcr.exact import Semiring, Task, query
from rcr.model import FactorGraph, evaluate
from rcr.oracle import MAX_STATES, StateSpaceTooLarge, brute_force


def test_unary():
    fg = FactorGraph.from_tables([2], [((0,), [0.6, 0.4])], log=False)
    assert brute_force(fg, Task.PR)[0] == pytest.approx(0.0, abs=1e-15)
    value, a = brute_force(fg, Task.MPE)
    assert value == pytest.approx(math.log(0.6))
    assert a.tolist() == [0]


def test_identity_triangle():
    fg = FactorGraph.from_tables([2, 2, 2], [((0, 1), np.ones((2, 2))), ((1, 2), np.ones((2, 2))),
                                             ((0, 2), np.ones((2, 2)))], log=False)
    assert brute_force(fg, Task.PR)[0] == pytest.approx(math.log(8))


def test_mpe_ties_go_to_smallest_assignment():
    fg = FactorGraph.from_tables([2, 3], [((1, 0), np.zeros((3, 2)))])
    assert brute_force(fg, Task.MPE)[1].tolist() == [0, 0]
    t = np.zeros((2, 3))
    t[1, 0] = t[0, 2] = 1.0
    fg = FactorGraph.from_tables([2, 3], [((0, 1), t)])
    assert brute_force(fg, Task.MPE)[1].tolist() == [0, 2]


def test_guard():
    fg = FactorGraph.from_tables([2] * 25, [((v,), [0.0, 0.0]) for v in range(25)])
    assert fg.state_space_size() > MAX_STATES
    with pytest.raises(StateSpaceTooLarge, match=str(2**25)):
        brute_force(fg, Task.PR)


def test_partition_is_sum_of_evaluations():
    fg = random_model(5)
    total = sum(math.exp(evaluate(fg, a)) for a in itertools.product(*[range(c) for c in fg.cards]))
    assert math.exp(brute_force(fg, Task.PR)[0]) == pytest.approx(total, rel=1e-12)


def test_agrees_with_elimination_on_100_models():
    for seed in range(100):
        fg = random_model(seed, max_vars=12, max_card=2, max_factors=14)
        assert brute_force(fg, Task.PR)[0] == pytest.approx(
            query(fg, Semiring.SUM_PRODUCT).value, abs=1e-10)
        value, a = brute_force(fg, Task.MPE)
        assert value == pytest.approx(query(fg, Semiring.MAX_PRODUCT).value, abs=1e-10)
        assert evaluate(fg, a) == pytest.approx(value, abs=1e-10)
