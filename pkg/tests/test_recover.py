import json

import numpy as np
import pytest

from helpers import grid, random_conforming_thetas, random_model, triangle
from rcr import exact
from rcr.compensate import Scheme, compensate, upper_bound
from rcr.decompose import fully_decompose, recover
from rcr.exact import Task
from rcr.model import FactorGraph, UnsupportedModelError, evaluate
from rcr.oracle import brute_force
from rcr.recover import (
    BoundState,
    Heuristic,
    RecoveryConfig,
    impact_of_recovery,
    rank_constraints,
    rcr_solve,
)


def test_config_validation():
    with pytest.raises(ValueError):
        RecoveryConfig(batch_size=0)
    with pytest.raises(ValueError):
        RecoveryConfig(max_rounds=-1)
    with pytest.raises(UnsupportedModelError):
        RecoveryConfig(task=Task.PR, scheme=Scheme.PR_DD)
    with pytest.raises(UnsupportedModelError):
        RecoveryConfig(heuristic=Heuristic.VIOLATION, scheme=Scheme.MODEL_SPLIT)
    RecoveryConfig(heuristic=Heuristic.IMPACT, task=Task.PR, scheme=Scheme.PR_DD)


def test_config_rejects_multivalued_models():
    fg = FactorGraph.from_tables([3, 2], [((0, 1), np.zeros((3, 2)))])
    with pytest.raises(UnsupportedModelError, match="binary"):
        rcr_solve(fg, RecoveryConfig())
    state, _ = rcr_solve(fg, RecoveryConfig(heuristic=Heuristic.NONE))
    assert state.upper >= brute_force(fg, Task.MPE)[0] - 1e-9


def test_ranking_rules():
    dm = fully_decompose(triangle())
    st = BoundState(upper=0.0)
    cfg = RecoveryConfig(heuristic=Heuristic.VIOLATION)
    assert rank_constraints(dm, st, cfg) == list(range(6))
    st.violated = {4, 2}
    assert rank_constraints(dm, st, cfg)[:2] == [2, 4]
    imp = {c: 1.0 for c in range(6)}
    imp[3], imp[5] = 0.2, 0.7
    cfg = RecoveryConfig(heuristic=Heuristic.IMPACT)
    assert rank_constraints(dm, st, cfg, imp)[:2] == [3, 5]
    cfg = RecoveryConfig(heuristic=Heuristic.IMPACT_THEN_VIOLATION)
    imp[4] = 0.1
    assert rank_constraints(dm, st, cfg, imp)[:3] == [4, 2, 3]
    recover(dm, 0)
    assert rank_constraints(dm, BoundState(0.0), RecoveryConfig(heuristic=Heuristic.NONE)) == [1, 2, 3, 4, 5]


@pytest.mark.parametrize("task", list(Task))
def test_impact_matches_restored_equivalence(task):
    rng = np.random.default_rng(int(task is Task.MPE))
    for seed in range(10):
        dm = fully_decompose(grid(3, 3, seed))
        for c in rng.choice(24, size=6, replace=False).tolist():
            recover(dm, c)
        random_conforming_thetas(dm, rng)
        bound = upper_bound(dm, task)
        for c in dm.relaxed()[:6]:
            imp = impact_of_recovery(dm, c, task)
            assert imp == pytest.approx(exact.query(dm.with_equivalence(c), task.semiring).value,
                                        abs=1e-9)
            assert imp <= bound + 1e-9


def test_impact_equals_bound_when_off_diagonal_is_dead():
    ident = np.eye(2)
    fg = FactorGraph.from_tables([2, 2], [((0, 1), ident), ((0, 1), ident)], log=False)
    dm = fully_decompose(fg)
    for c in (0, 1, 3):
        recover(dm, c)
    for task in Task:
        assert impact_of_recovery(dm, 2, task) == pytest.approx(upper_bound(dm, task), abs=1e-12)


def test_impact_needs_binary():
    fg = FactorGraph.from_tables([3, 3], [((0, 1), np.zeros((3, 3)))])
    with pytest.raises(UnsupportedModelError):
        impact_of_recovery(fully_decompose(fg), 0, Task.MPE)


def test_unary_and_single_factor_models_certify_at_once():
    fg = FactorGraph.from_tables([2], [((0,), [0.3, 0.1])])
    state, trace = rcr_solve(fg, RecoveryConfig())
    assert state.certified and len(trace) == 1
    rng = np.random.default_rng(0)
    fg = FactorGraph.from_tables([2, 2], [((0, 1), rng.normal(size=(2, 2)))])
    state, trace = rcr_solve(fg, RecoveryConfig())
    assert state.certified and trace.records[0]["round"] == 0
    assert state.upper == pytest.approx(brute_force(fg, Task.MPE)[0], abs=1e-6)


@pytest.mark.parametrize("heuristic", [Heuristic.IMPACT, Heuristic.VIOLATION,
                                       Heuristic.IMPACT_THEN_VIOLATION])
def test_small_grids_certify_at_the_optimum(heuristic):
    for seed in range(15):
        fg = grid(3, 3, seed)
        state, _ = rcr_solve(fg, RecoveryConfig(heuristic=heuristic))
        best = brute_force(fg, Task.MPE)[0]
        assert state.certified
        assert state.upper == pytest.approx(best, abs=1e-6)
        assert state.lower == pytest.approx(best, abs=1e-6)
        assert evaluate(fg, state.incumbent) == pytest.approx(state.lower, abs=1e-12)


def test_bounds_monotone_across_rounds():
    fg = grid(10, 10, 21)
    state, trace = rcr_solve(fg, RecoveryConfig(batch_size=10))
    ups = [r["upper_bound_log"] for r in trace.records]
    lows = [r["lower_bound_log"] for r in trace.records]
    assert all(b <= a + 1e-12 for a, b in zip(ups, ups[1:]))
    assert all(b >= a - 1e-12 for a, b in zip(lows, lows[1:]))
    exact_mpe = exact.query(fg, Task.MPE.semiring).value
    assert lows[-1] <= exact_mpe + 1e-9 <= ups[-1] + 2e-9
    rec = [r["recovered_total"] for r in trace.records]
    assert rec == sorted(rec) and rec[0] == 0
    if state.certified:
        assert ups[-1] == pytest.approx(exact_mpe, abs=1e-6)


def test_no_recovery_is_plain_dual_decomposition():
    fg = grid(4, 4, 5)
    state, trace = rcr_solve(fg, RecoveryConfig(heuristic=Heuristic.NONE))
    dm = fully_decompose(fg)
    compensate(dm, Scheme.MPE_DD)
    assert len(trace) == 1
    assert state.upper == pytest.approx(upper_bound(dm, Task.MPE), abs=1e-12)


def test_pr_and_model_split_runs():
    fg = grid(3, 3, 2)
    truth = brute_force(fg, Task.PR)[0]
    state, trace = rcr_solve(fg, RecoveryConfig(heuristic=Heuristic.IMPACT, task=Task.PR,
                                                scheme=Scheme.PR_DD, batch_size=6))
    assert state.certified and state.upper == pytest.approx(truth, abs=1e-9)
    ups = [r["upper_bound_log"] for r in trace.records]
    assert all(u >= truth - 1e-9 for u in ups)
    state, trace = rcr_solve(fg, RecoveryConfig(heuristic=Heuristic.IMPACT, task=Task.PR,
                                                scheme=Scheme.MODEL_SPLIT, batch_size=6))
    assert state.certified and state.upper == pytest.approx(truth, abs=1e-9)


def test_trace_records_and_jsonl():
    state, trace = rcr_solve(grid(3, 3, 1), RecoveryConfig(batch_size=3))
    keys = ["round", "recovered_total", "upper_bound_log", "lower_bound_log",
            "violated_count", "plan_total_table_entries", "certified"]
    lines = trace.to_jsonl().splitlines()
    assert len(lines) == len(trace)
    for i, line in enumerate(lines):
        rec = json.loads(line)
        assert list(rec) == keys
        assert rec["round"] == i
    assert json.loads(lines[-1])["certified"] == state.certified


def test_round_limit_and_budget():
    fg = grid(5, 5, 3)
    state, trace = rcr_solve(fg, RecoveryConfig(heuristic=Heuristic.VIOLATION, max_rounds=0))
    assert len(trace) == 1
    first = trace.records[0]["plan_total_table_entries"]
    state, trace = rcr_solve(fg, RecoveryConfig(batch_size=20, cost_budget=first))
    for r in trace.records:
        assert r["plan_total_table_entries"] <= first or r["round"] == 0
    if not state.certified:
        assert trace.records[-1]["recovered_total"] < 80


def test_random_models_with_everything_recovered():
    for seed in range(10):
        fg = random_model(seed, max_card=2)
        cfg = RecoveryConfig(heuristic=Heuristic.VIOLATION, batch_size=100)
        state, _ = rcr_solve(fg, cfg)
        assert state.certified
        assert state.upper == pytest.approx(brute_force(fg, Task.MPE)[0], abs=1e-6)
