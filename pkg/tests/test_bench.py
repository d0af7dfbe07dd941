import csv
import io

import numpy as np
import pytest

from rcr import exact
from rcr.bench import (
    ExperimentResult,
    GridSpec,
    bucket_edges,
    generate_clique_chain,
    generate_grid,
    grid_edges,
    run_experiment,
    summarize,
)
from rcr.decompose import fully_decompose
from rcr.model import write_uai
from rcr.recover import Heuristic, RecoveryConfig


def test_grid_counts():
    fg = generate_grid(GridSpec(10, 10))
    assert fg.num_variables == 100
    assert sum(f.arity == 2 for f in fg.factors) == 180
    assert len(fg.factors) == 280
    assert len(fully_decompose(fg).constraints) == 360
    small = generate_grid(GridSpec(2, 2))
    assert sum(f.arity == 2 for f in small.factors) == 4
    assert grid_edges(2, 2) == [(0, 1), (0, 2), (1, 3), (2, 3)]


def test_grid_tables_and_ranges():
    fg = generate_grid(GridSpec(4, 5, unary_strength=0.5, coupling_strength=2.0, seed=3))
    for f in fg.factors:
        if f.arity == 1:
            assert np.all(np.abs(f.table) <= 0.5)
        else:
            j = f.table[0, 0]
            assert abs(j) <= 2.0
            np.testing.assert_array_equal(f.table, [[j, -j], [-j, j]])


def test_grid_determinism():
    a = write_uai(generate_grid(GridSpec(6, 6, seed=42)))
    b = write_uai(generate_grid(GridSpec(6, 6, seed=42)))
    c = write_uai(generate_grid(GridSpec(6, 6, seed=43)))
    assert a == b and a != c


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(1, 5)


def test_clique_chain():
    fg = generate_clique_chain()
    assert fg.num_variables == 201 and len(fg.factors) == 201
    assert max(f.arity for f in fg.factors) <= 4
    for v, f in enumerate(fg.factors):
        assert f.scope[-1] == v
        assert all(v - 3 <= p < v for p in f.scope[:-1])
        # conditional tables: each parent configuration sums to one
        np.testing.assert_allclose(np.exp(f.table).sum(axis=-1), 1.0)
    assert exact.query(fg, exact.Semiring.SUM_PRODUCT).value == pytest.approx(0.0, abs=1e-9)
    assert exact.make_plan(fg).max_cluster_size <= 4


def test_bucket_edges():
    assert bucket_edges(360) == [90, 120, 150, 180, 210, 240, 270, 300, 330, 360]
    assert bucket_edges(12)[-1] == 12


def test_summarize_and_csv():
    rows = [dict(constraints_total=360, recovered=r, certified=cert, cost_increase=inc)
            for r, cert, inc in ((0, True, 0.0), (95, True, 0.5), (100, True, 1.5), (300, False, 4.0))]
    b = summarize(rows)
    assert [x["count"] for x in b] == [1, 2, 0, 0, 0, 0, 0, 0, 0, 0, 1]
    assert b[1]["mean_cost_increase"] == pytest.approx(1.0)
    assert b[0]["label"] == "0-90" and b[1]["label"] == "91-120"
    text = ExperimentResult(rows, b).buckets_csv()
    lines = text.splitlines()
    assert lines[0] == "constraints_recovered,instances,percent_instances,mean_percent_cost_increase"
    assert lines[2] == "91-120,2,50.0,100.00"
    assert lines[3] == "121-150,0,0.0,---"
    assert lines[-1] == "uncertified,1,25.0,---"


def test_empty_experiment():
    result = run_experiment([], RecoveryConfig())
    assert result.rows == [] and result.buckets == []
    assert result.to_csv() == ""


def test_small_experiment():
    specs = [GridSpec(3, 3, seed=s) for s in range(3)]
    result = run_experiment(specs, RecoveryConfig(heuristic=Heuristic.VIOLATION), check_exact=True)
    for r in result.rows:
        assert r["constraints_total"] == 24
        assert r["certified"]
        assert r["upper_bound_log"] == pytest.approx(r["exact_log"], abs=1e-6)
        assert r["cost_increase"] == pytest.approx(
            r["final_plan_entries"] / r["decomposed_plan_entries"] - 1)
    table = list(csv.DictReader(io.StringIO(result.to_csv())))
    assert len(table) == 3 and "wall_time_s" not in table[0]
    assert "wall_time_s" in result.to_csv(include_time=True).splitlines()[0]
    again = run_experiment(specs, RecoveryConfig(heuristic=Heuristic.VIOLATION), check_exact=True)
    assert again.to_csv() == result.to_csv()
