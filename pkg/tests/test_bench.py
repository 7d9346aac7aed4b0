"""Scenario generation contracts and the experiment grid."""

import pytest

from specauction.bench import (
    B_MAX,
    C_MAX,
    S_MAX,
    BenchError,
    CSV_FIELDS,
    ExperimentGrid,
    ScenarioParams,
    emit_csv,
    generate_scenario,
    generate_scenario_with_groups,
    point_seed,
    run_experiment,
)
from specauction.auction import build_conflict_graph, form_groups


def test_generation_is_deterministic():
    params = ScenarioParams(sellers=4, buyers=12)
    a = generate_scenario(params, seed=99).to_json()
    b = generate_scenario(params, seed=99).to_json()
    assert a == b
    c = generate_scenario(params, seed=100).to_json()
    assert c != a


def test_generation_respects_ranges():
    params = ScenarioParams(sellers=6, buyers=25, d_max=7)
    sc = generate_scenario(params, seed=1)
    assert len(sc.sellers) == 6 and len(sc.buyers) == 25
    for v in sc.sellers:
        assert 1 <= v.s <= S_MAX
        assert 1 <= v.c <= C_MAX
    for u in sc.buyers:
        assert 1 <= u.b <= B_MAX
        assert 1 <= u.d <= 7
        assert 0 <= u.x <= sc.area_m and 0 <= u.y <= sc.area_m


def test_profitable_bias_narrows_ranges():
    params = ScenarioParams(sellers=30, buyers=30, profitable_bias=True)
    sc = generate_scenario(params, seed=2)
    assert max(v.s for v in sc.sellers) <= 30
    assert min(u.b for u in sc.buyers) >= 20


def test_min_groups_search_finds_a_grouping():
    params = ScenarioParams(sellers=2, buyers=8)
    sc = generate_scenario_with_groups(params, seed=5, min_groups=3)
    groups = form_groups(build_conflict_graph(sc.buyers, sc.radius_m))
    assert len(groups) >= 3


def test_params_validation():
    with pytest.raises(ValueError):
        ScenarioParams(sellers=0, buyers=5).validate()
    with pytest.raises(ValueError):
        ScenarioParams(sellers=1, buyers=5, bit_length=3).validate()
    with pytest.raises(ValueError):
        ScenarioParams(sellers=1, buyers=5, bit_length=7).validate()
    with pytest.raises(ValueError):
        ScenarioParams(sellers=1, buyers=5, d_max=0).validate()


def test_point_seeds_are_decorrelated():
    seen = {
        point_seed(0, m, n, b, r)
        for m in (1, 2)
        for n in (1, 2)
        for b in (10, 16)
        for r in (0, 1)
    }
    assert len(seen) == 16
    assert point_seed(0, 2, 6, 16, 0) == point_seed(0, 2, 6, 16, 0)


def test_small_grid_end_to_end():
    grid = ExperimentGrid(
        sellers=(3,),
        buyers=(8,),
        reps=1,
        seed=7,
        impls=("clear", "secure", "gates"),
    )
    rows = run_experiment(grid)
    # one clear row, then secure and gates rows for each of the two modes
    assert len(rows) == 1 + 2 + 2
    digests = {r["outcome_digest"] for r in rows}
    assert len(digests) == 1
    gates = {r["mode"]: r["and_gates"] for r in rows if r["impl"] == "gates"}
    secure = {r["mode"]: r["and_gates"] for r in rows if r["impl"] == "secure"}
    assert gates == secure
    assert gates["improved"] < gates["original"]
    for row in rows:
        assert set(row) == set(CSV_FIELDS)


def test_unknown_impl_rejected():
    grid = ExperimentGrid(sellers=(2,), buyers=(4,), impls=("quantum",))
    with pytest.raises(ValueError):
        run_experiment(grid)


def test_emit_csv_write_modes(tmp_path):
    rows = [
        {field: 0 for field in CSV_FIELDS},
        {field: 1 for field in CSV_FIELDS},
    ]
    target = tmp_path / "out.csv"
    emit_csv(rows, str(target))
    lines = target.read_text().strip().splitlines()
    assert lines[0] == ",".join(CSV_FIELDS)
    assert len(lines) == 3

    with pytest.raises(FileExistsError):
        emit_csv(rows, str(target), mode="x")
    with pytest.raises(ValueError):
        emit_csv(rows, str(target), mode="a")


def test_bench_error_type_exists():
    # the oracle cross-check path raises this; constructing it is enough
    # to pin the public name
    assert issubclass(BenchError, Exception)
