import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose

from evflex.scenario import (
    REPORT_TABLES, ScenarioResult, ScenarioSpec, canonical_specs, compare, load_result, load_results, load_specs,
    metrics, price_stats, report, run_matrix, run_scenario, save_result,
)
from evflex.system import ConfigError


def with_prices(result, prices, consumption, weights):
    ys = replace(result.years[0], prices={"R": np.asarray(prices, float)},
                 consumption={"R": np.asarray(consumption, float)}, weights=np.asarray(weights, float))
    return ScenarioResult(result.spec, [ys])


@pytest.fixture(scope="module")
def by_name(tiny_matrix):
    return {r.name: r for r in tiny_matrix}


# -- price statistics ------------------------------------------------------------------
def test_constant_price_has_zero_spread(tiny_matrix):
    res = with_prices(tiny_matrix[0], [42.0] * 4, [1, 2, 3, 4], [1, 1, 1, 1])
    assert price_stats(res, "R", res.years[0].year) == (pytest.approx(42.0), 0.0)


def test_two_price_example(tiny_matrix):
    res = with_prices(tiny_matrix[0], [10.0, 30.0], [5.0, 5.0], [1.0, 1.0])
    mean, std = price_stats(res, "R", res.years[0].year)
    assert (mean, std) == (pytest.approx(20.0), pytest.approx(10.0))


def test_stats_ignore_consumption_scale(tiny_matrix):
    yr = tiny_matrix[0].years[0].year
    a = with_prices(tiny_matrix[0], [10.0, 30.0, 25.0], [1.0, 3.0, 2.0], [2.0, 1.0, 1.0])
    b = with_prices(tiny_matrix[0], [10.0, 30.0, 25.0], [2.0, 6.0, 4.0], [2.0, 1.0, 1.0])
    assert_allclose(price_stats(a, "R", yr), price_stats(b, "R", yr), rtol=1e-12)
    mean, _ = price_stats(a, "R", yr)
    assert mean == pytest.approx((10 * 2 + 30 * 3 + 25 * 2) / 7)
    assert price_stats(a, "R", yr, basis="time")[0] == pytest.approx((20 + 30 + 25) / 4)
    with pytest.raises(ValueError):
        price_stats(a, "R", yr, basis="hourly")


# -- comparison -------------------------------------------------------------------------
def test_compare_with_itself_is_zero(by_name):
    d = compare(by_name["SC_noTransEx"], by_name["SC_noTransEx"])
    assert all(v == 0.0 for v in d.values.values())


def test_compare_is_antisymmetric(by_name):
    a, b = by_name["PC_noTransEx"], by_name["V2G_noTransEx"]
    fwd, back = compare(a, b), compare(b, a)
    assert fwd.values.keys() == back.values.keys()
    for k, v in fwd.values.items():
        assert v == -back.values[k]
    assert (-fwd).values == back.values


def test_flexible_schemes_need_less_storage(by_name):
    for tx in ("noTransEx", "TransEx"):
        pc = by_name[f"PC_{tx}"]
        assert compare(pc, by_name[f"SC_{tx}"]).get("battery_investment", "cost_eur") <= 0
        assert compare(pc, by_name[f"V2G_{tx}"]).get("battery_investment", "cost_eur") <= 0


def test_compare_rejects_mismatched_years(by_name, tiny_config):
    short = run_scenario(ScenarioSpec("PC", years=(2020,), system_config=tiny_config, seed=3))
    with pytest.raises(ValueError):
        compare(by_name["PC_noTransEx"], short)


def test_per_year_results_sum_to_totals(by_name):
    for res in by_name.values():
        assert res.total_cost == pytest.approx(sum(y.objective for y in res.years), rel=1e-12)
        assert sum(res.cost_breakdown().values()) == pytest.approx(res.total_cost, rel=1e-9)
        assert res.year_list == [2020, 2030]


def test_matrix_equals_single_runs(by_name, tiny_config):
    one = run_scenario(ScenarioSpec("V2G", True, system_config=tiny_config, seed=3))
    assert one.total_cost == pytest.approx(by_name["V2G_TransEx"].total_cost, rel=1e-9)


def test_zero_ev_stock_makes_schemes_equal(tiny_config):
    res = run_matrix([ScenarioSpec(s, system_config=tiny_config, seed=3, ev_stock_scale=0.0, years=(2020,))
                      for s in ("PC", "SC", "V2G")])
    costs = [r.total_cost for r in res]
    assert costs[1] == pytest.approx(costs[0], rel=1e-9)
    assert costs[2] == pytest.approx(costs[0], rel=1e-9)
    assert all(r.years[0].costs["ev_degradation"] == 0.0 for r in res)


# -- persistence and reports -------------------------------------------------------------------
def test_save_load_round_trip(by_name, tmp_path):
    res = by_name["V2G_noTransEx"]
    path = save_result(res, tmp_path)
    back = load_result(path)
    assert back.spec == res.spec
    assert metrics(back) == metrics(res)
    assert [r.name for r in load_results(tmp_path)] == ["V2G_noTransEx"]
    with pytest.raises(ConfigError):
        load_results(tmp_path / "empty")


def test_report_inventory_single(by_name, tmp_path):
    files = report([by_name["PC_noTransEx"]], tmp_path)
    names = sorted(p.name for p in files)
    assert names == sorted(REPORT_TABLES + ("summary.json",))
    assert sorted(p.name for p in tmp_path.iterdir()) == names


def test_report_inventory_matrix(tiny_matrix, tmp_path):
    files = report(tiny_matrix, tmp_path)
    deltas = sorted(p.name for p in files if p.name.startswith("delta_"))
    assert deltas == sorted(f"delta_{s}_{t}_vs_PC_{t}.csv" for s in ("SC", "V2G") for t in ("noTransEx", "TransEx"))
    assert len(files) == 6 + 4
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert set(summary["scenarios"]) == {r.name for r in tiny_matrix}


def test_report_rerun_is_byte_identical(tiny_matrix, tmp_path):
    first = {p.name: p.read_bytes() for p in report(tiny_matrix, tmp_path / "a")}
    second = {p.name: p.read_bytes() for p in report(tiny_matrix, tmp_path / "a")}
    assert first == second


def test_report_from_saved_results_matches(tiny_matrix, tmp_path):
    for r in tiny_matrix:
        save_result(r, tmp_path / "saved")
    direct = {p.name: p.read_bytes() for p in report(tiny_matrix, tmp_path / "a")}
    loaded = {p.name: p.read_bytes() for p in report(load_results(tmp_path / "saved"), tmp_path / "b")}
    assert direct == loaded


# -- specifications ------------------------------------------------------------------------------
def write(path: Path, obj) -> Path:
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return path


def test_spec_forms(tmp_path):
    one = load_specs(write(tmp_path / "a.json", {"scheme": "SC", "transmission_expansion": True}))
    assert [s.name for s in one] == ["SC_TransEx"]
    many = load_specs(write(tmp_path / "b.json", {"matrix": True, "seed": 4, "years": [2020]}))
    assert [s.name for s in many] == [s.name for s in canonical_specs()]
    assert all(s.seed == 4 and s.years == (2020,) for s in many)
    listed = load_specs(write(tmp_path / "c.json", {"seed": 2, "trip_config": "trips.csv",
                                                    "scenarios": [{"scheme": "PC"}, {"scheme": "V2G"}]}))
    assert listed[1].trip_config == str(tmp_path / "trips.csv")


@pytest.mark.parametrize("content", [
    "not json", "[1, 2]", {"transmission_expansion": True}, {"scheme": "XYZ"}, {"scheme": "PC", "bogus": 1},
    {"scheme": "PC", "years": [2030, 2020]}, {"scheme": "PC", "ev_stock_scale": -1}, {"scheme": "PC", "sample_size": 0},
])
def test_spec_errors(tmp_path, content):
    with pytest.raises(ConfigError):
        load_specs(write(tmp_path / "s.json", content))


def test_unknown_year_rejected(tiny_config):
    with pytest.raises(ConfigError):
        run_scenario(ScenarioSpec("PC", years=(2040,), system_config=tiny_config))
