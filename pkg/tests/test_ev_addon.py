import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from evflex import data
from evflex.ev_addon import (
    ChargingScheme, build_passive, build_smart, build_v2g, calendar_degradation_cost, check_passive_in_smart,
    cycle_degradation_cost, dump_block, replacement_cost, standalone,
)
from evflex.fleet import aggregate_fleet, build_fleet_profile, schedule_from_days
from evflex.lp import LinearProgram, loads, solve, verify
from evflex.trips import TripSynthesisSpec, synth_trip_library

from oracles import calendar_cost, cycle_cost

BEV20 = data.vehicle_class("BEV", 2020)
BEV50 = data.vehicle_class("BEV", 2050)
ETA = 0.85


def idle_profile(vclass, vehicles, days=7):
    s = schedule_from_days(np.full(days, -1), np.full(days, -1), np.zeros(days), vclass)
    return aggregate_fleet([s], vehicles, "DK", vclass)


def commuter(days=2, dep=480, arr=1020, km=40.0):
    s = schedule_from_days(np.full(days, dep), np.full(days, arr), np.full(days, km), BEV20)
    return aggregate_fleet([s], 1, "DK", BEV20)


@pytest.fixture(scope="module")
def fleet_week():
    lib = synth_trip_library(seed=5, spec=TripSynthesisSpec(trips_per_weekday=300))
    return build_fleet_profile(lib, BEV20, "DK", 20_000, 200, 3).window(504, 168)


# -- degradation arithmetic -------------------------------------------------------
def test_replacement_cost_2020():
    p = idle_profile(BEV20, 100.0 / 0.03)
    assert p.soc_max_mwh[0] == pytest.approx(100.0)
    assert replacement_cost(p, BEV20) == pytest.approx(19.25e6)


def test_replacement_cost_2050():
    p = idle_profile(BEV50, 100.0 / 0.05)
    assert replacement_cost(p, BEV50) == pytest.approx(7.7e6)


def test_replacement_cost_empty_fleet():
    assert replacement_cost(idle_profile(BEV20, 0.0), BEV20) == 0.0


def test_cycle_cost_example():
    got = cycle_degradation_cost(np.array([11.0]), np.array([100.0]), 1e6, BEV20)[0]
    assert abs(got - 16.0) <= 1e-9
    assert abs(got - cycle_cost(11.0, 100.0, 1e6)) <= 1e-9


def test_cycle_cost_zero_and_linear():
    charged = np.array([0.0, 3.0, 6.0])
    c = cycle_degradation_cost(charged, np.full(3, 50.0), 2e6, BEV20)
    assert c[0] == 0.0
    assert c[2] == pytest.approx(2 * c[1])


def test_cycle_cost_guard():
    with pytest.raises(ValueError):
        cycle_degradation_cost(np.array([1.0]), np.array([0.0]), 1e6, BEV20)
    assert cycle_degradation_cost(np.array([0.0]), np.array([0.0]), 1e6, BEV20)[0] == 0.0


def test_calendar_cost_examples():
    half = calendar_degradation_cost(np.array([55.0]), np.array([100.0]), 1e6, BEV20)[0]
    empty = calendar_degradation_cost(np.array([0.0]), np.array([100.0]), 1e6, BEV20)[0]
    assert abs(half - 4.20) <= 1e-9
    assert abs(empty - 2.40) <= 1e-9
    assert abs(half - calendar_cost(55.0, 100.0, 1e6)) <= 1e-9


def test_calendar_cost_unplugged_hour():
    c = calendar_degradation_cost(np.array([0.0]), np.array([0.0]), 1e6, BEV20, available_share=0.0)
    assert c[0] == 0.0


def test_degradation_parameters_match_tables():
    p = BEV20.degradation
    assert (p.cyc_factor, p.cal_const, p.cal_flex, p.oversize_factor, p.lifetime_fraction) == (
        0.00004, 0.0000006, 0.0000009, 1.1, 0.25)
    assert BEV20.charge_efficiency == 0.85
    assert BEV20.emergency_soc_kwh == pytest.approx(9.0)


# -- passive ------------------------------------------------------------------------------
def test_passive_idle_fleet_adds_no_load():
    lp = LinearProgram()
    blk = build_passive(lp, idle_profile(BEV20, 500), BEV20)
    assert_array_equal(blk.fixed_load, 0.0)
    assert lp.num_vars == 0 and lp.num_rows == 0
    assert blk.constant_cost > 0  # calendar ageing of a plugged-in fleet


def test_passive_single_vehicle_load():
    p = commuter(days=1, dep=510, arr=1035).scaled(1000)
    blk = build_passive(LinearProgram(), p, BEV20)
    assert blk.fixed_load[18] == pytest.approx(1000 * 7.2 / ETA / 1000.0)


def test_passive_constant_matches_formulas(fleet_week):
    lp = LinearProgram()
    blk = build_passive(lp, fleet_week, BEV20, weight=2.0)
    repl = replacement_cost(fleet_week, BEV20)
    share = fleet_week.available_count / fleet_week.vehicles
    smax = fleet_week.soc_max_mwh
    ok = smax > 0
    expect = cycle_cost(fleet_week.passive_load_mw[ok], smax[ok], repl).sum()
    expect += (6e-7 * share * repl / 0.25).sum()
    expect += (9e-7 * fleet_week.passive_soc_mwh[ok] / (1.1 * smax[ok]) * repl / 0.25).sum()
    assert blk.constant_cost == pytest.approx(2.0 * expect, rel=1e-12)
    assert lp.obj_constant == blk.constant_cost


# -- smart ---------------------------------------------------------------------------------
def test_smart_idle_fleet_does_not_charge():
    lp, blk = standalone(idle_profile(BEV20, 100), BEV20, "SC", price=0.0)
    sol = solve(lp)
    assert sol.status == "optimal"
    assert_allclose(sol.x[blk.charge], 0.0, atol=1e-12)


def test_smart_block_structure(fleet_week):
    lp = LinearProgram()
    blk = build_smart(lp, fleet_week, BEV20)
    T = fleet_week.hours
    assert blk.discharge is None
    assert lp.num_vars == 2 * T and lp.num_rows == T
    assert_array_equal(lp.lb[blk.vsoc], fleet_week.soc_min_mwh)
    assert_array_equal(lp.ub[blk.vsoc], fleet_week.soc_max_mwh)
    assert_allclose(lp.ub[blk.charge] + fleet_week.inflexible_load_mw, fleet_week.charger_capacity_mw)


def test_departure_forces_full_battery():
    p = commuter()
    rng = np.random.default_rng(0)
    for _ in range(5):
        lp, blk = standalone(p, BEV20, "SC", price=rng.uniform(0, 100, p.hours))
        sol = solve(lp)
        charged = ETA * (sol.x[blk.charge] + p.inflexible_load_mw)
        # home from hour 18 until the next departure at 08:00 (hour 32)
        assert charged[18:32].sum() == pytest.approx(0.0072, abs=1e-12)
        assert sol.x[blk.vsoc][31] == pytest.approx(0.030, abs=1e-12)


def test_passive_schedule_fits_smart_rows(fleet_week):
    check = check_passive_in_smart(fleet_week)
    assert check.ok, check
    lp = LinearProgram()
    blk = build_smart(lp, fleet_week, BEV20)
    x = np.zeros(lp.num_vars)
    x[blk.charge] = fleet_week.passive_load_mw - fleet_week.inflexible_load_mw
    x[blk.vsoc] = fleet_week.passive_soc_mwh
    act = lp.A @ x
    assert_allclose(act, lp.rhs, atol=1e-9)
    assert np.all(x >= lp.lb - 1e-9) and np.all(x <= lp.ub + 1e-9)


# -- V2G ----------------------------------------------------------------------------------------
def test_v2g_without_discharge_equals_smart(fleet_week):
    sc, v2 = LinearProgram(), LinearProgram()
    bs = build_smart(sc, fleet_week, BEV20)
    bv = build_v2g(v2, fleet_week, BEV20)
    keep = np.setdiff1d(np.arange(v2.num_vars), bv.discharge)
    A = v2.A[:, keep].toarray()
    soc_rows = bv.rows["soc"]
    assert_array_equal(A[soc_rows], sc.A.toarray())
    assert_array_equal(v2.rhs[soc_rows], sc.rhs)
    assert_array_equal(v2.lb[keep], sc.lb)
    assert_array_equal(v2.ub[keep], sc.ub)
    assert_array_equal(v2.cost[keep], sc.cost)
    # the shared charger row reduces to the charge bound
    ch = bv.rows["charger"]
    assert_array_equal(v2.rhs[ch], sc.ub[bs.charge])


def test_round_trip_loss():
    p = commuter()
    lp = LinearProgram()
    blk = build_v2g(lp, p, BEV20)
    A = lp.A.toarray()
    row = blk.rows["soc"][20]
    stored = -A[row, blk.charge[20]] * 1.0
    back = stored / A[row, blk.discharge[20]]
    assert 1.0 - back == pytest.approx(0.2775)


def test_no_discharge_while_away():
    p = commuter()
    lp = LinearProgram()
    blk = build_v2g(lp, p, BEV20)
    away = p.available_count == 0
    assert away.any()
    assert_array_equal(lp.ub[blk.discharge][away], 0.0)


def test_scheme_ordering_on_random_prices(fleet_week):
    rng = np.random.default_rng(42)
    for _ in range(3):
        price = rng.uniform(0, 150, fleet_week.hours)
        obj = {}
        for s in ("PC", "SC", "V2G"):
            lp, blk = standalone(fleet_week, BEV20, s, price=price)
            sol = solve(lp)
            assert verify(lp, sol).ok
            obj[s] = sol.objective
        assert obj["V2G"] <= obj["SC"] + 1e-9 * abs(obj["SC"])
        assert obj["SC"] <= obj["PC"] + 1e-9 * abs(obj["PC"])


def test_solution_properties(fleet_week):
    price = 50 + 40 * np.sin(np.arange(fleet_week.hours) * 2 * np.pi / 24)
    lp, blk = standalone(fleet_week, BEV20, "V2G", price=price)
    sol = solve(lp)
    x = sol.x
    ch, dis, soc = x[blk.charge], x[blk.discharge], x[blk.vsoc]
    assert np.all(ch >= -1e-12) and np.all(dis >= -1e-12)
    assert np.all(soc >= fleet_week.soc_min_mwh - 1e-9) and np.all(soc <= fleet_week.soc_max_mwh + 1e-9)
    assert np.all(ch + dis + fleet_week.inflexible_load_mw <= fleet_week.charger_capacity_mw + 1e-9)
    inflow = (fleet_week.soc_injection_mwh + ETA * (ch + fleet_week.inflexible_load_mw) - dis / ETA
              - fleet_week.trip_withdrawal_mwh).sum()
    assert inflow == pytest.approx(fleet_week.passive_drift_mwh, abs=1e-7)
    assert blk.degradation_cost(x) >= 0
    assert (blk.cycle_coef >= 0).all() and (blk.calendar_flex_coef >= 0).all()


def test_empty_fleet_block_is_empty():
    for s in ChargingScheme:
        lp, blk = standalone(idle_profile(BEV20, 0.0), BEV20, s)
        assert lp.num_vars == lp.num_rows == 0
        assert lp.obj_constant == 0.0


def test_dump_is_valid_lp_text(tmp_path, fleet_week):
    text = dump_block(fleet_week, BEV20, "V2G", tmp_path / "blk.lp")
    lp = loads(text)
    assert lp.num_rows == 2 * fleet_week.hours
    assert (tmp_path / "blk.lp").read_text() == text
