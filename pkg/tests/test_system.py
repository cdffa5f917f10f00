import json
from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from evflex.lp import solve
from evflex.scenario import FleetCache, ScenarioSpec
from evflex.system import (
    COST_CATEGORIES, ConfigError, ModelInfeasible, Period, Region, StationaryBattery, SystemConfig,
    SystemInstance, Technology, TransmissionLink, assemble, bundled_config_path, carry_forward, solve_year,
)

GAS = Technology("gas", "thermal", fuel_cost=20.0, efficiency=0.5, emission_factor=0.2, vom=2.0)
COAL = Technology("coal", "thermal", fuel_cost=8.0, efficiency=0.4, emission_factor=0.34, vom=4.0)


def one_region(demand, techs, existing=None, year=2030, **kw):
    demand = np.asarray(demand, dtype=float)
    return SystemInstance(year=year, regions={"R": Region("R", demand, kw.pop("profiles", {}), kw.pop("co2", 0.0))},
                          technologies={t.id: t for t in techs}, existing={"R": existing or {}}, **kw)


def two_regions(link_capex, year=2030):
    cheap = Technology("cheap", "thermal", fuel_cost=10.0)
    dear = Technology("dear", "thermal", fuel_cost=100.0)
    regions = {"A": Region("A", np.zeros(4)), "B": Region("B", np.full(4, 100.0))}
    return SystemInstance(
        year=year, regions=regions, technologies={"cheap": cheap, "dear": dear},
        existing={"A": {"cheap": 500.0}, "B": {"dear": 500.0}},
        links=[TransmissionLink("A", "B", 0.0, link_capex, expandable_from_year=2030)],
    )


@pytest.fixture(scope="module")
def desk():
    return SystemConfig.load(bundled_config_path())


# -- hand-solved toys -----------------------------------------------------------------
def test_flat_demand_invests_exactly():
    tech = Technology("g", "thermal", fuel_cost=30.0, capex=1000.0, investable=True)
    inst = one_region([10.0, 10.0], [tech])
    ys = solve_year(inst, "PC", False)
    assert ys.investments[("R", "g")] == pytest.approx(10.0)
    assert_allclose(ys.dispatch["gen:R:g"], 10.0)
    assert ys.objective == pytest.approx(1000.0 * 10 + 8760 * 30.0 * 10)
    # the cost of the marginal MW in both hours together: fuel for 8760 h plus capex
    assert ys.duals["R"].sum() == pytest.approx(8760 * 30.0 + 1000.0)


def test_price_is_marginal_running_cost():
    inst = one_region([5.0, 12.0], [COAL, GAS], {"coal": 8.0, "gas": 20.0})
    ys = solve_year(inst, "PC", False)
    assert_allclose(ys.prices["R"], [COAL.running_cost(), GAS.running_cost()])
    assert_allclose(ys.dispatch["gen:R:coal"], [5.0, 8.0])


def test_zero_demand_costs_nothing():
    tech = Technology("g", "thermal", fuel_cost=30.0, capex=1000.0, investable=True)
    inst = one_region([0.0, 0.0, 0.0], [tech], battery=StationaryBattery(100.0, 100.0, 0.9))
    ys = solve_year(inst, "V2G", True)
    assert ys.objective == 0.0
    assert np.all(ys.solution.x == 0.0)


def test_link_expansion_when_cheap():
    ys = solve_year(two_regions(link_capex=1000.0), "PC", True)
    x = ys.link_expansion[("A", "B")]
    assert x == pytest.approx(100.0 / 0.98)
    assert_allclose(ys.dispatch["flow:A:B"], 100.0 / 0.98)
    assert ys.costs["transmission"] == pytest.approx(1000.0 * x)


def test_no_link_expansion_past_crossover():
    crossover = 8760 * (100.0 * 0.98 - 10.0)
    assert solve_year(two_regions(crossover * 1.01), "PC", True).link_expansion[("A", "B")] == 0.0
    assert solve_year(two_regions(crossover * 0.99), "PC", True).link_expansion[("A", "B")] > 0.0


def test_no_expansion_variables_without_flag_or_before_year():
    inst = two_regions(1000.0)
    assert not assemble(inst, "PC", False).expansion
    assert not assemble(replace(inst, year=2020), "PC", True).expansion
    assert assemble(inst, "PC", True).expansion


def test_expansion_never_hurts_on_toy():
    for capex in (1000.0, 5e5, 1e7):
        inst = two_regions(capex)
        on = solve_year(inst, "PC", True).objective
        off = solve_year(inst, "PC", False).objective
        assert on <= off * (1 + 1e-9)


def test_balance_dual_equals_finite_difference():
    inst = one_region([5.0, 12.0, 9.0], [COAL, GAS], {"coal": 8.0, "gas": 20.0})
    m = assemble(inst, "PC", False)
    base = solve(m.lp)
    for t in range(3):
        lp = m.lp.copy()
        row = m.balance["R"][t]
        lp.set_rhs(row, lp.rhs[row] + 1.0)
        assert solve(lp, warm_start=base).objective - base.objective == pytest.approx(base.row_duals[row])


def test_co2_price_doubling_weakly_increases_cost():
    techs = [COAL, GAS, Technology("wind", "vre", capex=90000.0, investable=True, profile="wind")]
    wind = np.array([0.1, 0.6, 0.3, 0.8])
    costs = []
    for price in (20.0, 40.0, 80.0):
        inst = one_region([10.0, 8.0, 12.0, 6.0], techs, {"coal": 10.0, "gas": 15.0}, co2=price,
                          profiles={"wind": wind})
        costs.append(solve_year(inst, "PC", False).objective)
    assert costs[0] <= costs[1] <= costs[2]


def test_variable_output_feeds_balance():
    wind = Technology("wind", "vre", vom=1.0, profile="wind")
    cf = np.array([0.2, 0.9])
    inst = one_region([10.0, 10.0], [wind, GAS], {"wind": 10.0, "gas": 20.0}, profiles={"wind": cf})
    ys = solve_year(inst, "PC", False)
    assert_allclose(ys.dispatch["gen:R:gas"], [8.0, 1.0])
    assert ys.curtailment["R"] == 0.0
    assert ys.generation[("R", "wind")] == pytest.approx(4380 * 11.0)


def test_battery_shifts_energy_within_period():
    cheap = Technology("base", "thermal", fuel_cost=10.0)
    peak = Technology("peak", "thermal", fuel_cost=200.0)
    bat = StationaryBattery(energy_capex=1.0, power_capex=1.0, efficiency=0.81)
    inst = one_region([5.0, 5.0, 15.0, 15.0], [cheap, peak], {"base": 10.0, "peak": 20.0}, battery=bat)
    ys = solve_year(inst, "PC", False)
    e, p = ys.battery_investment["R"]
    assert p > 0 and e > 0
    ch, dis = ys.dispatch["battery_charge:R"], ys.dispatch["battery_discharge:R"]
    assert (0.9 * ch - dis / 0.9).sum() == pytest.approx(0.0, abs=1e-9)


def test_infeasible_report_names_hour_and_region():
    inst = one_region([5.0, 5.0, 30.0, 5.0], [GAS], {"gas": 20.0})
    with pytest.raises(ModelInfeasible) as info:
        solve_year(inst, "PC", False)
    rep = info.value.report
    assert (rep.region, rep.hour, rep.calendar_hour) == ("R", 2, 2)
    assert "R" in rep.message() and json.dumps(rep.to_dict())


def test_cost_categories_sum_to_objective():
    techs = [COAL, GAS, Technology("wind", "vre", capex=90000.0, fom=1000.0, investable=True, profile="wind")]
    inst = one_region([10.0, 8.0, 12.0, 6.0], techs, {"coal": 10.0, "gas": 15.0}, co2=50.0,
                      profiles={"wind": np.array([0.1, 0.6, 0.3, 0.8])},
                      battery=StationaryBattery(5000.0, 3000.0, 0.85, vom=1.0))
    ys = solve_year(inst, "PC", False)
    assert set(ys.costs) == set(COST_CATEGORIES)
    assert sum(ys.costs.values()) == pytest.approx(ys.objective, rel=1e-12)
    assert ys.costs["co2"] == pytest.approx(50.0 * sum(ys.emissions.values()))


def test_emissions_equal_fuel_times_factor():
    inst = one_region([5.0, 12.0], [COAL, GAS], {"coal": 8.0, "gas": 20.0}, co2=10.0)
    ys = solve_year(inst, "PC", False)
    techs = inst.technologies
    total = sum(ys.fuel_use[("R", t)] * techs[t].emission_factor for t in techs)
    assert ys.emissions["R"] == total
    assert ys.fuel_use[("R", "gas")] == pytest.approx(ys.generation[("R", "gas")] / 0.5)


def scaled(inst, k):
    techs = {t: replace(v, fuel_cost=v.fuel_cost * k, vom=v.vom * k, fom=v.fom * k,
                        capex=np.asarray(v.capex) * k if not isinstance(v.capex, dict)
                        else {y: c * k for y, c in v.capex.items()})
             for t, v in inst.technologies.items()}
    regions = {r: replace(v, co2_price=v.co2_price * k) for r, v in inst.regions.items()}
    bat = inst.battery and replace(inst.battery, energy_capex=inst.battery.energy_capex * k,
                                   power_capex=inst.battery.power_capex * k, vom=inst.battery.vom * k)
    links = [replace(l, capex=l.capex * k) for l in inst.links]
    return replace(inst, technologies=techs, regions=regions, battery=bat, links=links)


def test_cost_scaling(desk):
    inst = desk.instance(2030)
    base = solve_year(inst, "PC", True)
    k = 3.7
    other = solve_year(scaled(inst, k), "PC", True)
    assert other.objective == pytest.approx(k * base.objective, rel=1e-9)
    # the scaled optimum is optimal for the original costs as well
    assert base.model.lp.objective(other.solution.x) == pytest.approx(base.objective, rel=1e-9)


# -- carry-over -----------------------------------------------------------------------------
def investing(year, lifetime=15):
    tech = Technology("g", "thermal", fuel_cost=30.0, capex=1000.0, investable=True, lifetime=lifetime)
    return one_region([10.0, 10.0], [tech], year=year)


def test_zero_investment_leaves_instance_unchanged():
    inst = one_region([5.0, 12.0], [COAL, GAS], {"coal": 8.0, "gas": 20.0})
    ys = solve_year(inst, "PC", False)
    nxt = one_region([5.0, 12.0], [COAL, GAS], {"coal": 8.0, "gas": 20.0}, year=2040)
    carried = carry_forward(ys, nxt)
    assert carried.vintages == ()
    assert carried.capacity("R", "coal") == nxt.capacity("R", "coal")


def test_investment_appears_next_decade_and_retires():
    y30 = solve_year(investing(2030), "PC", False)
    i40 = carry_forward(y30, investing(2040))
    assert i40.capacity("R", "g") == pytest.approx(10.0)
    y40 = solve_year(i40, "PC", False)
    assert y40.investments[("R", "g")] == pytest.approx(0.0)
    i50 = carry_forward(y40, investing(2050))
    assert i50.capacity("R", "g") == 0.0
    assert solve_year(i50, "PC", False).investments[("R", "g")] == pytest.approx(10.0)


def test_carry_forward_rejects_year_mismatch():
    ys = solve_year(investing(2030), "PC", False)
    with pytest.raises(ValueError):
        carry_forward(ys, investing(2030))
    with pytest.raises(ValueError):
        carry_forward(ys, investing(2020))


def test_battery_and_link_vintages_carry():
    ys = solve_year(two_regions(1000.0), "PC", True)
    nxt = carry_forward(ys, two_regions(1000.0, year=2040))
    link = nxt.links[0]
    assert nxt.link_capacity(link) == pytest.approx(100.0 / 0.98)
    assert solve_year(nxt, "PC", False).objective < solve_year(two_regions(1000.0, 2040), "PC", False).objective


# -- configuration and fixture ------------------------------------------------------------------
def test_fixture_time_structure(desk):
    inst = desk.instance(2050)
    assert inst.hours == 336
    assert inst.hour_weights.sum() == pytest.approx(8760.0)
    assert [p.start_hour % 168 for p in inst.periods] == [0, 0]
    assert {p.start_hour // 24 % 7 for p in inst.periods} == {desk.start_weekday}
    assert set(inst.regions) == {"DK", "NO", "SE"}


def test_config_errors(tmp_path, desk):
    raw = dict(desk.raw)
    del raw["periods"]
    (tmp_path / "bad.json").write_text(json.dumps(raw))
    with pytest.raises(ConfigError):
        SystemConfig.load(tmp_path / "bad.json")
    with pytest.raises(ConfigError):
        desk.instance(2025)
    with pytest.raises(ConfigError):
        Technology("x", "fusion")
    with pytest.raises(ConfigError):
        Region("R", np.array([1.0]), {"wind": np.array([1.5])})


def test_period_weights_must_cover_year():
    inst = one_region([1.0, 1.0], [GAS], {"gas": 5.0}, periods=[Period("p", 0, 2, 100.0)])
    with pytest.raises(ConfigError):
        inst.validate()


def test_zero_fleet_programs_identical(desk):
    spec = ScenarioSpec("PC", ev_stock_scale=0.0, sample_size=20)
    fleets = FleetCache().fleets(spec, desk, 2030)
    inst = desk.instance(2030, fleets)
    lps = [assemble(inst, s, True).lp for s in ("PC", "SC", "V2G")]
    assert lps[0].structure_equal(lps[1])
    assert lps[0].structure_equal(lps[2])


def test_ev_loads_enter_balance(desk):
    spec = ScenarioSpec("PC", sample_size=50)
    fleets = FleetCache().fleets(spec, desk, 2030)
    inst = desk.instance(2030, fleets)
    m = assemble(inst, "PC", False)
    rhs = m.lp.rhs[m.balance["DK"]]
    avail = sum(a for (r, _), a in m.available.items() if r == "DK")
    ev = np.zeros(inst.hours)
    off = 0
    for p in inst.periods:
        for prof, _ in fleets["DK"]:
            ev[off:off + p.hours] += prof.window(p.start_hour, p.hours).passive_load_mw
        off += p.hours
    assert len(fleets["DK"]) == 2
    assert_allclose(rhs, inst.regions["DK"].demand - avail + ev, rtol=1e-12, atol=1e-9)
