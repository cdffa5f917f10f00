"""Scenario matrix: charging scheme x transmission expansion over the model years.

Seeds
-----
Everything random derives from ``ScenarioSpec.seed``:

* a synthesized trip library uses ``seed`` directly;
* vehicle ``v`` of fleet ``(region r, kind k)`` uses ``seed ^ ((r * K + k) * N + v)``
  where ``r``/``k`` are positions in the config's region and kind lists, ``K``
  the number of kinds and ``N`` the sample size.

The same vehicles are therefore used by all schemes and all years of a run.

Warm starts
-----------
:func:`run_matrix` solves all scenarios of one year before moving to the next.
A scenario's program is started from the final basis of a related program of
the same year: TransEx from noTransEx, SC from PC, V2G from SC.  This changes
only the speed (and, among equally cheap optima, possibly which one is
returned); the starting point is a fixed function of the scenario set, so
repeated runs are identical.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import data
from .data import VehicleKind, vehicle_class
from .ev_addon import ChargingScheme
from .fleet import DEFAULT_SAMPLE, FleetProfile, build_fleet_profile, draw_fleet_days
from .lp import Tolerances, transfer_basis
from .system import (
    COST_CATEGORIES,
    ConfigError,
    ModelInfeasible,
    SystemConfig,
    YearSolution,
    assemble,
    bundled_config_path,
    carry_forward,
    solve_year,
)
from .trips import TripDataError, TripLibrary, TripSynthesisSpec, load_trip_library, synth_trip_library

log = logging.getLogger(__name__)

SCHEMES = (ChargingScheme.PASSIVE, ChargingScheme.SMART, ChargingScheme.V2G)


def scenario_name(scheme, trans_expansion: bool) -> str:
    return f"{ChargingScheme(scheme).value}_{'TransEx' if trans_expansion else 'noTransEx'}"


# -- specification -------------------------------------------------------------------
@dataclass(frozen=True)
class ScenarioSpec:
    scheme: ChargingScheme
    transmission_expansion: bool = False
    years: tuple | None = None  # None: the system config's years
    seed: int = 0
    system_config: str | None = None  # None: bundled fixture
    trip_config: str | None = None  # None: default synthetic library
    sample_size: int | None = None  # None: system config (or 1000)
    ev_stock_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "scheme", ChargingScheme(self.scheme))
        if self.years is not None:
            years = tuple(int(y) for y in self.years)
            if any(b <= a for a, b in zip(years, years[1:])) or not years:
                raise ConfigError("scenario years must be non-empty and strictly increasing")
            object.__setattr__(self, "years", years)
        if self.ev_stock_scale < 0:
            raise ConfigError("ev_stock_scale must be non-negative")
        if self.sample_size is not None and self.sample_size <= 0:
            raise ConfigError("sample_size must be positive")

    @property
    def name(self) -> str:
        return scenario_name(self.scheme, self.transmission_expansion)

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme.value, "transmission_expansion": self.transmission_expansion,
            "years": None if self.years is None else list(self.years), "seed": self.seed,
            "system_config": self.system_config, "trip_config": self.trip_config,
            "sample_size": self.sample_size, "ev_stock_scale": self.ev_stock_scale,
        }

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> "ScenarioSpec":
        known = {"scheme", "transmission_expansion", "years", "seed", "system_config", "trip_config",
                 "sample_size", "ev_stock_scale"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown scenario keys: {sorted(extra)}")
        if "scheme" not in d:
            raise ConfigError("scenario lacks 'scheme'")
        d = dict(d)
        for key in ("system_config", "trip_config"):
            if d.get(key) and base_dir is not None and not Path(d[key]).is_absolute():
                d[key] = str(base_dir / d[key])
        try:
            return cls(**d)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def family(self) -> tuple:
        """Scenarios sharing this key share fleets and can warm-start each other."""
        return (self.years, self.seed, self.system_config, self.trip_config, self.sample_size, self.ev_stock_scale)


def canonical_specs(**common) -> list[ScenarioSpec]:
    """The six scheme x expansion combinations, PC first."""
    return [ScenarioSpec(s, tx, **common) for s in SCHEMES for tx in (False, True)]


def load_specs(path: str | Path) -> list[ScenarioSpec]:
    """Specs from JSON: one spec, ``{"scenarios": [...]}``, or ``{"matrix": true, ...common}``."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read scenario spec {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("scenario spec must be a JSON object")
    base = path.parent
    if "scenarios" in raw:
        common = {k: v for k, v in raw.items() if k != "scenarios"}
        return [ScenarioSpec.from_dict({**common, **s}, base) for s in raw["scenarios"]]
    if raw.get("matrix"):
        common = {k: v for k, v in raw.items() if k != "matrix"}
        return [ScenarioSpec.from_dict({**common, "scheme": s.value, "transmission_expansion": tx}, base)
                for s in SCHEMES for tx in (False, True)]
    return [ScenarioSpec.from_dict(raw, base)]


# -- inputs ---------------------------------------------------------------------------------
def load_trip_input(trip_config: str | None, seed: int) -> TripLibrary:
    """Trip library from a CSV, a JSON trip config, or the default synthesis."""
    if trip_config is None:
        return synth_trip_library(seed)
    path = Path(trip_config)
    try:
        if path.suffix.lower() == ".csv":
            lib = load_trip_library(path)
        else:
            cfg = json.loads(path.read_text(encoding="utf-8"))
            if "csv" in cfg:
                csv_path = Path(cfg["csv"])
                if not csv_path.is_absolute():
                    csv_path = path.parent / csv_path
                lib = load_trip_library(csv_path, cfg.get("schema"), cfg.get("no_trip", 0.15))
            else:
                body = {k: v for k, v in cfg.items() if k != "seed"}
                lib = synth_trip_library(int(cfg.get("seed", seed)), TripSynthesisSpec.from_dict(body.get("synthesis", body)))
    except (OSError, json.JSONDecodeError, TripDataError, KeyError, TypeError) as exc:
        raise ConfigError(f"trip config {path}: {exc}") from None
    lib.ensure_complete()
    return lib


class FleetCache:
    """Fleet profiles shared across scenarios and years.

    Trip draws are cached per fleet; simulated sample sums per fleet and year.
    """

    def __init__(self):
        self._libs: dict = {}
        self._days: dict = {}
        self._profiles: dict = {}

    def library(self, spec: ScenarioSpec) -> TripLibrary:
        key = (spec.trip_config, spec.seed)
        if key not in self._libs:
            self._libs[key] = load_trip_input(spec.trip_config, spec.seed)
        return self._libs[key]

    def fleets(self, spec: ScenarioSpec, cfg: SystemConfig, year: int) -> dict:
        fc = cfg.fleet
        kinds = [VehicleKind(k) for k in fc.get("kinds", ["BEV", "PHEV"])]
        n = spec.sample_size or int(fc.get("sample_size", DEFAULT_SAMPLE))
        areas = fc.get("stock_areas", {r: r for r in cfg.raw["regions"]})
        stocks = fc.get("stocks")  # optional override: region -> kind -> year -> thousands
        lib = self.library(spec)
        out = {}
        for ri, rid in enumerate(cfg.raw["regions"]):
            blocks = []
            for ki, kind in enumerate(kinds):
                if stocks is not None:
                    try:
                        count = float(stocks[rid][kind.value][str(year)]) * 1000.0
                    except KeyError:
                        raise ConfigError(f"no stock for {rid}/{kind.value}/{year}") from None
                else:
                    area = areas.get(rid)
                    if area is None:
                        continue
                    try:
                        count = data.stock(area, kind, year)
                    except KeyError as exc:
                        raise ConfigError(str(exc)) from None
                count *= spec.ev_stock_scale
                try:
                    vclass = vehicle_class(kind, year)
                except KeyError as exc:
                    raise ConfigError(str(exc)) from None
                first = (ri * len(kinds) + ki) * n
                dkey = (spec.trip_config, spec.seed, n, first, cfg.start_weekday)
                if dkey not in self._days:
                    self._days[dkey] = draw_fleet_days(lib, n, spec.seed, first, start_weekday=cfg.start_weekday)
                pkey = dkey + (kind.value, year)
                if pkey not in self._profiles:
                    self._profiles[pkey] = build_fleet_profile(lib, vclass, rid, n, n, spec.seed, first,
                                                               start_weekday=cfg.start_weekday,
                                                               days=self._days[dkey])
                base: FleetProfile = self._profiles[pkey]
                blocks.append((base.scaled(count), vclass))
            out[rid] = blocks
        return out


# -- results ----------------------------------------------------------------------------
@dataclass
class ScenarioResult:
    spec: ScenarioSpec
    years: list[YearSolution] = field(default_factory=list)

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def year_list(self) -> list[int]:
        return [y.year for y in self.years]

    @property
    def regions(self) -> list[str]:
        return list(self.years[0].prices) if self.years else []

    def year(self, year: int) -> YearSolution:
        for y in self.years:
            if y.year == year:
                return y
        raise KeyError(f"{self.name}: year {year} not solved")

    @property
    def total_cost(self) -> float:
        return float(sum(y.objective for y in self.years))

    def cost_breakdown(self) -> dict[str, float]:
        return {c: float(sum(y.costs.get(c, 0.0) for y in self.years)) for c in COST_CATEGORIES}

    @property
    def battery_investment_cost(self) -> float:
        """Investment cost of stationary batteries summed over the model years (EUR)."""
        return float(sum(y.battery_investment_cost for y in self.years))

    def generation_twh(self, year: int | None = None) -> dict[str, float]:
        """Generation by technology summed over regions (TWh), one year or all years."""
        out: dict[str, float] = {}
        for y in self.years:
            if year is not None and y.year != year:
                continue
            for (_, tech), mwh in y.generation.items():
                out[tech] = out.get(tech, 0.0) + mwh / 1e6
        return dict(sorted(out.items()))

    def co2(self) -> dict[str, float]:
        """Emissions by region summed over the model years (t)."""
        out = {r: 0.0 for r in self.regions}
        for y in self.years:
            for r, t in y.emissions.items():
                out[r] += t
        return out


def price_stats(result: ScenarioResult, region: str, year: int, basis: str = "consumption") -> tuple[float, float]:
    """Weighted mean and population standard deviation of a region's hourly prices.

    Each modelled hour counts with its period weight; with ``basis="consumption"``
    additionally with its consumption (exogenous demand plus net EV draw).
    """
    y = result.year(year)
    p = np.asarray(y.prices[region], dtype=float)
    w = np.asarray(y.weights, dtype=float)
    if basis == "consumption":
        w = w * np.maximum(np.asarray(y.consumption[region], dtype=float), 0.0)
    elif basis != "time":
        raise ValueError("basis must be 'consumption' or 'time'")
    total = w.sum()
    if total <= 0:
        return float("nan"), float("nan")
    mean = float(w @ p / total)
    var = float(w @ (p - mean) ** 2 / total)
    return mean, float(np.sqrt(max(var, 0.0)))


# -- running ------------------------------------------------------------------------------
_PARENT = {
    ("SC", False): ("PC", False),
    ("V2G", False): ("SC", False),
}


def _parent(spec: ScenarioSpec):
    if spec.transmission_expansion:
        return (spec.scheme.value, False)
    return _PARENT.get((spec.scheme.value, False))


def run_matrix(specs: Sequence[ScenarioSpec], cache: FleetCache | None = None, tol: Tolerances | None = None,
               progress=None) -> list[ScenarioResult]:
    """Run several scenarios, year by year, with warm starts between related programs."""
    cache = cache or FleetCache()
    results = {id(s): ScenarioResult(s) for s in specs}
    families: dict = {}
    for s in specs:
        families.setdefault(s.family(), []).append(s)
    for fam in families.values():
        _run_family(fam, results, cache, tol, progress)
    return [results[id(s)] for s in specs]


def _run_family(specs, results, cache, tol, progress):
    cfg = SystemConfig.load(specs[0].system_config or bundled_config_path())
    years = list(specs[0].years or cfg.years)
    for y in years:
        if y not in cfg.years:
            raise ConfigError(f"year {y} is not a model year of {cfg.name}")
    order = sorted(specs, key=lambda s: (SCHEMES.index(s.scheme), s.transmission_expansion))
    for year in years:
        fleets = cache.fleets(order[0], cfg, year)
        solved = {}
        for spec in order:
            res = results[id(spec)]
            inst = cfg.instance(year, fleets)
            if res.years:
                inst = carry_forward(res.years[-1], inst)
            model = assemble(inst, spec.scheme, spec.transmission_expansion)
            start = None
            par = _parent(spec)
            if par in solved:
                plp, psol = solved[par]
                start = transfer_basis(plp, psol, model.lp)
            try:
                ys = solve_year(inst, spec.scheme, spec.transmission_expansion, tol, start, model)
            except ModelInfeasible:
                log.error("%s %d infeasible", spec.name, year)
                raise
            solved[(spec.scheme.value, spec.transmission_expansion)] = (model.lp, ys.solution)
            res.years.append(ys)
            if progress is not None:
                progress(spec, ys)
            log.info("%s %d: objective %.6g (%d iterations)", spec.name, year, ys.objective, ys.solution.iterations)


def run_scenario(spec: ScenarioSpec, cache: FleetCache | None = None, tol: Tolerances | None = None) -> ScenarioResult:
    """Solve the spec's years in order, carrying investments forward."""
    return run_matrix([spec], cache, tol)[0]


# -- comparison ---------------------------------------------------------------------------
@dataclass
class Delta:
    """Per-metric differences ``other - base``; keys are ``(metric, item, year)``."""

    base: str
    other: str
    values: dict

    def __neg__(self) -> "Delta":
        return Delta(self.other, self.base, {k: -v for k, v in self.values.items()})

    def get(self, metric: str, item: str, year="total") -> float:
        return self.values[(metric, item, str(year))]

    def rows(self) -> list[tuple]:
        return [(m, i, y, v) for (m, i, y), v in self.values.items()]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("metric", "item", "year", "delta"))
        for m, i, y, v in self.rows():
            w.writerow((m, i, y, repr(float(v))))
        return buf.getvalue()


def metrics(result: ScenarioResult) -> dict:
    """Flat metric table of one result: ``(metric, item, year) -> value``."""
    out = {}
    for y in result.years:
        yr = str(y.year)
        for c in COST_CATEGORIES:
            out[("cost", c, yr)] = float(y.costs.get(c, 0.0))
        out[("cost", "total", yr)] = float(y.objective)
        for tech, twh in result.generation_twh(y.year).items():
            out[("generation_twh", tech, yr)] = twh
        out[("battery_investment", "cost_eur", yr)] = float(y.battery_investment_cost)
        out[("battery_investment", "energy_mwh", yr)] = float(sum(e for e, _ in y.battery_investment.values()))
        out[("battery_investment", "power_mw", yr)] = float(sum(p for _, p in y.battery_investment.values()))
        for r, t in y.emissions.items():
            out[("co2_t", r, yr)] = float(t)
        for r in y.prices:
            mean, std = price_stats(result, r, y.year)
            out[("price_mean", r, yr)] = mean
            out[("price_std", r, yr)] = std
    for c, v in result.cost_breakdown().items():
        out[("cost", c, "total")] = v
    out[("cost", "total", "total")] = result.total_cost
    for tech, twh in result.generation_twh().items():
        out[("generation_twh", tech, "total")] = twh
    out[("battery_investment", "cost_eur", "total")] = result.battery_investment_cost
    for r, t in result.co2().items():
        out[("co2_t", r, "total")] = t
    return out


def compare(base: ScenarioResult, other: ScenarioResult) -> Delta:
    """Differences ``other - base`` of cost, generation, battery investment, CO2 and prices."""
    if base.year_list != other.year_list:
        raise ValueError(f"year mismatch: {base.year_list} vs {other.year_list}")
    if sorted(base.regions) != sorted(other.regions):
        raise ValueError("region mismatch")
    mb, mo = metrics(base), metrics(other)
    keys = list(mb) + [k for k in mo if k not in mb]
    return Delta(base.name, other.name, {k: mo.get(k, 0.0) - mb.get(k, 0.0) for k in keys})


# -- persistence ------------------------------------------------------------------------------
def _key(k) -> str:
    return ":".join(k) if isinstance(k, tuple) else str(k)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _year_summary(y: YearSolution) -> dict:
    return {
        "year": y.year, "objective": y.objective, "costs": dict(y.costs),
        "emissions_t": dict(y.emissions),
        "fuel_use_mwh": {_key(k): v for k, v in y.fuel_use.items()},
        "tech_emissions_t": {_key(k): v for k, v in y.tech_emissions.items()},
        "generation_mwh": {_key(k): v for k, v in y.generation.items()},
        "curtailment_mwh": dict(y.curtailment),
        "investments_mw": {_key(k): v for k, v in y.investments.items()},
        "battery_investment": {r: {"energy_mwh": e, "power_mw": p} for r, (e, p) in y.battery_investment.items()},
        "battery_investment_cost_eur": y.battery_investment_cost,
        "link_expansion_mw": {_key(k): v for k, v in y.link_expansion.items()},
        "ev_grid_energy_mwh": dict(y.ev_grid_energy),
        "vintages": [[v.kind, list(v.key), v.build_year, v.capacity, v.lifetime] for v in y.vintages],
    }


def save_result(result: ScenarioResult, out_dir: str | Path) -> Path:
    """Write one scenario to ``out_dir/<name>/``: a JSON summary plus per-year CSV tables."""
    d = Path(out_dir) / result.name
    d.mkdir(parents=True, exist_ok=True)
    summary = {
        "name": result.name, "spec": result.spec.to_dict(), "total_cost": result.total_cost,
        "cost_breakdown": result.cost_breakdown(), "battery_investment_cost_eur": result.battery_investment_cost,
        "co2_t": result.co2(), "years": [_year_summary(y) for y in result.years],
    }
    (d / "result.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    for y in result.years:
        regions = list(y.prices)
        T = len(y.weights)
        cal = y.calendar_hours if y.calendar_hours is not None else np.arange(T)
        _write_csv(d / f"prices_{y.year}.csv",
                   ["hour", "calendar_hour", "weight"] + [f"price:{r}" for r in regions] + [f"consumption:{r}" for r in regions],
                   ([t, int(cal[t]), float(y.weights[t])] + [float(y.prices[r][t]) for r in regions]
                    + [float(y.consumption[r][t]) for r in regions] for t in range(T)))
        names = sorted(y.dispatch)
        _write_csv(d / f"dispatch_{y.year}.csv", ["hour"] + names,
                   ([t] + [float(y.dispatch[n][t]) for n in names] for t in range(T)))
        inv_rows = [(r, t, "MW", v) for (r, t), v in y.investments.items()]
        inv_rows += [(r, "battery_energy", "MWh", e) for r, (e, _) in y.battery_investment.items()]
        inv_rows += [(r, "battery_power", "MW", p) for r, (_, p) in y.battery_investment.items()]
        inv_rows += [(f"{a}-{b}", "link", "MW", v) for (a, b), v in y.link_expansion.items()]
        _write_csv(d / f"investments_{y.year}.csv", ["region", "item", "unit", "value"], inv_rows)
        _write_csv(d / f"emissions_{y.year}.csv", ["region", "technology", "fuel_mwh", "emissions_t"],
                   [(r, t, v, y.tech_emissions[(r, t)]) for (r, t), v in y.fuel_use.items()])
    return d


def _split(k: str) -> tuple:
    return tuple(k.split(":"))


def load_result(path: str | Path) -> ScenarioResult:
    """Read a directory written by :func:`save_result` (no solver state is restored)."""
    from .system import Vintage

    d = Path(path)
    try:
        summary = json.loads((d / "result.json").read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read result {d}: {exc}") from None
    spec = ScenarioSpec.from_dict(summary["spec"])
    res = ScenarioResult(spec)
    for ys in summary["years"]:
        year = ys["year"]
        with open(d / f"prices_{year}.csv", newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], np.array([[float(v) for v in r] for r in rows[1:]]).reshape(-1, len(rows[0]))
        col = {h: i for i, h in enumerate(header)}
        regions = [h.split(":", 1)[1] for h in header if h.startswith("price:")]
        with open(d / f"dispatch_{year}.csv", newline="", encoding="utf-8") as fh:
            drows = list(csv.reader(fh))
        dbody = np.array([[float(v) for v in r] for r in drows[1:]]).reshape(-1, len(drows[0]))
        dispatch = {h: dbody[:, i].copy() for i, h in enumerate(drows[0]) if h != "hour"}
        res.years.append(YearSolution(
            year=year, scheme=spec.scheme.value, trans_expansion=spec.transmission_expansion,
            objective=ys["objective"], costs=ys["costs"],
            prices={r: body[:, col[f"price:{r}"]].copy() for r in regions},
            duals={r: body[:, col[f"price:{r}"]] * body[:, col["weight"]] for r in regions},
            consumption={r: body[:, col[f"consumption:{r}"]].copy() for r in regions},
            weights=body[:, col["weight"]].copy(),
            emissions=ys["emissions_t"],
            fuel_use={_split(k): v for k, v in ys["fuel_use_mwh"].items()},
            tech_emissions={_split(k): v for k, v in ys["tech_emissions_t"].items()},
            generation={_split(k): v for k, v in ys["generation_mwh"].items()},
            curtailment=ys["curtailment_mwh"],
            investments={_split(k): v for k, v in ys["investments_mw"].items()},
            battery_investment={r: (v["energy_mwh"], v["power_mw"]) for r, v in ys["battery_investment"].items()},
            battery_investment_cost=ys["battery_investment_cost_eur"],
            link_expansion={_split(k): v for k, v in ys["link_expansion_mw"].items()},
            ev_grid_energy=ys["ev_grid_energy_mwh"],
            vintages=tuple(Vintage(k, tuple(key), b, c, lt) for k, key, b, c, lt in ys["vintages"]),
            calendar_hours=body[:, col["calendar_hour"]].astype(np.int64),
            dispatch=dispatch,
        ))
    return res


def load_results(path: str | Path) -> list[ScenarioResult]:
    """All scenario directories below ``path``, in name order."""
    p = Path(path)
    dirs = sorted(q for q in p.iterdir() if (q / "result.json").exists()) if p.is_dir() else []
    if not dirs:
        raise ConfigError(f"no scenario results found in {p}")
    return [load_result(q) for q in dirs]


# -- reports ------------------------------------------------------------------------------------
REPORT_TABLES = ("costs.csv", "battery_investment.csv", "generation_mix.csv", "price_stats.csv", "co2.csv")


def report(results: Iterable[ScenarioResult], out_dir: str | Path) -> list[Path]:
    """Write the figure tables (long format), deltas against PC and a JSON summary.

    Files: the five :data:`REPORT_TABLES`, ``summary.json`` and, for each SC/V2G
    scenario whose PC counterpart (same expansion setting) is present,
    ``delta_<other>_vs_<base>.csv``.
    """
    results = sorted(results, key=lambda r: (SCHEMES.index(r.spec.scheme), r.spec.transmission_expansion))
    if not results:
        raise ValueError("no results to report")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create report directory {out}: {exc}") from exc
    written = []

    def table(name, header, rows):
        _write_csv(out / name, header, rows)
        written.append(out / name)

    cost_rows, bat_rows, gen_rows, price_rows, co2_rows = [], [], [], [], []
    for res in results:
        for y in res.years:
            for c in COST_CATEGORIES:
                cost_rows.append((res.name, y.year, c, float(y.costs.get(c, 0.0))))
            cost_rows.append((res.name, y.year, "total", float(y.objective)))
            for r, (e, p) in y.battery_investment.items():
                bat_rows.append((res.name, y.year, r, "energy_mwh", float(e)))
                bat_rows.append((res.name, y.year, r, "power_mw", float(p)))
            bat_rows.append((res.name, y.year, "all", "cost_eur", float(y.battery_investment_cost)))
            for tech, twh in res.generation_twh(y.year).items():
                gen_rows.append((res.name, y.year, tech, twh))
            for r in y.prices:
                mean, std = price_stats(res, r, y.year)
                price_rows.append((res.name, y.year, r, mean, std))
            for r, t in y.emissions.items():
                co2_rows.append((res.name, y.year, r, float(t)))
        for c, v in res.cost_breakdown().items():
            cost_rows.append((res.name, "total", c, v))
        cost_rows.append((res.name, "total", "total", res.total_cost))
        acc = res.battery_investment_cost
        bat_rows.append((res.name, "total", "all", "cost_eur", acc))
        for tech, twh in res.generation_twh().items():
            gen_rows.append((res.name, "total", tech, twh))
        for r, t in res.co2().items():
            co2_rows.append((res.name, "total", r, t))
    table("costs.csv", ("scenario", "year", "category", "value_eur"), cost_rows)
    table("battery_investment.csv", ("scenario", "year", "region", "metric", "value"), bat_rows)
    table("generation_mix.csv", ("scenario", "year", "technology", "twh"), gen_rows)
    table("price_stats.csv", ("scenario", "year", "region", "mean_eur_mwh", "std_eur_mwh"), price_rows)
    table("co2.csv", ("scenario", "year", "region", "tonnes"), co2_rows)

    by_name = {r.name: r for r in results}
    deltas = {}
    for res in results:
        if res.spec.scheme is ChargingScheme.PASSIVE:
            continue
        base = by_name.get(scenario_name(ChargingScheme.PASSIVE, res.spec.transmission_expansion))
        if base is None:
            continue
        delta = compare(base, res)
        path = out / f"delta_{res.name}_vs_{base.name}.csv"
        path.write_text(delta.to_csv(), encoding="utf-8")
        written.append(path)
        deltas[f"{res.name}_vs_{base.name}"] = {
            "total_cost": delta.get("cost", "total"),
            "battery_investment_cost_eur": delta.get("battery_investment", "cost_eur"),
            "co2_t": {r: delta.get("co2_t", r) for r in res.regions},
        }
    summary = {
        "scenarios": {
            r.name: {
                "spec": r.spec.to_dict(), "years": r.year_list, "total_cost": r.total_cost,
                "cost_breakdown": r.cost_breakdown(), "battery_investment_cost_eur": r.battery_investment_cost,
                "co2_t": r.co2(),
                "price_stats": {str(y.year): {reg: dict(zip(("mean", "std"), price_stats(r, reg, y.year)))
                                              for reg in y.prices} for y in r.years},
            }
            for r in results
        },
        "deltas": deltas,
    }
    path = out / "summary.json"
    path.write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    written.append(path)
    return written


__all__ = [
    "ScenarioSpec", "ScenarioResult", "FleetCache", "Delta", "SCHEMES", "canonical_specs", "load_specs",
    "run_scenario", "run_matrix", "price_stats", "compare", "metrics", "report", "save_result",
    "load_result", "load_results", "scenario_name", "load_trip_input", "REPORT_TABLES",
]
