"""Per-year dispatch and investment model of a small multi-region power system.

The model is a linear program over a set of representative periods (each a
run of consecutive calendar hours with a common weight).  Every modelled hour
has one electricity balance per region; its dual, divided by the hour's
weight, is the electricity price.  Electric-vehicle fleets enter through
:func:`evflex.ev_addon.build_block`.

Years are solved one at a time.  Investments of a solved year are carried into
later instances as vintages that retire after their lifetime.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from .ev_addon import ChargingScheme, build_block
from .lp import EQ, INFEASIBLE, LE, OPTIMAL, LinearProgram, Solution, Tolerances, solve

log = logging.getLogger(__name__)

HOURS_PER_YEAR = 8760.0
TECH_KINDS = ("thermal", "vre", "nuclear", "hydro-run")
COST_CATEGORIES = ("capex", "fixed_om", "variable_fuel", "co2", "transmission", "ev_degradation")


class ConfigError(ValueError):
    """Invalid system or scenario configuration."""


class ModelInfeasible(RuntimeError):
    """The year's program has no feasible point; ``report`` locates the conflict."""

    def __init__(self, report: "InfeasibilityReport"):
        super().__init__(report.message())
        self.report = report


class ModelUnbounded(RuntimeError):
    pass


def _at(value, year: int) -> float:
    """Scalar or ``{year: value}`` mapping (keys may be strings) evaluated at ``year``."""
    if isinstance(value, Mapping):
        for key in (year, str(year)):
            if key in value:
                return float(value[key])
        raise ConfigError(f"no value for year {year} in {dict(value)}")
    return float(value)


# -- domain types ---------------------------------------------------------------
@dataclass(frozen=True)
class Technology:
    id: str
    kind: str
    fuel_cost: float = 0.0  # EUR/MWh fuel
    efficiency: float = 1.0
    emission_factor: float = 0.0  # t/MWh fuel
    vom: float = 0.0  # EUR/MWh electricity
    fom: float = 0.0  # EUR/MW/yr
    capex: object = 0.0  # annualized EUR/MW/yr, scalar or per year
    investable: bool = False
    lifetime: int = 30
    availability: float = 1.0
    profile: str | None = None

    def __post_init__(self):
        if self.kind not in TECH_KINDS:
            raise ConfigError(f"{self.id}: unknown technology kind {self.kind!r}")
        if not 0.0 < self.efficiency <= 1.0:
            raise ConfigError(f"{self.id}: efficiency must lie in (0, 1]")
        if min(self.fuel_cost, self.emission_factor, self.vom, self.fom) < 0:
            raise ConfigError(f"{self.id}: costs and emission factor must be non-negative")
        if not 0.0 < self.availability <= 1.0:
            raise ConfigError(f"{self.id}: availability must lie in (0, 1]")
        if self.lifetime <= 0:
            raise ConfigError(f"{self.id}: lifetime must be positive")
        if self.variable_output and not self.profile:
            raise ConfigError(f"{self.id}: {self.kind} technology needs a profile name")

    @property
    def variable_output(self) -> bool:
        """Output follows a capacity-factor profile instead of being dispatched."""
        return self.kind in ("vre", "hydro-run")

    def capex_at(self, year: int) -> float:
        return _at(self.capex, year)

    @property
    def emission_rate(self) -> float:
        """t CO2 per MWh of electricity."""
        return self.emission_factor / self.efficiency

    def running_cost(self) -> float:
        """Variable O&M plus fuel, EUR/MWh electricity."""
        return self.vom + self.fuel_cost / self.efficiency


@dataclass
class Region:
    id: str
    demand: np.ndarray  # MW in each modelled hour
    profiles: dict = field(default_factory=dict)
    co2_price: float = 0.0

    def __post_init__(self):
        self.demand = np.asarray(self.demand, dtype=float)
        if np.any(self.demand < 0) or not np.all(np.isfinite(self.demand)):
            raise ConfigError(f"{self.id}: demand must be finite and non-negative")
        self.profiles = {k: np.asarray(v, dtype=float) for k, v in self.profiles.items()}
        for k, v in self.profiles.items():
            if v.shape != self.demand.shape:
                raise ConfigError(f"{self.id}: profile {k} does not match the demand length")
            if np.any(v < 0) or np.any(v > 1):
                raise ConfigError(f"{self.id}: profile {k} leaves [0, 1]")
        if self.co2_price < 0:
            raise ConfigError(f"{self.id}: negative CO2 price")


@dataclass(frozen=True)
class StationaryBattery:
    energy_capex: float  # EUR/MWh/yr
    power_capex: float  # EUR/MW/yr
    efficiency: float  # round trip
    vom: float = 0.0
    lifetime: int = 20
    existing_energy: Mapping[str, float] = field(default_factory=dict)
    existing_power: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise ConfigError("battery efficiency must lie in (0, 1]")
        if min(self.energy_capex, self.power_capex, self.vom) < 0:
            raise ConfigError("battery costs must be non-negative")


@dataclass(frozen=True)
class TransmissionLink:
    a: str
    b: str
    ntc: float  # MW, each direction
    capex: float = 0.0  # EUR/MW/yr
    expandable_from_year: int | None = None

    def __post_init__(self):
        if self.ntc < 0 or self.capex < 0:
            raise ConfigError(f"link {self.a}-{self.b}: negative capacity or cost")
        if self.a == self.b:
            raise ConfigError(f"link {self.a}-{self.b} connects a region to itself")

    @property
    def key(self) -> str:
        return f"{self.a}-{self.b}"


@dataclass(frozen=True)
class Period:
    name: str
    start_hour: int  # calendar hour of the year
    hours: int
    weight: float  # calendar hours represented by one modelled hour


@dataclass(frozen=True)
class Vintage:
    """Capacity built in ``build_year``; ``kind`` is gen, battery_energy, battery_power or link."""

    kind: str
    key: tuple
    build_year: int
    capacity: float
    lifetime: int

    def alive(self, year: int) -> bool:
        return self.build_year <= year < self.build_year + self.lifetime


@dataclass
class SystemInstance:
    year: int
    regions: dict[str, Region]
    technologies: dict[str, Technology]
    existing: dict = field(default_factory=dict)  # region -> tech -> MW
    periods: list[Period] | None = None
    battery: StationaryBattery | None = None
    links: list[TransmissionLink] = field(default_factory=list)
    fleets: dict = field(default_factory=dict)  # region -> [(FleetProfile, VehicleClass)], full year
    vintages: tuple = ()
    link_loss: float = 0.02
    link_lifetime: int = 40

    def __post_init__(self):
        if self.periods is None:
            T = self.hours_from_regions()
            self.periods = [Period("all", 0, T, HOURS_PER_YEAR / T if T else 0.0)]

    def hours_from_regions(self) -> int:
        lens = {len(r.demand) for r in self.regions.values()}
        return lens.pop() if len(lens) == 1 else 0

    @property
    def hours(self) -> int:
        return sum(p.hours for p in self.periods)

    @property
    def hour_weights(self) -> np.ndarray:
        return np.concatenate([np.full(p.hours, p.weight) for p in self.periods]) if self.periods else np.zeros(0)

    def capacity(self, region: str, tech: str) -> float:
        base = float(self.existing.get(region, {}).get(tech, 0.0))
        return base + sum(v.capacity for v in self.vintages if v.kind == "gen" and v.key == (region, tech)
                          and v.alive(self.year))

    def battery_capacity(self, region: str) -> tuple[float, float]:
        e = p = 0.0
        if self.battery is not None:
            e = float(self.battery.existing_energy.get(region, 0.0))
            p = float(self.battery.existing_power.get(region, 0.0))
        for v in self.vintages:
            if v.key == (region,) and v.alive(self.year):
                if v.kind == "battery_energy":
                    e += v.capacity
                elif v.kind == "battery_power":
                    p += v.capacity
        return e, p

    def link_capacity(self, link: TransmissionLink) -> float:
        return link.ntc + sum(v.capacity for v in self.vintages if v.kind == "link" and v.key == (link.a, link.b)
                              and v.alive(self.year))

    def validate(self) -> None:
        T = self.hours
        total = sum(p.hours * p.weight for p in self.periods)
        if T and abs(total - HOURS_PER_YEAR) > 1e-6:
            raise ConfigError(f"period weights cover {total} h instead of {HOURS_PER_YEAR:g}")
        for r in self.regions.values():
            if len(r.demand) != T:
                raise ConfigError(f"{r.id}: demand has {len(r.demand)} hours, periods have {T}")
        for r, techs in self.existing.items():
            if r not in self.regions:
                raise ConfigError(f"existing capacity for unknown region {r}")
            for t, cap in techs.items():
                if t not in self.technologies:
                    raise ConfigError(f"existing capacity for unknown technology {t}")
                if cap < 0:
                    raise ConfigError(f"negative capacity {r}/{t}")
        for t in self.technologies.values():
            if t.variable_output:
                for r in self.regions.values():
                    if (self.capacity(r.id, t.id) > 0 or t.investable) and t.profile not in r.profiles:
                        raise ConfigError(f"{r.id}: missing profile {t.profile} for {t.id}")
        for link in self.links:
            if link.a not in self.regions or link.b not in self.regions:
                raise ConfigError(f"link {link.key} references an unknown region")
        for v in self.vintages:
            if v.capacity < 0:
                raise ConfigError("carried capacities must be non-negative")
        if not 0.0 <= self.link_loss < 1.0:
            raise ConfigError("link loss must lie in [0, 1)")
        for r, blocks in self.fleets.items():
            if r not in self.regions:
                raise ConfigError(f"fleet for unknown region {r}")
            for prof, _ in blocks:
                for p in self.periods:
                    if p.start_hour + p.hours > prof.hours:
                        raise ConfigError(f"period {p.name} lies outside the fleet profile of {r}")

    def expansion_allowed(self, link: TransmissionLink, trans_expansion: bool) -> bool:
        return bool(trans_expansion and link.expandable_from_year is not None
                    and self.year >= link.expandable_from_year)


# -- configuration ----------------------------------------------------------------
def _read_profile_csv(path: Path, hours: list[int]) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty profile file") from None
        if not header or header[0] != "hour" or "demand_mw" not in header:
            raise ConfigError(f"{path}: expected columns hour, demand_mw, ...")
        rows = {}
        for line in reader:
            if not line:
                continue
            try:
                rows[int(line[0])] = [float(v) for v in line[1:]]
            except ValueError as exc:
                raise ConfigError(f"{path}: {exc}") from None
    missing = [h for h in hours if h not in rows]
    if missing:
        raise ConfigError(f"{path}: no data for hour {missing[0]}")
    data = np.array([rows[h] for h in hours]).T
    return {name: data[i] for i, name in enumerate(header[1:])}


@dataclass
class SystemConfig:
    """System description read from JSON; :meth:`instance` makes one year's instance."""

    raw: dict
    base_dir: Path
    name: str = "system"

    @classmethod
    def load(cls, path: str | Path) -> "SystemConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read system config {path}: {exc}") from None
        cfg = cls(raw, path.parent, raw.get("name", path.stem))
        cfg._check()
        return cfg

    def _check(self):
        for key in ("years", "periods", "regions", "technologies"):
            if key not in self.raw:
                raise ConfigError(f"system config lacks {key!r}")
        years = self.years
        if list(years) != sorted(set(years)):
            raise ConfigError("years must be strictly increasing")
        self.technologies()  # validates

    @property
    def years(self) -> list[int]:
        return [int(y) for y in self.raw["years"]]

    @property
    def start_weekday(self) -> int:
        return int(self.raw.get("start_weekday", 0))

    @property
    def fleet(self) -> dict:
        return self.raw.get("fleet", {})

    def periods(self) -> list[Period]:
        spec = self.raw["periods"]
        total = sum(int(p["hours"]) for p in spec)
        if total <= 0:
            raise ConfigError("periods cover no hours")
        out = []
        for i, p in enumerate(spec):
            start, n = int(p["start_hour"]), int(p["hours"])
            if start < 0 or n <= 0 or start + n > HOURS_PER_YEAR:
                raise ConfigError(f"period {i} lies outside the year")
            out.append(Period(p.get("name", f"p{i}"), start, n, float(p.get("weight", HOURS_PER_YEAR / total))))
        return out

    def technologies(self) -> dict[str, Technology]:
        out = {}
        for tid, t in self.raw["technologies"].items():
            try:
                out[tid] = Technology(id=tid, **t)
            except TypeError as exc:
                raise ConfigError(f"technology {tid}: {exc}") from None
        return out

    def instance(self, year: int, fleets: dict | None = None) -> SystemInstance:
        if year not in self.years:
            raise ConfigError(f"year {year} is not a model year of {self.name}")
        periods = self.periods()
        hours = [p.start_hour + k for p in periods for k in range(p.hours)]
        scale = _at(self.raw.get("demand_scale", 1.0), year)
        co2 = _at(self.raw.get("co2_price", 0.0), year)
        regions = {}
        for rid, r in self.raw["regions"].items():
            cols = _read_profile_csv(self.base_dir / r["profiles"], hours)
            demand = cols.pop("demand_mw") * scale
            regions[rid] = Region(rid, demand, cols, _at(r.get("co2_price", co2), year))
        existing = {
            rid: {t: _at(v, year) for t, v in techs.items()}
            for rid, techs in self.raw.get("existing", {}).items()
        }
        battery = None
        if "battery" in self.raw:
            b = self.raw["battery"]
            ex = b.get("existing", {})
            battery = StationaryBattery(
                energy_capex=_at(b["energy_capex"], year),
                power_capex=_at(b["power_capex"], year),
                efficiency=float(b["efficiency"]),
                vom=float(b.get("vom", 0.0)),
                lifetime=int(b.get("lifetime", 20)),
                existing_energy={k: _at(v.get("energy", 0.0), year) for k, v in ex.items()},
                existing_power={k: _at(v.get("power", 0.0), year) for k, v in ex.items()},
            )
        links = [
            TransmissionLink(l["from"], l["to"], _at(l["ntc"], year), float(l.get("capex", 0.0)),
                             l.get("expandable_from_year"))
            for l in self.raw.get("links", [])
        ]
        inst = SystemInstance(
            year=year, regions=regions, technologies=self.technologies(), existing=existing,
            periods=periods, battery=battery, links=links, fleets=fleets or {},
            link_loss=float(self.raw.get("link_loss", 0.02)), link_lifetime=self.link_lifetime,
        )
        inst.validate()
        return inst

    @property
    def link_lifetime(self) -> int:
        return int(self.raw.get("link_lifetime", 40))


def bundled_config_path() -> Path:
    """Path of the bundled three-region desk fixture."""
    return Path(__file__).parent / "fixtures" / "desk3" / "system.json"


# -- assembly -------------------------------------------------------------------------
@dataclass
class AssembledModel:
    lp: LinearProgram
    instance: SystemInstance
    scheme: ChargingScheme
    trans_expansion: bool
    balance: dict = field(default_factory=dict)  # region -> row ids (T,)
    gen: dict = field(default_factory=dict)  # (region, tech) -> var ids (T,)
    invest: dict = field(default_factory=dict)  # (region, tech) -> var id
    available: dict = field(default_factory=dict)  # (region, tech) -> (T,) MW from existing variable output
    spill: dict = field(default_factory=dict)
    battery: dict = field(default_factory=dict)  # region -> dict of ids
    flows: dict = field(default_factory=dict)  # (from, to) -> var ids
    expansion: dict = field(default_factory=dict)  # (a, b) -> var id
    ev: dict = field(default_factory=dict)  # region -> [(EvAddonBlock, first modelled hour)]
    category_costs: dict = field(default_factory=dict)  # name -> [(ids, coefs)]
    category_const: dict = field(default_factory=dict)

    def _cost(self, cat, ids, coefs):
        ids = np.atleast_1d(np.asarray(ids, dtype=np.int64))
        coefs = np.broadcast_to(np.asarray(coefs, dtype=float), ids.shape).copy()
        if ids.size:
            self.lp.add_cost(ids, coefs)
            self.category_costs.setdefault(cat, []).append((ids, coefs))

    def _const(self, cat, value):
        self.lp.obj_constant += value
        self.category_const[cat] = self.category_const.get(cat, 0.0) + value

    def cost_breakdown(self, x: np.ndarray) -> dict[str, float]:
        out = {c: self.category_const.get(c, 0.0) for c in COST_CATEGORIES}
        for cat, terms in self.category_costs.items():
            out[cat] += sum(float(c @ x[i]) for i, c in terms)
        out["ev_degradation"] = sum(b.degradation_cost(x) for blocks in self.ev.values() for b, _ in blocks)
        return out


def _period_prev(periods: list[Period]) -> np.ndarray:
    """Index of the previous modelled hour, cyclic within each period."""
    prev = []
    off = 0
    for p in periods:
        idx = np.arange(off, off + p.hours)
        prev.append(np.roll(idx, 1))
        off += p.hours
    return np.concatenate(prev) if prev else np.zeros(0, dtype=np.int64)


def assemble(instance: SystemInstance, scheme: ChargingScheme | str, trans_expansion: bool) -> AssembledModel:
    """Build the year's program for one charging scheme and expansion setting."""
    instance.validate()
    scheme = ChargingScheme(scheme)
    tx = "TransEx" if trans_expansion else "noTransEx"
    lp = LinearProgram(name=f"y{instance.year}_{scheme.value}_{tx}")
    m = AssembledModel(lp, instance, scheme, bool(trans_expansion))
    T = instance.hours
    w = instance.hour_weights
    year = instance.year
    t_idx = np.arange(T)
    # balance entries per region: (cols, vals) with local row = hour
    bal_cols = {r: [] for r in instance.regions}
    bal_vals = {r: [] for r in instance.regions}
    bal_rows = {r: [] for r in instance.regions}
    rhs = {r: reg.demand.copy() for r, reg in instance.regions.items()}

    def feed(region, cols, vals, rows=None):
        bal_cols[region].append(np.asarray(cols, dtype=np.int64))
        bal_vals[region].append(np.broadcast_to(np.asarray(vals, dtype=float), np.shape(cols)).copy())
        bal_rows[region].append(t_idx if rows is None else np.asarray(rows, dtype=np.int64))

    for rid, reg in instance.regions.items():
        for tid, tech in instance.technologies.items():
            cap = instance.capacity(rid, tid)
            if cap <= 0 and not tech.investable:
                continue
            key = (rid, tid)
            if cap > 0:
                m._const("fixed_om", tech.fom * cap)
            inv = None
            if tech.investable:
                inv = lp.add_variable(0.0, np.inf, 0.0, f"inv_{rid}_{tid}")
                m.invest[key] = inv
                m._cost("capex", inv, tech.capex_at(year))
                m._cost("fixed_om", inv, tech.fom)
            if tech.variable_output:
                cf = reg.profiles[tech.profile]
                avail = cf * cap
                m.available[key] = avail
                rhs[rid] -= avail
                m._const("variable_fuel", float(w @ avail) * tech.running_cost())
                if inv is not None:
                    nz = np.nonzero(cf)[0]
                    feed(rid, np.full(nz.size, inv), cf[nz], nz)
                    m._cost("variable_fuel", inv, float(w @ cf) * tech.running_cost())
                continue
            ub = tech.availability * cap if inv is None else np.inf
            g = lp.add_variables(T, 0.0, ub, 0.0, f"gen_{rid}_{tid}")
            m.gen[key] = g
            m._cost("variable_fuel", g, w * tech.running_cost())
            if reg.co2_price > 0 and tech.emission_rate > 0:
                m._cost("co2", g, w * reg.co2_price * tech.emission_rate)
            if inv is not None:
                lp.add_constraints(T, np.r_[t_idx, t_idx], np.r_[g, np.full(T, inv)],
                                   np.r_[np.ones(T), np.full(T, -tech.availability)],
                                   LE, np.full(T, tech.availability * cap), f"cap_{rid}_{tid}")
            feed(rid, g, 1.0)

        spill = lp.add_variables(T, 0.0, np.inf, 0.0, f"spill_{rid}")
        m.spill[rid] = spill
        feed(rid, spill, -1.0)

        bat = instance.battery
        if bat is not None:
            e0, p0 = instance.battery_capacity(rid)
            e_inv = lp.add_variable(0.0, np.inf, 0.0, f"batE_{rid}")
            p_inv = lp.add_variable(0.0, np.inf, 0.0, f"batP_{rid}")
            m._cost("capex", e_inv, bat.energy_capex)
            m._cost("capex", p_inv, bat.power_capex)
            ch = lp.add_variables(T, 0.0, np.inf, 0.0, f"batC_{rid}")
            dis = lp.add_variables(T, 0.0, np.inf, 0.0, f"batD_{rid}")
            soc = lp.add_variables(T, 0.0, np.inf, 0.0, f"batS_{rid}")
            m._cost("variable_fuel", dis, w * bat.vom)
            eta = math.sqrt(bat.efficiency)
            prev = soc[_period_prev(instance.periods)]
            lp.add_constraints(T, np.r_[t_idx, t_idx, t_idx, t_idx], np.r_[soc, prev, ch, dis],
                               np.r_[np.ones(T), -np.ones(T), np.full(T, -eta), np.full(T, 1.0 / eta)],
                               EQ, np.zeros(T), f"batbal_{rid}")
            lp.add_constraints(T, np.r_[t_idx, t_idx, t_idx], np.r_[ch, dis, np.full(T, p_inv)],
                               np.r_[np.ones(T), np.ones(T), -np.ones(T)], LE, np.full(T, p0), f"batP_{rid}")
            lp.add_constraints(T, np.r_[t_idx, t_idx], np.r_[soc, np.full(T, e_inv)],
                               np.r_[np.ones(T), -np.ones(T)], LE, np.full(T, e0), f"batE_{rid}")
            m.battery[rid] = {"energy": e_inv, "power": p_inv, "charge": ch, "discharge": dis, "soc": soc}
            feed(rid, ch, -1.0)
            feed(rid, dis, 1.0)

    loss = instance.link_loss
    for link in instance.links:
        cap = instance.link_capacity(link)
        expand = instance.expansion_allowed(link, trans_expansion)
        x = None
        if expand:
            x = lp.add_variable(0.0, np.inf, 0.0, f"ntc_{link.a}_{link.b}")
            m.expansion[(link.a, link.b)] = x
            m._cost("transmission", x, link.capex)
        for src, dst in ((link.a, link.b), (link.b, link.a)):
            f = lp.add_variables(T, 0.0, np.inf if expand else cap, 0.0, f"flow_{src}_{dst}")
            m.flows[(src, dst)] = f
            if expand:
                lp.add_constraints(T, np.r_[t_idx, t_idx], np.r_[f, np.full(T, x)],
                                   np.r_[np.ones(T), -np.ones(T)], LE, np.full(T, cap), f"ntc_{src}_{dst}")
            feed(src, f, -1.0)
            feed(dst, f, 1.0 - loss)

    off = 0
    period_offsets = []
    for p in instance.periods:
        period_offsets.append(off)
        off += p.hours
    for rid, fleets in instance.fleets.items():
        m.ev[rid] = []
        for profile, vclass in fleets:
            for p, off in zip(instance.periods, period_offsets):
                win = profile.window(p.start_hour, p.hours)
                blk = build_block(lp, win, vclass, scheme, weight=p.weight,
                                  name=f"ev_{rid}_{profile.kind}_{p.name}")
                m.ev[rid].append((blk, off))
                rows = np.arange(off, off + p.hours)
                rhs[rid][rows] += blk.fixed_load
                if blk.charge is not None:
                    feed(rid, blk.charge, -1.0, rows)
                if blk.discharge is not None:
                    feed(rid, blk.discharge, 1.0, rows)
    # EV block constants were added straight to the objective constant
    for rid in instance.regions:
        cols = np.concatenate(bal_cols[rid]) if bal_cols[rid] else np.zeros(0, dtype=np.int64)
        vals = np.concatenate(bal_vals[rid]) if bal_vals[rid] else np.zeros(0)
        rows = np.concatenate(bal_rows[rid]) if bal_rows[rid] else np.zeros(0, dtype=np.int64)
        m.balance[rid] = lp.add_constraints(T, rows, cols, vals, EQ, rhs[rid], f"bal_{rid}")
    return m


# -- solving --------------------------------------------------------------------------
@dataclass
class InfeasibilityReport:
    year: int
    scheme: str
    trans_expansion: bool
    region: str | None
    hour: int | None  # modelled hour index
    calendar_hour: int | None
    rows: list  # (row name, multiplier) of the largest certificate entries
    detail: str = ""

    def message(self) -> str:
        where = f"region {self.region}, hour {self.calendar_hour}" if self.region else "no balance row identified"
        top = ", ".join(f"{n} ({v:.3g})" for n, v in self.rows[:5])
        return f"year {self.year} {self.scheme}: infeasible at {where}; conflicting rows: {top}. {self.detail}".strip()

    def to_dict(self) -> dict:
        return {"year": self.year, "scheme": self.scheme, "trans_expansion": self.trans_expansion,
                "region": self.region, "hour": self.hour, "calendar_hour": self.calendar_hour,
                "rows": [[n, float(v)] for n, v in self.rows], "message": self.message()}


def _calendar_hour(instance: SystemInstance, t: int) -> int:
    off = 0
    for p in instance.periods:
        if t < off + p.hours:
            return p.start_hour + (t - off)
        off += p.hours
    return t


def infeasibility_report(model: AssembledModel, sol: Solution) -> InfeasibilityReport:
    inst = model.instance
    names = model.lp.row_names()
    cert = sol.certificate
    rows, region, hour = [], None, None
    detail = ""
    if cert is not None and cert.size:
        order = np.argsort(-np.abs(cert), kind="stable")
        rows = [(names[i], float(cert[i])) for i in order[:10] if abs(cert[i]) > 0]
        best = 0.0
        for rid, ids in model.balance.items():
            k = int(np.argmax(np.abs(cert[ids]))) if len(ids) else 0
            if len(ids) and abs(cert[ids[k]]) > best:
                best, region, hour = abs(cert[ids[k]]), rid, k
    if region is None:
        # fall back on the hour with the largest shortfall against maximum non-investable supply
        detail = "no certificate available"
    return InfeasibilityReport(inst.year, model.scheme.value, model.trans_expansion, region, hour,
                               None if hour is None else _calendar_hour(inst, hour), rows, detail)


@dataclass
class YearSolution:
    year: int
    scheme: str
    trans_expansion: bool
    objective: float
    costs: dict
    prices: dict  # region -> EUR/MWh per modelled hour
    duals: dict  # region -> raw balance duals
    consumption: dict  # region -> MW per modelled hour, EV net draw included
    weights: np.ndarray
    emissions: dict  # region -> t/yr
    fuel_use: dict  # (region, tech) -> MWh fuel/yr
    generation: dict  # (region, tech) -> MWh/yr (variable output before curtailment)
    curtailment: dict  # region -> MWh/yr
    investments: dict  # (region, tech) -> MW
    battery_investment: dict  # region -> (MWh, MW)
    battery_investment_cost: float
    link_expansion: dict  # (a, b) -> MW
    ev_grid_energy: dict  # region -> MWh/yr
    vintages: tuple
    calendar_hours: np.ndarray | None = None
    tech_emissions: dict = field(default_factory=dict)  # (region, tech) -> t/yr
    dispatch: dict = field(default_factory=dict)  # series name -> MW per modelled hour
    solution: Solution | None = field(default=None, repr=False)
    model: AssembledModel | None = field(default=None, repr=False)

    @property
    def total_cost(self) -> float:
        return self.objective


def solve_year(instance: SystemInstance, scheme, trans_expansion: bool, tol: Tolerances | None = None,
               warm_start: Solution | None = None, model: AssembledModel | None = None) -> YearSolution:
    """Assemble (unless ``model`` is given), solve and post-process one model year."""
    m = model or assemble(instance, scheme, trans_expansion)
    sol = solve(m.lp, tol, warm_start)
    if sol.status == INFEASIBLE:
        raise ModelInfeasible(infeasibility_report(m, sol))
    if sol.status != OPTIMAL:
        raise ModelUnbounded(f"year {instance.year} {m.scheme.value}: solver returned {sol.status} ({sol.message})")
    return _postprocess(m, sol)


def _postprocess(m: AssembledModel, sol: Solution) -> YearSolution:
    inst = m.instance
    x = sol.x
    w = inst.hour_weights
    year = inst.year
    prices, duals, consumption, ev_energy = {}, {}, {}, {}
    emissions = {r: 0.0 for r in inst.regions}
    fuel_use, generation, investments, curtailment, tech_emis = {}, {}, {}, {}, {}
    for rid, reg in inst.regions.items():
        d = sol.row_duals[m.balance[rid]]
        duals[rid] = d.copy()
        prices[rid] = np.divide(d, w, out=np.zeros_like(d), where=w > 0)
        ev = np.zeros(inst.hours)
        for blk, off in m.ev.get(rid, []):
            ev[off:off + blk.hours] += blk.grid_energy(x)
        consumption[rid] = reg.demand + ev
        ev_energy[rid] = float(w @ ev)
        curtailment[rid] = float(w @ x[m.spill[rid]])
    for (rid, tid), g in m.gen.items():
        tech = inst.technologies[tid]
        out = float(w @ x[g])
        generation[(rid, tid)] = out
        fuel = out / tech.efficiency
        fuel_use[(rid, tid)] = fuel
        tech_emis[(rid, tid)] = fuel * tech.emission_factor
        emissions[rid] += tech_emis[(rid, tid)]
    for (rid, tid), avail in m.available.items():
        generation[(rid, tid)] = generation.get((rid, tid), 0.0) + float(w @ avail)
    for (rid, tid), inv in m.invest.items():
        investments[(rid, tid)] = float(x[inv])
        tech = inst.technologies[tid]
        if tech.variable_output:
            cf = inst.regions[rid].profiles[tech.profile]
            generation[(rid, tid)] = generation.get((rid, tid), 0.0) + float(w @ cf) * float(x[inv])
    bat_inv, bat_cost = {}, 0.0
    for rid, ids in m.battery.items():
        e, p = float(x[ids["energy"]]), float(x[ids["power"]])
        bat_inv[rid] = (e, p)
        bat_cost += e * inst.battery.energy_capex + p * inst.battery.power_capex
    links = {k: float(x[v]) for k, v in m.expansion.items()}
    dispatch = {}
    for (rid, tid), g in m.gen.items():
        dispatch[f"gen:{rid}:{tid}"] = x[g].copy()
    for (rid, tid), avail in m.available.items():
        dispatch[f"gen:{rid}:{tid}"] = avail.copy()
    for (rid, tid), inv in m.invest.items():
        tech = inst.technologies[tid]
        if tech.variable_output:
            cf = inst.regions[rid].profiles[tech.profile]
            dispatch[f"gen:{rid}:{tid}"] = dispatch.get(f"gen:{rid}:{tid}", 0.0) + cf * x[inv]
    for rid in inst.regions:
        dispatch[f"spill:{rid}"] = x[m.spill[rid]].copy()
        if rid in m.battery:
            dispatch[f"battery_charge:{rid}"] = x[m.battery[rid]["charge"]].copy()
            dispatch[f"battery_discharge:{rid}"] = x[m.battery[rid]["discharge"]].copy()
        dispatch[f"ev_net:{rid}"] = consumption[rid] - inst.regions[rid].demand
    for (a, b), f in m.flows.items():
        dispatch[f"flow:{a}:{b}"] = x[f].copy()

    vint = [v for v in inst.vintages]
    for (rid, tid), cap in investments.items():
        if cap > 0:
            vint.append(Vintage("gen", (rid, tid), year, cap, inst.technologies[tid].lifetime))
    for rid, (e, p) in bat_inv.items():
        if e > 0:
            vint.append(Vintage("battery_energy", (rid,), year, e, inst.battery.lifetime))
        if p > 0:
            vint.append(Vintage("battery_power", (rid,), year, p, inst.battery.lifetime))
    for key, cap in links.items():
        if cap > 0:
            vint.append(Vintage("link", key, year, cap, inst.link_lifetime))
    return YearSolution(
        year=year, scheme=m.scheme.value, trans_expansion=m.trans_expansion, objective=sol.objective,
        costs=m.cost_breakdown(x), prices=prices, duals=duals, consumption=consumption, weights=w.copy(),
        emissions=emissions, fuel_use=fuel_use, generation=generation, curtailment=curtailment,
        investments=investments, battery_investment=bat_inv, battery_investment_cost=bat_cost,
        link_expansion=links, ev_grid_energy=ev_energy, vintages=tuple(vint),
        calendar_hours=np.array([_calendar_hour(inst, t) for t in range(inst.hours)], dtype=np.int64),
        tech_emissions=tech_emis, dispatch=dispatch, solution=sol, model=m,
    )


def carry_forward(solution: YearSolution, next_instance: SystemInstance) -> SystemInstance:
    """Next year's instance with the solved year's investments as existing capacity.

    Vintages past their lifetime in the next year are dropped.
    """
    if next_instance.year <= solution.year:
        raise ValueError(f"cannot carry {solution.year} investments into {next_instance.year}")
    alive = tuple(v for v in solution.vintages if v.alive(next_instance.year))
    return replace(next_instance, vintages=alive)


__all__ = [
    "ConfigError", "ModelInfeasible", "ModelUnbounded", "Technology", "Region", "StationaryBattery",
    "TransmissionLink", "Period", "Vintage", "SystemInstance", "SystemConfig", "AssembledModel",
    "InfeasibilityReport", "YearSolution", "assemble", "solve_year", "carry_forward",
    "bundled_config_path", "COST_CATEGORIES",
]
