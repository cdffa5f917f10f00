"""Vehicle schedules and their aggregation into one virtual storage per area and class.

Each sampled vehicle is simulated over a full year at hourly resolution.
Per vehicle the series are in kW / kWh; aggregated profiles are in MW / MWh
and scaled from the sample to the vehicle stock.
"""

from __future__ import annotations

import csv
import hashlib
import io
import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _fleet_kernel as K
from .data import VehicleClass
from .trips import WEEKDAYS, TripLibrary, sample_days

log = logging.getLogger(__name__)

HOURS_PER_YEAR = 8760
DAYS_PER_YEAR = 365
DEFAULT_SAMPLE = 1000

SERIES = (
    "available_count",
    "trip_withdrawal_mwh",
    "soc_injection_mwh",
    "inflexible_load_mw",
    "passive_load_mw",
    "passive_soc_mwh",
    "soc_max_mwh",
    "soc_min_mwh",
)
_VEHICLE_SERIES = (
    "availability",
    "trip_withdrawal_kwh",
    "soc_injection_kwh",
    "inflexible_load_kw",
    "passive_load_kw",
    "passive_soc_kwh",
    "soc_max_kwh",
    "soc_min_kwh",
)


class FleetError(ValueError):
    pass


@dataclass
class VehicleSchedule:
    """Hourly series of one simulated vehicle (kW, kWh)."""

    kind: str
    year: int
    start_weekday: int
    data: np.ndarray  # (8, T) in kernel row order
    overflow: int = 0

    def __getattr__(self, name):
        if name in _VEHICLE_SERIES:
            return self.data[_VEHICLE_SERIES.index(name)]
        raise AttributeError(name)

    @property
    def hours(self) -> int:
        return self.data.shape[1]


@dataclass
class FleetProfile:
    """Aggregated virtual storage of one vehicle class in one area."""

    area: str
    kind: str
    year: int
    vehicles: float
    charger_power_mw: float
    battery_capacity_mwh: float
    charge_efficiency: float
    start_weekday: int
    data: np.ndarray  # (8, T), MW / MWh, already scaled to ``vehicles``
    sample_size: int = 0
    overflow: int = 0
    prior_soc_mwh: float | None = None  # passive SOC in the hour before ``data`` starts

    def __getattr__(self, name):
        if name in SERIES:
            return self.data[SERIES.index(name)]
        raise AttributeError(name)

    @property
    def hours(self) -> int:
        return self.data.shape[1]

    @property
    def charger_capacity_mw(self) -> np.ndarray:
        return self.charger_power_mw * self.available_count

    @property
    def initial_soc_mwh(self) -> float:
        """Stored energy before the first hour.

        For a full-year profile every vehicle starts at home and full; for a
        window it is the passive SOC of the preceding hour.
        """
        if self.prior_soc_mwh is not None:
            return self.prior_soc_mwh
        return self.vehicles * self.battery_capacity_mwh

    @property
    def passive_drift_mwh(self) -> float:
        """Change of the passive SOC over the profile (end minus the hour before start)."""
        if not self.hours:
            return 0.0
        return float(self.passive_soc_mwh[-1] - self.initial_soc_mwh)

    def window(self, start: int, length: int) -> "FleetProfile":
        """Calendar slice ``[start, start + length)``."""
        if start < 0 or length < 0 or start + length > self.hours:
            raise FleetError("window outside the simulated year")
        prior = self.initial_soc_mwh if start == 0 else float(self.passive_soc_mwh[start - 1])
        return replace(self, data=self.data[:, start:start + length].copy(), prior_soc_mwh=prior)

    def scaled(self, vehicles: float) -> "FleetProfile":
        """Linear rescaling of every series to a new vehicle count."""
        if vehicles < 0:
            raise FleetError("negative vehicle count")
        f = vehicles / self.vehicles if self.vehicles else 0.0
        prior = None if self.prior_soc_mwh is None else self.prior_soc_mwh * f
        return replace(self, vehicles=float(vehicles), data=self.data * f, prior_soc_mwh=prior)

    def check(self) -> None:
        if np.any(self.soc_min_mwh > self.soc_max_mwh + 1e-9 * max(1.0, self.soc_max_mwh.max(initial=0))):
            raise FleetError("soc_min exceeds soc_max")
        if np.any(self.available_count > self.vehicles * (1 + 1e-12)):
            raise FleetError("more vehicles available than exist")


# -- simulation -------------------------------------------------------------
def day_weekdays(ndays: int = DAYS_PER_YEAR, start_weekday: int = 0) -> np.ndarray:
    return (np.arange(ndays) + start_weekday) % 7


def _kernel_args(vclass: VehicleClass):
    return (
        float(vclass.battery_capacity_kwh),
        float(vclass.consumption_kwh_per_km),
        float(vclass.charger_power_kw),
        float(vclass.charge_efficiency),
        float(vclass.emergency_soc_kwh),
    )


def schedule_from_days(dep, arr, dist, vclass: VehicleClass, start_weekday: int = 0) -> VehicleSchedule:
    """Simulate one vehicle from its per-day trip draws (minutes, km)."""
    dep = np.asarray(dep, dtype=np.int64)
    arr = np.asarray(arr, dtype=np.int64)
    dist = np.asarray(dist, dtype=float)
    wd = day_weekdays(dep.size, start_weekday)
    out = np.zeros((K.NSERIES, 24 * dep.size))
    overflow = K.simulate_vehicle(dep, arr, dist, wd, *_kernel_args(vclass), out)
    if overflow:
        log.debug("%d outings exceeded the battery content", overflow)
    return VehicleSchedule(vclass.kind.value, vclass.year, start_weekday, out, int(overflow))


def build_vehicle_schedule(
    library: TripLibrary,
    vclass: VehicleClass,
    seed: int,
    ndays: int = DAYS_PER_YEAR,
    start_weekday: int = 0,
) -> VehicleSchedule:
    """Draw one trip (or none) per day and simulate the vehicle."""
    rng = np.random.default_rng(seed)
    dep, arr, dist = sample_days(library, day_weekdays(ndays, start_weekday), rng)
    return schedule_from_days(dep, arr, dist, vclass, start_weekday)


def vehicle_seed(base_seed: int, index: int) -> int:
    """Seed of the ``index``-th sampled vehicle."""
    return int(base_seed) ^ int(index)


def draw_fleet_days(
    library: TripLibrary,
    n_vehicles: int,
    base_seed: int,
    first_index: int = 0,
    ndays: int = DAYS_PER_YEAR,
    start_weekday: int = 0,
):
    wd = day_weekdays(ndays, start_weekday)
    dep = np.empty((n_vehicles, ndays), dtype=np.int64)
    arr = np.empty((n_vehicles, ndays), dtype=np.int64)
    dist = np.empty((n_vehicles, ndays))
    for v in range(n_vehicles):
        rng = np.random.default_rng(vehicle_seed(base_seed, first_index + v))
        dep[v], arr[v], dist[v] = sample_days(library, wd, rng)
    return dep, arr, dist


def aggregate_fleet(
    schedules: Sequence[VehicleSchedule],
    stock_count: float,
    area: str,
    vclass: VehicleClass,
) -> FleetProfile:
    """Sum the vehicle series, rescale to ``stock_count`` vehicles, convert to MW/MWh."""
    if not schedules:
        raise FleetError("no schedules to aggregate")
    T = schedules[0].hours
    start = schedules[0].start_weekday
    total = np.zeros((K.NSERIES, T))
    overflow = 0
    for s in schedules:
        if s.hours != T or s.start_weekday != start:
            raise FleetError("schedules do not share one calendar")
        if s.kind != vclass.kind.value:
            raise FleetError("schedules of different vehicle classes")
        total += s.data
        overflow += s.overflow
    return _profile(total, len(schedules), stock_count, area, vclass, start, overflow)


def _profile(total, n, stock_count, area, vclass, start_weekday, overflow) -> FleetProfile:
    f = stock_count / n
    data = total * f
    data[1:] /= 1000.0  # kW, kWh -> MW, MWh; row 0 is a vehicle count
    return FleetProfile(
        area=area,
        kind=vclass.kind.value,
        year=vclass.year,
        vehicles=float(stock_count),
        charger_power_mw=vclass.charger_power_kw / 1000.0,
        battery_capacity_mwh=vclass.battery_capacity_kwh / 1000.0,
        charge_efficiency=vclass.charge_efficiency,
        start_weekday=start_weekday,
        data=data,
        sample_size=n,
        overflow=overflow,
    )


def build_fleet_profile(
    library: TripLibrary,
    vclass: VehicleClass,
    area: str,
    stock_count: float,
    n_vehicles: int = DEFAULT_SAMPLE,
    base_seed: int = 0,
    first_index: int = 0,
    ndays: int = DAYS_PER_YEAR,
    start_weekday: int = 0,
    days=None,
) -> FleetProfile:
    """Simulate ``n_vehicles`` sampled vehicles and aggregate them.

    Equivalent to :func:`aggregate_fleet` over :func:`build_vehicle_schedule`
    with seeds ``base_seed ^ (first_index + v)``, but without materializing
    per-vehicle series.  ``days`` may pass pre-drawn trips from
    :func:`draw_fleet_days`.
    """
    if n_vehicles <= 0:
        raise FleetError("sample size must be positive")
    dep, arr, dist = days if days is not None else draw_fleet_days(
        library, n_vehicles, base_seed, first_index, ndays, start_weekday
    )
    total = np.zeros((K.NSERIES, 24 * dep.shape[1]))
    overflow = K.simulate_fleet(dep, arr, dist, day_weekdays(dep.shape[1], start_weekday), *_kernel_args(vclass), total)
    if overflow:
        log.debug("%s %s %d: %d outings clamped at an empty battery", area, vclass.kind.value, vclass.year, overflow)
    n = dep.shape[0]
    return _profile(total, n, float(n), area, vclass, start_weekday, int(overflow)).scaled(stock_count)


def scale_to_stock(profile: FleetProfile, stocks: Mapping[int, float], years: Iterable[int] | None = None) -> dict[int, FleetProfile]:
    """Rescale one profile to each year's vehicle count."""
    years = list(stocks) if years is None else list(years)
    out = {}
    for y in years:
        if y not in stocks:
            raise KeyError(f"stock table has no year {y}")
        out[y] = replace(profile.scaled(stocks[y]), year=y)
    return out


# -- aggregation error ---------------------------------------------------------
@dataclass
class AggregationError:
    """Signed hourly error of passive charging simulated on the aggregate.

    ``errors`` is relative to the fleet's total charger capacity; positive
    values mean the aggregate charges more than the vehicles could.
    """

    errors: np.ndarray
    bin_edges: np.ndarray
    counts: np.ndarray

    @property
    def max_abs(self) -> float:
        return float(np.abs(self.errors).max(initial=0.0))

    def share_within(self, bound: float) -> float:
        if not self.errors.size:
            return 1.0
        return float(np.mean(np.abs(self.errors) <= bound))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("bin_low", "bin_high", "hours"))
        for lo, hi, c in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts):
            w.writerow((f"{lo:.4f}", f"{hi:.4f}", int(c)))
        return buf.getvalue()


def passive_feasibility_error(
    profile: FleetProfile,
    schedules: Sequence[VehicleSchedule] | None = None,
    bins: np.ndarray | None = None,
) -> AggregationError:
    """Compare passive charging of the aggregated storage with the vehicle-level truth.

    The aggregated storage only knows total available charger power and total
    room, so it keeps charging at full fleet power where individual vehicles
    are already full.  The truth is the summed vehicle passive load (from
    ``schedules`` when given, else the profile's own passive series).
    """
    truth = profile.passive_load_mw
    if schedules:
        truth = sum(s.passive_load_kw for s in schedules) * (profile.vehicles / len(schedules)) / 1000.0
    agg = K.aggregate_dumb_charging(
        profile.charger_capacity_mw,
        profile.soc_max_mwh,
        profile.soc_injection_mwh,
        profile.trip_withdrawal_mwh,
        profile.charge_efficiency,
        profile.initial_soc_mwh,
    )
    cap = profile.vehicles * profile.charger_power_mw
    err = (agg - truth) / cap if cap > 0 else np.zeros_like(truth)
    if bins is None:
        bins = np.linspace(-0.05, 0.05, 21)
    counts, edges = np.histogram(np.clip(err, bins[0], bins[-1]), bins=bins)
    return AggregationError(err, edges, counts)


# -- serialization --------------------------------------------------------------
_META = ("area", "kind", "year", "vehicles", "charger_power_mw", "battery_capacity_mwh",
         "charge_efficiency", "start_weekday", "sample_size", "overflow", "prior_soc_mwh")


def write_profile_csv(profile: FleetProfile, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for k in _META:
            fh.write(f"# {k}={getattr(profile, k)!r}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("hour",) + SERIES)
        for t in range(profile.hours):
            w.writerow((t,) + tuple(repr(float(v)) for v in profile.data[:, t]))


def read_profile_csv(path: str | Path) -> FleetProfile:
    import ast

    meta = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                k, v = line[1:].strip().split("=", 1)
                meta[k] = ast.literal_eval(v)
            else:
                rows.append(line)
    reader = csv.reader(rows)
    header = next(reader)
    if tuple(header[1:]) != SERIES:
        raise FleetError(f"{path}: unexpected columns")
    data = np.array([[float(v) for v in r[1:]] for r in reader]).T
    return FleetProfile(data=data, **meta)


def cache_key(library: TripLibrary, vclass: VehicleClass, base_seed: int, n_vehicles: int,
              first_index: int, ndays: int, start_weekday: int) -> str:
    h = hashlib.sha256()
    h.update(library.digest().encode())
    h.update(repr(sorted((f.name, repr(getattr(vclass, f.name))) for f in fields(vclass))).encode())
    h.update(repr((base_seed, n_vehicles, first_index, ndays, start_weekday)).encode())
    return h.hexdigest()[:20]


def cached_fleet_profile(cache_dir: str | Path | None, library: TripLibrary, vclass: VehicleClass,
                         area: str, stock_count: float, n_vehicles: int = DEFAULT_SAMPLE,
                         base_seed: int = 0, first_index: int = 0, ndays: int = DAYS_PER_YEAR,
                         start_weekday: int = 0) -> FleetProfile:
    """:func:`build_fleet_profile` with an optional on-disk cache of the sample sums."""
    if cache_dir is None:
        return build_fleet_profile(library, vclass, area, stock_count, n_vehicles, base_seed,
                                   first_index, ndays, start_weekday)
    cache_dir = Path(cache_dir)
    key = cache_key(library, vclass, base_seed, n_vehicles, first_index, ndays, start_weekday)
    path = cache_dir / f"fleet-{key}.npz"
    if path.exists():
        z = np.load(path)
        base = FleetProfile(area, vclass.kind.value, vclass.year, float(n_vehicles),
                            vclass.charger_power_kw / 1000.0, vclass.battery_capacity_kwh / 1000.0,
                            vclass.charge_efficiency, start_weekday, z["data"], n_vehicles, int(z["overflow"]))
    else:
        base = build_fleet_profile(library, vclass, area, n_vehicles, n_vehicles, base_seed,
                                   first_index, ndays, start_weekday)
        cache_dir.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp.npz")
        np.savez(tmp, data=base.data, overflow=base.overflow)
        tmp.replace(path)
    return base.scaled(stock_count)


__all__ = [
    "FleetProfile", "VehicleSchedule", "AggregationError", "FleetError", "SERIES", "WEEKDAYS",
    "build_vehicle_schedule", "schedule_from_days", "aggregate_fleet", "build_fleet_profile",
    "draw_fleet_days", "scale_to_stock", "passive_feasibility_error", "vehicle_seed",
    "write_profile_csv", "read_profile_csv", "cached_fleet_profile",
]
