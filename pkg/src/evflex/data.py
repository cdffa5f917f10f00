"""Default vehicle stocks and technical/economic vehicle parameters.

Stocks are in thousand vehicles.  Per-year vehicle parameters use kWh/km for
consumption, kWh for battery size, MW for the per-vehicle home charger and
EUR/MWh for battery cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

MODEL_YEARS = (2020, 2030, 2040, 2050)


class VehicleKind(str, Enum):
    BEV = "BEV"
    PHEV = "PHEV"


# thousand vehicles: STOCKS[area][kind][year]
STOCKS: dict[str, dict[str, dict[int, float]]] = {}


def _add_stocks(areas, rows):
    for kind, year, values in rows:
        for area, v in zip(areas, values):
            STOCKS.setdefault(area, {}).setdefault(kind, {})[year] = v


_add_stocks(
    ("DK", "NO", "SE", "FI", "EE", "LV", "LT"),
    [
        ("BEV", 2020, (5.0, 21.0, 20.0, 3.0, 1.4, 0.5, 0.5)),
        ("PHEV", 2020, (11.0, 11.0, 75.0, 18.0, 0.5, 0.5, 0.5)),
        ("BEV", 2030, (169.8, 1068.2, 352.5, 183.3, 43.5, 61.7, 88.1)),
        ("PHEV", 2030, (540.4, 646.9, 1121.9, 583.4, 138.3, 196.4, 280.4)),
        ("BEV", 2040, (583.1, 1703.6, 1182.9, 615.1, 156.6, 222.2, 317.4)),
        ("PHEV", 2040, (832.1, 1112.7, 1688.0, 877.8, 223.4, 317.1, 452.9)),
        ("BEV", 2050, (698.3, 2354.8, 1502.7, 781.4, 202.0, 242.0, 314.5)),
        ("PHEV", 2050, (761.0, 1059.4, 1637.6, 851.6, 220.1, 263.7, 342.8)),
    ],
)
_add_stocks(
    ("UK", "DE", "NL", "PL", "BE", "FR"),
    [
        ("BEV", 2020, (70.0, 100.0, 51.0, 1.5, 48.0, 70.9)),
        ("PHEV", 2020, (170.0, 105.0, 100.0, 1.5, 12.5, 172.2)),
        ("BEV", 2030, (3371.1, 4340.7, 2872.7, 1700.0, 516.3, 3414.9)),
        ("PHEV", 2030, (3371.1, 4340.7, 1739.6, 1700.0, 516.3, 3414.9)),
        ("BEV", 2040, (7271.1, 8472.7, 4183.5, 3400.0, 1032.7, 7365.6)),
        ("PHEV", 2040, (5453.3, 6354.6, 2732.6, 2550.0, 774.5, 5524.2)),
        ("BEV", 2050, (11700.0, 12396.1, 5320.7, 5100.0, 1549.0, 11852.1)),
        ("PHEV", 2050, (7800.0, 8264.1, 2393.8, 3400.0, 1032.7, 7901.4)),
    ],
)

# year -> (consumption kWh/km, BEV kWh, PHEV kWh, charger MW, battery EUR/MWh, charger EUR/kWh)
YEARLY = {
    2020: (0.18, 30.0, 10.0, 0.01, 175000.0, 220.0),
    2030: (0.17, 30.0, 10.0, 0.01, 140000.0, 60.1),
    2040: (0.16, 40.0, 10.0, 0.015, 105000.0, 59.7),
    2050: (0.15, 50.0, 10.0, 0.02, 70000.0, 57.5),
}

EMERGENCY_KM = {VehicleKind.BEV: 50.0, VehicleKind.PHEV: 25.0}
CHARGE_EFFICIENCY = 0.85
# 0.003% capacity loss per full equivalent cycle, the alternative to the default
# cycle factor; use DegradationParams(cyc_factor=CYC_FACTOR_PER_CYCLE_LOSS)
CYC_FACTOR_PER_CYCLE_LOSS = 0.00003


@dataclass(frozen=True)
class DegradationParams:
    cyc_factor: float = 0.00004
    cal_const: float = 0.0000006
    cal_flex: float = 0.0000009
    oversize_factor: float = 1.1
    lifetime_fraction: float = 0.25

    def __post_init__(self):
        if min(self.cyc_factor, self.cal_const, self.cal_flex) < 0:
            raise ValueError("degradation factors must be non-negative")
        if self.oversize_factor <= 1.0:
            raise ValueError("oversize factor must exceed 1")
        if not 0.0 < self.lifetime_fraction <= 1.0:
            raise ValueError("lifetime fraction must lie in (0, 1]")


@dataclass(frozen=True)
class VehicleClass:
    """Technical and economic data of one vehicle type in one model year."""

    kind: VehicleKind
    year: int
    battery_capacity_kwh: float
    consumption_kwh_per_km: float
    charger_power_kw: float
    emergency_distance_km: float
    charge_efficiency: float = CHARGE_EFFICIENCY
    battery_cost_eur_per_mwh: float = 0.0
    charger_cost_eur_per_kw: float = 0.0
    degradation: DegradationParams = field(default_factory=DegradationParams)

    def __post_init__(self):
        for name in ("battery_capacity_kwh", "consumption_kwh_per_km", "charger_power_kw", "emergency_distance_km"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.charge_efficiency <= 1.0:
            raise ValueError("charge efficiency must lie in (0, 1]")
        if self.emergency_soc_kwh >= self.battery_capacity_kwh:
            raise ValueError("emergency energy must be below the battery capacity")

    @property
    def emergency_soc_kwh(self) -> float:
        return self.emergency_distance_km * self.consumption_kwh_per_km

    def with_(self, **changes) -> "VehicleClass":
        return replace(self, **changes)


def vehicle_class(kind: VehicleKind | str, year: int, degradation: DegradationParams | None = None) -> VehicleClass:
    """Default class for ``kind`` in a model year (2020/2030/2040/2050)."""
    kind = VehicleKind(kind)
    if year not in YEARLY:
        raise KeyError(f"no vehicle data for year {year}")
    cons, bev, phev, charger_mw, c_bat, c_ch = YEARLY[year]
    return VehicleClass(
        kind=kind,
        year=year,
        battery_capacity_kwh=bev if kind is VehicleKind.BEV else phev,
        consumption_kwh_per_km=cons,
        charger_power_kw=charger_mw * 1000.0,
        emergency_distance_km=EMERGENCY_KM[kind],
        battery_cost_eur_per_mwh=c_bat,
        # tabulated per kWh of charger power
        charger_cost_eur_per_kw=c_ch,
        degradation=degradation or DegradationParams(),
    )


def stock(area: str, kind: VehicleKind | str, year: int) -> float:
    """Number of vehicles (not thousands) for an area, kind and model year."""
    kind = VehicleKind(kind).value
    try:
        return STOCKS[area][kind][year] * 1000.0
    except KeyError as exc:
        raise KeyError(f"no stock for {area}/{kind}/{year}") from exc
