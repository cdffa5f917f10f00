"""LP encoding of passive, smart and vehicle-to-grid charging for one fleet profile.

A block adds its variables and rows to an existing :class:`LinearProgram` and
reports how it enters the electricity balance of its area:

* ``fixed_load`` (MW per hour) is demand that the block imposes regardless
  of the solution (passive load, or the inflexible emergency top-up);
* ``charge`` / ``discharge`` are variable ids whose values add to / subtract
  from the area demand.

All per-hour costs are multiplied by ``weight`` (hours represented by one
modelled hour).  Costs that do not depend on variables are collected in
``constant_cost`` and added to the program's objective constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .data import VehicleClass
from .fleet import FleetProfile
from .lp import EQ, LE, LinearProgram
from .lp.lpformat import dumps


class ChargingScheme(str, Enum):
    PASSIVE = "PC"
    SMART = "SC"
    V2G = "V2G"


@dataclass
class EvAddonBlock:
    scheme: ChargingScheme
    area: str
    kind: str
    hours: int
    weight: float
    fixed_load: np.ndarray
    replacement_cost: float
    constant_cost: float
    charge: np.ndarray | None = None
    discharge: np.ndarray | None = None
    vsoc: np.ndarray | None = None
    rows: dict = field(default_factory=dict)
    # per-hour cost coefficients before weighting, kept for reporting
    cycle_coef: np.ndarray | None = None
    calendar_flex_coef: np.ndarray | None = None

    def grid_energy(self, x: np.ndarray) -> np.ndarray:
        """Net grid draw per hour (MWh) for a primal solution ``x``."""
        e = self.fixed_load.copy()
        if self.charge is not None:
            e = e + x[self.charge]
        if self.discharge is not None:
            e = e - x[self.discharge]
        return e

    def degradation_cost(self, x: np.ndarray) -> float:
        """Weighted degradation cost of the block at ``x``, constants included."""
        cost = self.constant_cost
        if self.charge is not None:
            cost += self.weight * float(self.cycle_coef @ x[self.charge])
        if self.vsoc is not None:
            cost += self.weight * float(self.calendar_flex_coef @ x[self.vsoc])
        return cost


# -- degradation ---------------------------------------------------------------
def replacement_cost(profile: FleetProfile, vclass: VehicleClass) -> float:
    """Cost of replacing the installed battery capacity of the whole fleet (EUR)."""
    installed = profile.vehicles * profile.battery_capacity_mwh
    return vclass.battery_cost_eur_per_mwh * vclass.degradation.oversize_factor * installed


def _safe_ratio(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=den > 0)
    return out


def cycle_cost_coefficient(soc_max_mwh, repl_cost: float, vclass: VehicleClass) -> np.ndarray:
    """EUR per MWh charged in each hour; zero where the fleet has no capacity."""
    p = vclass.degradation
    return p.cyc_factor * repl_cost / p.lifetime_fraction * _safe_ratio(1.0, p.oversize_factor * np.asarray(soc_max_mwh))


def cycle_degradation_cost(charged_mwh, soc_max_mwh, repl_cost: float, vclass: VehicleClass) -> np.ndarray:
    """Hourly cost of cyclic ageing for the energy charged in each hour."""
    charged = np.asarray(charged_mwh, dtype=float)
    soc_max = np.asarray(soc_max_mwh, dtype=float)
    if np.any((soc_max <= 0) & (charged != 0)):
        raise ValueError("charging in an hour without fleet capacity")
    return cycle_cost_coefficient(soc_max, repl_cost, vclass) * charged


def calendar_coefficients(soc_max_mwh, available_share, repl_cost: float, vclass: VehicleClass):
    """Constant EUR per hour and EUR per MWh stored, for calendar ageing."""
    p = vclass.degradation
    base = repl_cost / p.lifetime_fraction
    const = p.cal_const * np.asarray(available_share, dtype=float) * base
    flex = p.cal_flex * base * _safe_ratio(1.0, p.oversize_factor * np.asarray(soc_max_mwh))
    return const, flex


def calendar_degradation_cost(soc_mwh, soc_max_mwh, repl_cost: float, vclass: VehicleClass,
                              available_share=1.0) -> np.ndarray:
    """Hourly cost of calendar ageing at the given stored energy."""
    soc = np.asarray(soc_mwh, dtype=float)
    soc_max = np.asarray(soc_max_mwh, dtype=float)
    if np.any((soc_max <= 0) & (soc != 0)):
        raise ValueError("stored energy in an hour without fleet capacity")
    const, flex = calendar_coefficients(soc_max, available_share, repl_cost, vclass)
    return const + flex * soc


def _available_share(profile: FleetProfile) -> np.ndarray:
    return _safe_ratio(profile.available_count, profile.vehicles)


# -- blocks ---------------------------------------------------------------------------
def _charger_room(profile: FleetProfile) -> np.ndarray:
    room = profile.charger_capacity_mw - profile.inflexible_load_mw
    tol = 1e-9 * max(1.0, float(profile.charger_capacity_mw.max(initial=0.0)))
    if np.any(room < -tol):
        h = int(np.argmin(room))
        raise ValueError(f"inflexible load exceeds charger capacity at hour {h}")
    return np.maximum(room, 0.0)


def build_block(
    lp: LinearProgram,
    profile: FleetProfile,
    vclass: VehicleClass,
    scheme: ChargingScheme | str,
    weight: float = 1.0,
    name: str | None = None,
) -> EvAddonBlock:
    """Add the rows and variables of one scheme for one fleet window to ``lp``."""
    scheme = ChargingScheme(scheme)
    T = profile.hours
    tag = name or f"ev_{profile.area}_{profile.kind}"
    if profile.vehicles == 0:
        # an empty fleet contributes nothing, whatever the scheme
        return EvAddonBlock(scheme, profile.area, profile.kind, T, weight, np.zeros(T), 0.0, 0.0)
    repl = replacement_cost(profile, vclass)
    share = _available_share(profile)
    cyc = cycle_cost_coefficient(profile.soc_max_mwh, repl, vclass)
    cal_const, cal_flex = calendar_coefficients(profile.soc_max_mwh, share, repl, vclass)

    if scheme is ChargingScheme.PASSIVE:
        pc = profile.passive_load_mw
        const = weight * float(cyc @ pc + cal_const.sum() + cal_flex @ profile.passive_soc_mwh)
        lp.obj_constant += const
        return EvAddonBlock(scheme, profile.area, profile.kind, T, weight, pc.copy(), repl, const,
                            cycle_coef=cyc, calendar_flex_coef=cal_flex)

    eta = profile.charge_efficiency
    inflex = profile.inflexible_load_mw
    room = _charger_room(profile)
    const = weight * float(cyc @ inflex + cal_const.sum())
    lp.obj_constant += const

    v2g = scheme is ChargingScheme.V2G
    flex_ub = room
    charge = lp.add_variables(T, 0.0, flex_ub, weight * cyc, f"{tag}_flex")
    discharge = lp.add_variables(T, 0.0, room, 0.0, f"{tag}_v2g") if v2g else None
    vsoc = lp.add_variables(T, profile.soc_min_mwh, profile.soc_max_mwh, weight * cal_flex, f"{tag}_vsoc")

    # storage balance, cyclic with the passive drift over the window
    t = np.arange(T)
    prev = np.roll(vsoc, 1)
    rows = [t, t, t]
    cols = [vsoc, prev, charge]
    vals = [np.ones(T), -np.ones(T), np.full(T, -eta)]
    if v2g:
        rows.append(t)
        cols.append(discharge)
        vals.append(np.full(T, 1.0 / eta))
    rhs = profile.soc_injection_mwh + eta * inflex - profile.trip_withdrawal_mwh
    rhs = rhs.copy()
    if T:
        rhs[0] -= profile.passive_drift_mwh
    balance = lp.add_constraints(T, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals),
                                 EQ, rhs, f"{tag}_soc")
    out = {"soc": balance}
    if v2g:
        out["charger"] = lp.add_constraints(T, np.r_[t, t], np.r_[charge, discharge], 1.0, LE, room,
                                            f"{tag}_charger")
    return EvAddonBlock(scheme, profile.area, profile.kind, T, weight, inflex.copy(), repl, const,
                        charge=charge, discharge=discharge, vsoc=vsoc, rows=out,
                        cycle_coef=cyc, calendar_flex_coef=cal_flex)


def build_passive(lp, profile, vclass, weight=1.0, name=None) -> EvAddonBlock:
    return build_block(lp, profile, vclass, ChargingScheme.PASSIVE, weight, name)


def build_smart(lp, profile, vclass, weight=1.0, name=None) -> EvAddonBlock:
    return build_block(lp, profile, vclass, ChargingScheme.SMART, weight, name)


def build_v2g(lp, profile, vclass, weight=1.0, name=None) -> EvAddonBlock:
    return build_block(lp, profile, vclass, ChargingScheme.V2G, weight, name)


def standalone(profile: FleetProfile, vclass: VehicleClass, scheme, price=None, weight: float = 1.0):
    """Block in its own program, charging paid at ``price`` (EUR/MWh per hour)."""
    lp = LinearProgram(name=f"ev_{profile.area}_{profile.kind}_{ChargingScheme(scheme).value}")
    blk = build_block(lp, profile, vclass, scheme, weight)
    if price is not None:
        price = np.broadcast_to(np.asarray(price, dtype=float), (profile.hours,))
        lp.obj_constant += weight * float(price @ blk.fixed_load)
        if blk.charge is not None:
            lp.add_cost(blk.charge, weight * price)
        if blk.discharge is not None:
            lp.add_cost(blk.discharge, -weight * price)
    return lp, blk


def dump_block(profile: FleetProfile, vclass: VehicleClass, scheme, path=None, weight: float = 1.0) -> str:
    """LP text of one block on its own; written to ``path`` when given."""
    lp, _ = standalone(profile, vclass, scheme, weight=weight)
    text = dumps(lp)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


# -- passive schedule inside the smart rows ---------------------------------------
@dataclass
class PassiveCheck:
    ok: bool
    max_violation: float
    worst: str = ""


def check_passive_in_smart(profile: FleetProfile, tol: float = 1e-7) -> PassiveCheck:
    """Substitute the passive schedule into the smart-charging rows and bounds.

    Flexible charging is set to passive minus inflexible load and the stored
    energy to the passive SOC.  Violations are absolute (MW / MWh).
    """
    eta = profile.charge_efficiency
    flex = profile.passive_load_mw - profile.inflexible_load_mw
    soc = profile.passive_soc_mwh
    checks = {
        "flex >= 0": np.maximum(-flex, 0.0),
        "charger": np.maximum(profile.passive_load_mw - profile.charger_capacity_mw, 0.0),
        "soc >= min": np.maximum(profile.soc_min_mwh - soc, 0.0),
        "soc <= max": np.maximum(soc - profile.soc_max_mwh, 0.0),
    }
    if profile.hours:
        prev = np.roll(soc, 1)
        prev[0] = soc[-1] - profile.passive_drift_mwh
        resid = soc - prev - eta * (flex + profile.inflexible_load_mw) - (
            profile.soc_injection_mwh - profile.trip_withdrawal_mwh
        )
        checks["balance"] = np.abs(resid)
    worst_name, worst = "", 0.0
    for k, v in checks.items():
        m = float(v.max(initial=0.0))
        if m > worst:
            worst_name, worst = k, m
    scale = max(1.0, float(profile.soc_max_mwh.max(initial=0.0)))
    return PassiveCheck(worst <= tol * scale, worst, worst_name)
