"""Compiled hour-by-hour simulation of single vehicles."""

from __future__ import annotations

import numpy as np
from numba import njit

# row order of the per-vehicle output block
AVAIL, WITHDRAW, INJECT, INFLEX, PASSIVE, PSOC, SOC_MAX, SOC_MIN = range(8)
NSERIES = 8


@njit(cache=True)
def simulate_vehicle(dep, arr, dist, weekday, cap, cons, pch, eta, em, out):
    """Simulate one vehicle over ``24 * len(dep)`` hours into ``out`` (8 x T).

    ``dep``/``arr`` are departure/arrival minutes per day (``-1``: no trip).
    Returns the number of outings whose consumption exceeded the energy on
    board.  Power in kW, energy in kWh, one-hour steps.
    """
    ndays = dep.shape[0]
    T = 24 * ndays
    away = np.zeros(T, dtype=np.bool_)
    leg = np.zeros(T)
    earliest = np.full(7, 99, dtype=np.int64)
    for d in range(ndays):
        if dep[d] >= 0:
            h0 = d * 24 + dep[d] // 60
            h1 = d * 24 + arr[d] // 60
            for h in range(h0, h1 + 1):
                away[h] = True
            leg[h0] += dist[d]
            hd = dep[d] // 60
            if hd < earliest[weekday[d]]:
                earliest[weekday[d]] = hd

    for k in range(out.shape[0]):
        for t in range(T):
            out[k, t] = 0.0

    soc = cap  # passive state of charge, starts full at home
    em_track = cap  # passive-independent track of the emergency top-up
    withdrawn = 0.0
    km = 0.0
    overflow = 0
    for t in range(T):
        if away[t]:
            if t == 0 or not away[t - 1]:
                withdrawn = soc
                out[WITHDRAW, t] = soc
                km = 0.0
                soc = 0.0
                em_track = 0.0
            km += leg[t]
            continue
        if t > 0 and away[t - 1]:
            residual = withdrawn - km * cons
            if residual < 0.0:
                residual = 0.0
                overflow += 1
            out[INJECT, t] = residual
            soc = residual
            em_track = residual
        out[AVAIL, t] = 1.0
        out[SOC_MAX, t] = cap
        # emergency top-up, spilled over later hours at full charger power
        if em_track < em:
            need = (em - em_track) / eta
            if need <= pch:
                out[INFLEX, t] = need
                em_track = em
            else:
                out[INFLEX, t] = pch
                em_track += eta * pch
        # passive charging at full power until full
        if soc < cap:
            need = (cap - soc) / eta
            if need <= pch:
                out[PASSIVE, t] = need
                soc = cap
            else:
                out[PASSIVE, t] = pch
                soc += eta * pch
        out[PSOC, t] = soc
        out[SOC_MIN, t] = min(em, em_track)

    # readiness: from an hour before the weekday's earliest departure the
    # stored energy may not fall below the passive trajectory
    for d in range(ndays):
        if dep[d] < 0:
            continue
        t_dep = d * 24 + dep[d] // 60
        if t_dep > 0 and away[t_dep - 1]:
            continue  # merged into the previous outing
        start = d * 24 + earliest[weekday[d]] - 1
        if start < 0:
            start = 0
        for h in range(start, t_dep):
            if not away[h] and out[PSOC, h] > out[SOC_MIN, h]:
                out[SOC_MIN, h] = out[PSOC, h]
    return overflow


@njit(cache=True)
def simulate_fleet(dep, arr, dist, weekday, cap, cons, pch, eta, em, total):
    """Sum of :func:`simulate_vehicle` over the rows of ``dep``/``arr``/``dist``."""
    nv = dep.shape[0]
    T = total.shape[1]
    buf = np.zeros((NSERIES, T))
    overflow = 0
    for v in range(nv):
        overflow += simulate_vehicle(dep[v], arr[v], dist[v], weekday, cap, cons, pch, eta, em, buf)
        for k in range(NSERIES):
            for t in range(T):
                total[k, t] += buf[k, t]
    return overflow


@njit(cache=True)
def aggregate_dumb_charging(avail_cap, soc_max, inject, withdraw, eta, soc0):
    """Passive charging simulated on the aggregated storage itself."""
    T = soc_max.shape[0]
    load = np.zeros(T)
    soc = soc0
    for t in range(T):
        soc = soc + inject[t] - withdraw[t]
        if soc < 0.0:
            soc = 0.0
        room = soc_max[t] - soc
        p = 0.0
        if room > 0.0:
            p = room / eta
            if p > avail_cap[t]:
                p = avail_cap[t]
        soc += eta * p
        load[t] = p
    return load
