"""Single-vehicle trip records: CSV ingestion, synthesis and weekday sampling."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

log = logging.getLogger(__name__)

WEEKDAYS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
CSV_HEADER = ("weekday", "depart_minute", "arrive_minute", "distance_km")
DEFAULT_NO_TRIP = 0.15
DEFAULT_REJECT_RATIO = 0.05


class TripDataError(ValueError):
    """Raised when trip input cannot be turned into a valid library."""


@dataclass(frozen=True)
class TripRecord:
    weekday: str
    depart_minute: int
    arrive_minute: int
    distance_km: float

    def is_valid(self) -> bool:
        return (
            self.weekday in WEEKDAYS
            and 0 <= self.depart_minute < self.arrive_minute <= 1439
            and self.distance_km >= 0.0
            and np.isfinite(self.distance_km)
        )


@dataclass
class TripLibrary:
    """Trips partitioned by weekday plus a per-weekday no-trip probability.

    Per weekday the records are also held as numpy arrays so fleet
    construction can sample many days at once.  A library may lack some
    weekdays (e.g. a partial survey extract); whole-year sampling calls
    :meth:`ensure_complete`.
    """

    trips: list[TripRecord]
    no_trip: dict[str, float] = field(default_factory=lambda: {d: DEFAULT_NO_TRIP for d in WEEKDAYS})
    dropped: int = 0

    def __post_init__(self):
        if isinstance(self.no_trip, (int, float)):
            self.no_trip = {d: float(self.no_trip) for d in WEEKDAYS}
        missing = set(WEEKDAYS) - set(self.no_trip)
        if missing:
            raise TripDataError(f"no-trip probability missing for {sorted(missing)}")
        for d, p in self.no_trip.items():
            if not 0.0 <= p <= 1.0:
                raise TripDataError(f"no-trip probability for {d} outside [0, 1]")
        self.by_weekday: dict[str, list[TripRecord]] = {d: [] for d in WEEKDAYS}
        for t in self.trips:
            self.by_weekday[t.weekday].append(t)
        if not self.trips:
            raise TripDataError("trip library is empty")
        self._arrays = {}
        for d, lst in self.by_weekday.items():
            self._arrays[d] = (
                np.array([t.depart_minute for t in lst], dtype=np.int64),
                np.array([t.arrive_minute for t in lst], dtype=np.int64),
                np.array([t.distance_km for t in lst], dtype=float),
            )

    def __eq__(self, other) -> bool:
        if not isinstance(other, TripLibrary):
            return NotImplemented
        return self.trips == other.trips and self.no_trip == other.no_trip

    def __len__(self) -> int:
        return len(self.trips)

    @property
    def missing_weekdays(self) -> list[str]:
        return [d for d, lst in self.by_weekday.items() if not lst]

    def ensure_complete(self) -> None:
        """Raise unless every weekday has at least one trip (needed for whole-year sampling)."""
        if self.missing_weekdays:
            raise TripDataError(f"no trips for weekday(s) {', '.join(self.missing_weekdays)}")

    def arrays(self, weekday: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self._arrays[weekday]

    def digest(self) -> str:
        """Content hash used as a cache key."""
        import hashlib

        h = hashlib.sha256()
        for d in WEEKDAYS:
            dep, arr, dist = self._arrays[d]
            h.update(d.encode())
            h.update(repr(self.no_trip[d]).encode())
            for a in (dep, arr, dist):
                h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()[:16]


# -- sampling ---------------------------------------------------------------
def _pick(u: np.ndarray, p_none: float, n: int) -> np.ndarray:
    """Map uniforms to trip indices; ``-1`` encodes "no trip"."""
    if p_none >= 1.0:
        return np.full(u.shape, -1, dtype=np.int64)
    idx = np.floor((u - p_none) / (1.0 - p_none) * n).astype(np.int64)
    idx = np.minimum(idx, n - 1)
    return np.where(u < p_none, -1, idx)


def sample_trip(library: TripLibrary, weekday: str, rng: np.random.Generator) -> TripRecord | None:
    """Uniform draw from the weekday's trips, or ``None`` with the no-trip probability."""
    lst = library.by_weekday[weekday]
    if not lst:
        raise TripDataError(f"no trips for {weekday}")
    k = int(_pick(np.array([rng.random()]), library.no_trip[weekday], len(lst))[0])
    return None if k < 0 else lst[k]


def sample_days(library: TripLibrary, weekdays: np.ndarray, rng: np.random.Generator):
    """Vectorized :func:`sample_trip` for a sequence of days.

    ``weekdays`` holds weekday indices (0 = Mon).  Returns depart/arrive
    minutes and distances with ``-1`` minutes on days without a trip.  Each
    day consumes one uniform, in day order, exactly as repeated calls of
    :func:`sample_trip` would.
    """
    library.ensure_complete()
    u = rng.random(weekdays.size)
    dep = np.full(weekdays.size, -1, dtype=np.int64)
    arr = np.full(weekdays.size, -1, dtype=np.int64)
    dist = np.zeros(weekdays.size)
    for w, name in enumerate(WEEKDAYS):
        days = np.flatnonzero(weekdays == w)
        if not days.size:
            continue
        d_dep, d_arr, d_dist = library.arrays(name)
        k = _pick(u[days], library.no_trip[name], d_dep.size)
        hit = k >= 0
        dep[days[hit]] = d_dep[k[hit]]
        arr[days[hit]] = d_arr[k[hit]]
        dist[days[hit]] = d_dist[k[hit]]
    return dep, arr, dist


# -- CSV ----------------------------------------------------------------------
def write_trip_library(library: TripLibrary, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for t in library.trips:
            w.writerow((t.weekday, t.depart_minute, t.arrive_minute, repr(float(t.distance_km))))


def load_trip_library(
    path: str | Path,
    schema: Mapping[str, str] | None = None,
    no_trip: float | Mapping[str, float] = DEFAULT_NO_TRIP,
    max_reject_ratio: float = DEFAULT_REJECT_RATIO,
) -> TripLibrary:
    """Read a trip CSV; invalid rows are dropped and counted.

    ``schema`` maps the canonical column names to the file's column names.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    cols = {c: c for c in CSV_HEADER}
    cols.update(schema or {})
    trips: list[TripRecord] = []
    seen: set[str] = set()
    bad = 0
    total = 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        absent = [cols[c] for c in CSV_HEADER if cols[c] not in (reader.fieldnames or [])]
        if absent:
            raise TripDataError(f"{path}: missing column(s) {absent}")
        for row in reader:
            total += 1
            seen.add((row.get(cols["weekday"]) or "").strip())
            try:
                rec = TripRecord(
                    row[cols["weekday"]].strip(),
                    int(row[cols["depart_minute"]]),
                    int(row[cols["arrive_minute"]]),
                    float(row[cols["distance_km"]]),
                )
            except (TypeError, ValueError):
                bad += 1
                continue
            if rec.is_valid():
                trips.append(rec)
            else:
                bad += 1
    if total and bad / total > max_reject_ratio:
        raise TripDataError(f"{path}: {bad} of {total} rows rejected (limit {max_reject_ratio:.0%})")
    if bad:
        log.warning("%s: dropped %d invalid trip rows", path, bad)
    emptied = sorted({d for d in seen if d in WEEKDAYS} - {t.weekday for t in trips}, key=WEEKDAYS.index)
    if emptied:
        raise TripDataError(f"{path}: no valid trips left for {', '.join(emptied)}")
    if not trips:
        raise TripDataError(f"{path}: no valid trips")
    if not isinstance(no_trip, Mapping):
        no_trip = {d: float(no_trip) for d in WEEKDAYS}
    return TripLibrary(trips, dict(no_trip), dropped=bad)


# -- synthesis --------------------------------------------------------------------
@dataclass(frozen=True)
class WeekdayProfile:
    """Trip distributions for one weekday.

    Departure is normal (truncated to the day), duration and distance are
    log-normal with the given mean and standard deviation.
    """

    depart_mean_min: float
    depart_sd_min: float
    duration_mean_min: float
    duration_sd_min: float
    distance_mean_km: float
    distance_sd_km: float
    no_trip: float = DEFAULT_NO_TRIP


_WORKDAY = WeekdayProfile(450.0, 75.0, 540.0, 120.0, 30.0, 20.0)
_WEEKEND = WeekdayProfile(660.0, 150.0, 240.0, 120.0, 40.0, 30.0)


@dataclass(frozen=True)
class TripSynthesisSpec:
    profiles: dict = field(default_factory=lambda: {d: (_WEEKEND if d in ("Sat", "Sun") else _WORKDAY) for d in WEEKDAYS})
    trips_per_weekday: int = 1500

    @classmethod
    def from_dict(cls, cfg: Mapping | None) -> "TripSynthesisSpec":
        """Build from the ``trip_synthesis`` config block.

        Keys ``workday`` and ``weekend`` override the defaults of those day
        groups, a weekday key (``"Mon"``) overrides a single day, and
        ``no_trip_probability`` sets the stay-home share of every day.
        """
        cfg = dict(cfg or {})
        if "trip_synthesis" in cfg:
            cfg = dict(cfg["trip_synthesis"] or {})
        base = cls()
        profiles = dict(base.profiles)
        no_trip = cfg.pop("no_trip_probability", None)
        for group, days in (("workday", WEEKDAYS[:5]), ("weekend", WEEKDAYS[5:])):
            if group in cfg:
                over = cfg.pop(group)
                for d in days:
                    profiles[d] = WeekdayProfile(**{**profiles[d].__dict__, **over})
        for d in WEEKDAYS:
            if d in cfg:
                profiles[d] = WeekdayProfile(**{**profiles[d].__dict__, **cfg.pop(d)})
        if no_trip is not None:
            profiles = {d: WeekdayProfile(**{**p.__dict__, "no_trip": float(no_trip)}) for d, p in profiles.items()}
        n = int(cfg.pop("trips_per_weekday", base.trips_per_weekday))
        if cfg:
            raise TripDataError(f"unknown trip_synthesis keys {sorted(cfg)}")
        return cls(profiles, n)


def _lognormal(rng, mean, sd, size):
    sigma2 = np.log1p((sd / mean) ** 2)
    return rng.lognormal(np.log(mean) - sigma2 / 2.0, np.sqrt(sigma2), size)


def _check_profile(day: str, p: WeekdayProfile) -> None:
    if p.depart_sd_min < 0 or p.duration_sd_min < 0 or p.distance_sd_km < 0:
        raise TripDataError(f"{day}: negative standard deviation")
    if p.duration_mean_min <= 0 or p.distance_mean_km <= 0:
        raise TripDataError(f"{day}: duration and distance means must be positive")
    if p.depart_sd_min == 0 and not 0 <= round(p.depart_mean_min) <= 1438:
        raise TripDataError(f"{day}: departure distribution has no support inside the day")
    if not 0.0 <= p.no_trip <= 1.0:
        raise TripDataError(f"{day}: no-trip probability outside [0, 1]")


def synth_trip_library(seed: int = 7, spec: TripSynthesisSpec | None = None, max_rounds: int = 200) -> TripLibrary:
    """Draw a synthetic trip library; deterministic for a given seed and spec."""
    spec = spec or TripSynthesisSpec()
    if spec.trips_per_weekday <= 0:
        raise TripDataError("trips_per_weekday must be positive")
    rng = np.random.default_rng(seed)
    trips: list[TripRecord] = []
    for day in WEEKDAYS:
        p = spec.profiles[day]
        _check_profile(day, p)
        n = spec.trips_per_weekday
        dep = np.empty(0, dtype=np.int64)
        for _ in range(max_rounds):
            x = np.rint(rng.normal(p.depart_mean_min, p.depart_sd_min, 2 * n)).astype(np.int64)
            dep = np.concatenate([dep, x[(x >= 0) & (x <= 1438)]])
            if dep.size >= n:
                break
        else:
            raise TripDataError(f"{day}: departure distribution has no support inside the day")
        dep = dep[:n]
        dur = np.zeros(n, dtype=np.int64)
        todo = np.arange(n)
        # first redraw durations only; trips departing too late for any
        # plausible duration then get a fresh departure as well
        for redraw_departure in (False, True):
            for _ in range(max_rounds):
                if redraw_departure:
                    dep[todo] = np.clip(np.rint(rng.normal(p.depart_mean_min, p.depart_sd_min, todo.size)), 0, 1438)
                if p.duration_sd_min > 0:
                    d = np.rint(_lognormal(rng, p.duration_mean_min, p.duration_sd_min, todo.size)).astype(np.int64)
                else:
                    d = np.full(todo.size, int(round(p.duration_mean_min)))
                ok = (d >= 1) & (dep[todo] + d <= 1439)
                dur[todo[ok]] = d[ok]
                todo = todo[~ok]
                if not todo.size:
                    break
            if not todo.size:
                break
        else:
            raise TripDataError(f"{day}: no trip duration fits inside the day")
        if p.distance_sd_km > 0:
            dist = np.round(_lognormal(rng, p.distance_mean_km, p.distance_sd_km, n), 1)
        else:
            dist = np.full(n, float(p.distance_mean_km))
        trips.extend(
            TripRecord(day, int(a), int(a + b), float(c)) for a, b, c in zip(dep, dur, dist)
        )
    return TripLibrary(trips, {d: spec.profiles[d].no_trip for d in WEEKDAYS})
