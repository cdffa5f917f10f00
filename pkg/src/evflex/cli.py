"""Command-line interface.

Exit codes: 0 success, 2 infeasible model, 3 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import data
from .data import vehicle_class
from .fleet import FleetError, build_fleet_profile, passive_feasibility_error, write_profile_csv
from .lp import write_lp
from .scenario import compare, load_result, load_results, load_specs, load_trip_input, report, run_matrix, save_result
from .system import ConfigError, ModelInfeasible
from .trips import TripDataError, TripSynthesisSpec, synth_trip_library, write_trip_library

EXIT_OK, EXIT_INFEASIBLE, EXIT_CONFIG = 0, 2, 3
log = logging.getLogger("evflex")


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


def cmd_synth_trips(args) -> int:
    spec = TripSynthesisSpec.from_dict(_read_json(args.config)) if args.config else TripSynthesisSpec()
    lib = synth_trip_library(args.seed, spec)
    write_trip_library(lib, args.out)
    print(f"wrote {len(lib)} trips to {args.out}")
    return EXIT_OK


def cmd_build_fleet(args) -> int:
    cfg = _read_json(args.config)
    try:
        area, kind, year = cfg["area"], cfg["kind"], int(cfg["year"])
    except KeyError as exc:
        raise ConfigError(f"fleet config lacks {exc}") from None
    seed = int(cfg.get("seed", 0))
    trips = cfg.get("trips")
    if trips and not Path(trips).is_absolute():
        trips = str(Path(args.config).parent / trips)
    lib = load_trip_input(trips, seed)
    try:
        vclass = vehicle_class(kind, year)
        count = float(cfg["stock"]) if "stock" in cfg else data.stock(area, kind, year)
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    n = int(cfg.get("sample_size", 1000))
    profile = build_fleet_profile(lib, vclass, area, count, n, seed, int(cfg.get("first_index", 0)))
    write_profile_csv(profile, args.out)
    err = passive_feasibility_error(profile)
    if args.histogram:
        Path(args.histogram).write_text(err.to_csv(), encoding="utf-8")
    print(f"wrote {profile.hours}-hour profile of {count:.0f} vehicles to {args.out}; "
          f"aggregation error max {100 * err.max_abs:.2f}%, {100 * err.share_within(0.01):.1f}% of hours within 1%")
    return EXIT_OK


def cmd_run_scenario(args) -> int:
    specs = load_specs(args.spec)
    dump = Path(args.dump_lp) if args.dump_lp else None
    if dump:
        dump.mkdir(parents=True, exist_ok=True)

    def progress(spec, ys):
        print(f"{spec.name} {ys.year}: total cost {ys.objective:.6g} EUR", flush=True)
        if dump is not None:
            write_lp(ys.model.lp, dump / f"{spec.name}_{ys.year}.lp")

    try:
        results = run_matrix(specs, progress=progress)
    except ModelInfeasible as exc:
        print(json.dumps(exc.report.to_dict(), indent=1), file=sys.stderr)
        return EXIT_INFEASIBLE
    for res in results:
        path = save_result(res, args.out)
        print(f"{res.name}: {res.total_cost:.6g} EUR -> {path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    base, other = load_result(args.base), load_result(args.other)
    try:
        delta = compare(base, other)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    text = delta.to_csv()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_report(args) -> int:
    files = report(load_results(args.inp), args.out)
    for f in files:
        print(f)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="evflex", description="EV charging flexibility in a small power-system model")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth-trips", help="write a synthetic trip library (CSV)")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--config", help="JSON synthesis settings")
    s.set_defaults(func=cmd_synth_trips)

    s = sub.add_parser("build-fleet", help="simulate a fleet and write its hourly profile")
    s.add_argument("--config", required=True, help="JSON with area, kind, year and optional stock/trips/seed")
    s.add_argument("--out", required=True)
    s.add_argument("--histogram", help="also write the aggregation-error histogram (CSV)")
    s.set_defaults(func=cmd_build_fleet)

    s = sub.add_parser("run-scenario", help="solve one scenario or the scenario matrix")
    s.add_argument("--spec", required=True)
    s.add_argument("--out", default="results")
    s.add_argument("--dump-lp", metavar="DIR", help="write every solved program in LP text format")
    s.set_defaults(func=cmd_run_scenario)

    s = sub.add_parser("compare", help="metric deltas of two saved scenario results")
    s.add_argument("--base", required=True)
    s.add_argument("--other", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("report", help="figure tables and JSON summary from saved results")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, TripDataError, FleetError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
