"""Command line entry point.

    vipursuit run SCENARIO [--out DIR] [--seed N] [--formats csv,kml,geojson]
    vipursuit validate SCENARIO
    vipursuit scenarios ship [--dir DIR]

Exit status: 0 success, 1 invalid input, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from importlib import resources
from pathlib import Path

from .engine import ConfigError, SimulationError, metrics, run
from .export import FORMATS, export_run, parse_formats
from .scenario import load_scenario

OUT_ENV = "VIPURSUIT_OUT_DIR"
BUNDLED = ("scenario1.toml", "scenario2.toml", "scenario3.toml")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def bundled_text(name: str) -> str:
    return resources.files("vipursuit.scenarios").joinpath(name).read_text(encoding="utf-8")


def _err(msg: str):
    print(f"vipursuit: {msg}", file=sys.stderr)


def _load(path: str):
    p = Path(path)
    if not p.is_file():
        raise ConfigError("scenario", f"no such file: {path}")
    return load_scenario(p)


def cmd_validate(args) -> int:
    cfg = _load(args.scenario)
    print(f"{args.scenario}: ok ({len(cfg.pursuers)} pursuers, {len(cfg.events)} events)")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load(args.scenario)
    fmts = parse_formats(args.formats)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed, learner=dataclasses.replace(cfg.learner, rng_seed=args.seed))
    out = args.out
    if out is None:
        base = os.environ.get(OUT_ENV, "runs")
        out = Path(base) / (cfg.name or Path(args.scenario).stem)
    record = run(cfg)
    try:
        files = export_run(record, fmts, out)
    except OSError as exc:
        _err(f"cannot write outputs: {exc}")
        return EXIT_RUNTIME
    m = metrics(record)
    for pid, info in m["pursuers"].items():
        ct = info["capture_time_s"]
        status = "no capture" if ct is None else f"captured at {ct / 60:.1f} min"
        print(f"{pid}: {status}, closest {info['min_distance_m'] / 1000:.3f} km")
    for f in files:
        print(f"wrote {f}")
    return EXIT_OK


def cmd_ship(args) -> int:
    out = Path(args.dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name in BUNDLED:
            p = out / name
            p.write_text(bundled_text(name), encoding="utf-8", newline="")
            print(f"wrote {p}")
    except OSError as exc:
        _err(f"cannot write scenarios: {exc}")
        return EXIT_RUNTIME
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vipursuit", description="Actor-critic pursuit-evasion simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a scenario and export the results")
    p.add_argument("scenario")
    p.add_argument("--out", help=f"output directory (default: ${OUT_ENV}/<name> or runs/<name>)")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--formats", default=",".join(FORMATS), help="comma separated subset of csv,kml,geojson")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="parse a scenario file and report problems")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("scenarios", help="bundled scenario files")
    ssub = p.add_subparsers(dest="action", required=True)
    s = ssub.add_parser("ship", help="write the three bundled scenarios")
    s.add_argument("--dir", default=".", help="destination directory")
    s.set_defaults(func=cmd_ship)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return args.func(args)
    except ConfigError as exc:
        _err(f"invalid scenario: {exc}")
        return EXIT_INVALID
    except SimulationError as exc:
        _err(f"simulation failed: {exc}")
        return EXIT_RUNTIME
    except OSError as exc:
        _err(str(exc))
        return EXIT_RUNTIME


cli_main = main

if __name__ == "__main__":
    sys.exit(main())
