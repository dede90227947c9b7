"""Command-line entry point: ``fuzzycharge <command> ...``.

Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 config error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .bench import (
    bench_table2,
    bench_table3,
    emit_fig19,
    emit_fig20,
    load_plateaus,
    write_table3_csv,
)
from .calibration import CalibrationFailed, calibrate
from .configfile import ConfigError, dump_controller, load_controller, load_packaged, load_scenario
from .controllers import MfFamily, TimerControllerConfig, main_decide, surface
from .fuzzy import FuzzyError
from .runner import CONTROLLER_NAMES, make_controller, run_bank, write_samples_csv, write_tests_csv

log = logging.getLogger("fuzzycharge")

EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3


def _load_any_controller(name: str):
    """A controller config path, or the name of a shipped family."""
    path = Path(name)
    if path.is_file():
        return load_controller(path)
    try:
        family = MfFamily.parse(name)
    except ValueError:
        raise ConfigError(f"{name}: not a config file or a known family") from None
    return load_packaged(family)


def cmd_infer(args) -> int:
    main, _ = _load_any_controller(args.config)
    out, dec = main_decide(main, args.dtemp, args.time)
    print(f"output={out:.3f} decision={dec.value}")
    return 0


def _grid(lo, hi, step):
    n = int(round((hi - lo) / step))
    return [round(lo + k * step, 9) for k in range(n + 1)]


def cmd_surface(args) -> int:
    main, _ = _load_any_controller(args.config)
    ds = _grid(0.0, args.dtemp_max, args.dtemp_step)
    ts = _grid(0.0, 40.0, args.time_step)
    grid = surface(main, ds, ts)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("dtemp_c", "time_min", "output"))
        for i, d in enumerate(ds):
            for j, t in enumerate(ts):
                w.writerow((f"{d:g}", f"{t:g}", f"{grid[i, j]:.6f}"))
    log.info("wrote %d x %d surface to %s", len(ds), len(ts), args.out)
    return 0


def cmd_run(args) -> int:
    units, run_cfg = load_scenario(args.scenario)
    name = args.controller or run_cfg.controller
    if args.controller:
        run_cfg = replace(run_cfg, controller=name)
    main = timer = None
    if args.controller_config:
        main, timer = load_controller(args.controller_config)
    controller = make_controller(name, main, timer)
    outcomes = run_bank(units, run_cfg, controller, mode=args.mode, log_samples=True)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_samples_csv(outcomes, out / "samples.csv")
    write_tests_csv(outcomes, out / "tests.csv")
    lines = [f"controller {name}, {len(units)} unit(s)"]
    failed = 0
    for o in outcomes:
        if o.ok:
            lines.append(o.report.summary())
        else:
            failed += 1
            lines.append(f"unit {o.unit}: FAILED {o.error}")
    text = "\n".join(lines) + "\n"
    (out / "report.txt").write_text(text)
    print(text, end="")
    return EXIT_RUNTIME if failed else 0


def cmd_bench(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table = load_plateaus(args.plateaus) if args.plateaus else None
    if args.which == "fig20":
        # the fig20 curve only needs the trapezoidal best case
        report = bench_table2(table=table, workers=args.workers)
        best = min(r.tt for r in report.rows if r.controller == "fuzzy-trapezoidal")
        emit_fig20(best, out / "fig20.csv", setup=args.setup, power_kw=args.power)
        print(f"wrote {out / 'fig20.csv'}")
        return 0
    report = bench_table2(table=table, workers=args.workers)
    if args.which == "table2":
        report.write_csv(out / "table2.csv")
        print(f"wrote {out / 'table2.csv'}")
        return 0
    rows = bench_table3(report, setup=args.setup, power_kw=args.power)
    if args.which == "table3":
        write_table3_csv(rows, out / "table3.csv")
        for r in rows:
            print(f"{r.controller:18s} {r.case:5s} TT {r.tt:5.1f} min  {r.tests_12h:3d} tests/12h  "
                  f"{r.kwh_per_test:.3f} kWh/test")
        return 0
    emit_fig19(rows, out / "fig19.csv", setup=args.setup)
    print(f"wrote {out / 'fig19.csv'}")
    return 0


def cmd_calibrate(args) -> int:
    main = calibrate(args.family, passes=args.passes)
    dump_controller(main, TimerControllerConfig(main.dtemp), args.out,
                    header=f"Calibrated {main.family.value} controller, written by: fuzzycharge calibrate {main.family.value}")
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fuzzycharge", description="Fuzzy stop controllers for refrigerant charging.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("infer", help="evaluate the main controller at one point")
    s.add_argument("config", help="controller config file or family name")
    s.add_argument("--dtemp", type=float, required=True, help="degC")
    s.add_argument("--time", type=float, required=True, help="minutes since timer start")
    s.set_defaults(func=cmd_infer)

    s = sub.add_parser("surface", help="write the main controller output surface as CSV")
    s.add_argument("config")
    s.add_argument("--out", required=True)
    s.add_argument("--dtemp-step", type=float, default=0.01)
    s.add_argument("--dtemp-max", type=float, default=1.0)
    s.add_argument("--time-step", type=float, default=0.5)
    s.set_defaults(func=cmd_surface)

    s = sub.add_parser("run", help="run the full charging procedure on a scenario")
    s.add_argument("scenario", help="scenario config file")
    s.add_argument("controller", nargs="?", choices=CONTROLLER_NAMES,
                   help="overrides [run] controller in the scenario")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--controller-config", help="use this controller config instead of the shipped one")
    s.add_argument("--mode", choices=("sequential", "thread", "process"), default="sequential")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("bench", help="reproduce a benchmark table or curve")
    s.add_argument("which", choices=("table2", "table3", "fig19", "fig20"))
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--plateaus", help="plateau table (default: packaged)")
    s.add_argument("--setup", type=float, default=15.0, help="setup minutes per test")
    s.add_argument("--power", type=float, default=2.5, help="unit power, kW")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("calibrate", help="calibrate a membership-function family")
    s.add_argument("family", choices=[f.value for f in MfFamily])
    s.add_argument("--out", required=True)
    s.add_argument("--passes", type=int, default=8)
    s.set_defaults(func=cmd_calibrate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"fuzzycharge: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CalibrationFailed, FuzzyError, RuntimeError, ValueError, OSError) as exc:
        print(f"fuzzycharge: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
