"""Performance indicators and the benchmark tables and curves.

* Test time (TT), time saving (TS) and improvement against the crisp
  two-rule baseline, measured on plateau scenarios where dtemp is held nearly
  constant inside a band.
* Throughput per 12-hour day and energy per test for best and worst cases.
* Cumulative tests and energy-per-test time series.

Everything here is deterministic; CSV output is byte-stable for a given
configuration.
"""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .configfile import ConfigError, read_ini
from .plant import Plant, PlantParams, t_stab
from .runner import RunConfig, make_controller, run_single_charge

log = logging.getLogger(__name__)

__all__ = [
    "BASELINE",
    "BenchReport",
    "Indicators",
    "PlateauBand",
    "ScenarioDrift",
    "Table2Row",
    "Table3Row",
    "bench_table2",
    "bench_table3",
    "emit_fig19",
    "emit_fig20",
    "energy",
    "improvement_pct",
    "indicators",
    "load_plateaus",
    "pr_ratio",
    "throughput_and_energy",
]

BASELINE = "crisp-simple"
TABLE2_CONTROLLERS = ("crisp-simple", "crisp-refined", "fuzzy-triangular", "fuzzy-trapezoidal", "fuzzy-gaussian")
WORKDAY_MIN = 720.0
DEFAULT_SETUP = 15.0
DEFAULT_POWER = 2.5

TABLE2_HEADER = ("controller", "band_lo", "band_hi", "tt_min", "ts_min", "improvement_pct")
TABLE3_HEADER = ("controller", "case", "tt_min", "tests_12h", "kwh_per_test")
FIG19_HEADER = ("time_min", "controller", "case", "tests")
FIG20_HEADER = ("time_min", "kwh_per_test")


class ScenarioDrift(RuntimeError):
    """dtemp at timer start fell outside the band the scenario was built for."""


# -- indicator arithmetic -------------------------------------------------------

def improvement_pct(tt: float, tt_baseline: float) -> float:
    """Time saved as a percentage of the baseline test time."""
    if not tt_baseline > 0:
        raise ValueError(f"tt_baseline must be positive, got {tt_baseline}")
    return (tt_baseline - tt) / tt_baseline * 100.0


def pr_ratio(tt2: float, tt1: float) -> float:
    """Performance ratio ``tt2 / tt1`` of two test times."""
    if not tt1 > 0:
        raise ValueError(f"tt1 must be positive, got {tt1}")
    return tt2 / tt1


def energy(power_kw: float, hours: float) -> float:
    """kWh drawn at ``power_kw`` over ``hours``."""
    if power_kw < 0 or hours < 0:
        raise ValueError("power and time must be >= 0")
    return power_kw * hours


def tests_per_day(tt: float, setup: float = DEFAULT_SETUP, day_min: float = WORKDAY_MIN) -> int:
    period = tt + setup
    if not period > 0:
        raise ValueError("tt + setup must be positive")
    return math.floor(day_min / period + 1e-9)


def throughput_and_energy(tt: float, setup: float = DEFAULT_SETUP, power_kw: float = DEFAULT_POWER):
    """``(tests per 12 h, kWh per test)`` for one unit running back-to-back tests."""
    tests = tests_per_day(tt, setup)
    if tests == 0:
        return 0, math.inf
    return tests, energy(power_kw, WORKDAY_MIN / 60.0) / tests


@dataclass(frozen=True)
class Indicators:
    tt: float
    ts: float
    improvement_pct: float
    tph: float
    tpd: int
    energy_per_test: float
    power_p: float = DEFAULT_POWER


def indicators(tt: float, tt_baseline: float, setup: float = DEFAULT_SETUP,
               power_kw: float = DEFAULT_POWER) -> Indicators:
    tpd, e = throughput_and_energy(tt, setup, power_kw)
    return Indicators(
        tt=tt,
        ts=tt_baseline - tt,
        improvement_pct=improvement_pct(tt, tt_baseline),
        tph=60.0 / (tt + setup),
        tpd=tpd,
        energy_per_test=e,
        power_p=power_kw,
    )


# -- plateau scenarios ----------------------------------------------------------

@dataclass(frozen=True)
class PlateauBand:
    """A dtemp band and the probe values whose plateau plants test it."""

    lo: float
    hi: float
    probes: Tuple[float, ...]
    tau: float = 600.0


@dataclass(frozen=True)
class PlateauTable:
    bands: Tuple[PlateauBand, ...]
    charge: float = 110.0
    dtemp_span: float = 1.0
    scan_interval: float = 0.1

    def plant_for(self, band: PlateauBand, d0: float) -> PlantParams:
        """Plant whose dtemp equals ``d0`` the first time it can be measured.

        With gap ``G`` between start and stabilization temperature, dtemp at
        ``t = span`` is ``G * (1 - exp(-span / tau))``; a long ``tau`` then
        keeps it close to ``d0`` for the whole test.
        """
        base = PlantParams()
        gap = d0 / (1.0 - math.exp(-self.dtemp_span / band.tau))
        t0 = t_stab(base, self.charge) + gap
        return PlantParams(t_ambient=max(base.t_ambient, t0), t_initial=t0, q_opt=base.q_opt,
                           t_opt=base.t_opt, curvature_k=base.curvature_k, tau=band.tau,
                           scan_interval=self.scan_interval)


def load_plateaus(path=None) -> PlateauTable:
    """Read the plateau tuning table (defaults to the packaged one)."""
    path = Path(path) if path else Path(str(resources.files("fuzzycharge") / "data" / "plateaus.ini"))
    cp = read_ini(path)
    try:
        sec = cp["plateau"] if cp.has_section("plateau") else {}
        charge = float(sec.get("charge", 110.0))
        span = float(sec.get("dtemp_span", 1.0))
        scan = float(sec.get("scan_interval", 0.1))
        bands = []
        for name in sorted((s for s in cp.sections() if s.startswith("band.")), key=lambda s: int(s[5:])):
            b = cp[name]
            bands.append(PlateauBand(float(b["lo"]), float(b["hi"]),
                                     tuple(float(v) for v in b["probes"].split(",")),
                                     float(b.get("tau", 600.0))))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{path}: bad plateau table: {exc}") from exc
    if not bands:
        raise ConfigError(f"{path}: no [band.N] sections")
    return PlateauTable(tuple(bands), charge, span, scan)


# -- table2 ---------------------------------------------------------------------

@dataclass(frozen=True)
class Table2Row:
    controller: str
    band_lo: float
    band_hi: float
    probe: float
    tt: float
    ts: float
    improvement_pct: float


@dataclass(frozen=True)
class BenchReport:
    rows: Tuple[Table2Row, ...]

    def cell(self, controller: str, band_lo: float) -> List[Table2Row]:
        return [r for r in self.rows if r.controller == controller and r.band_lo == band_lo]

    def tt_range(self, controller: str) -> Tuple[float, float]:
        tts = [r.tt for r in self.rows if r.controller == controller]
        return min(tts), max(tts)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TABLE2_HEADER)
            for r in self.rows:
                w.writerow((r.controller, f"{r.band_lo:g}", f"{r.band_hi:g}", f"{r.tt:.1f}",
                            f"{r.ts:.1f}", f"{r.improvement_pct:.1f}"))


def measure_plateau(controller, table: PlateauTable, band: PlateauBand, d0: float) -> float:
    """Observation time until Stop on a plateau plant.

    Raises:
        ScenarioDrift: if dtemp at timer start is outside the band.
    """
    params = table.plant_for(band, d0)
    plant = Plant(params, table.charge)
    cfg = RunConfig(controller=controller.name, dtemp_span=table.dtemp_span)
    rec = run_single_charge(plant, controller, cfg)
    if not band.lo - 1e-9 <= rec.start_dtemp <= band.hi + 1e-9:
        raise ScenarioDrift(f"{controller.name}: dtemp {rec.start_dtemp:.4f} at timer start left "
                            f"[{band.lo}, {band.hi}] (probe {d0})")
    return rec.observation_time


def bench_table2(controllers: Optional[Dict[str, object]] = None, table: Optional[PlateauTable] = None,
                 workers: int = 1) -> BenchReport:
    """Test time per (controller, band, probe) with TS and improvement vs the baseline.

    Args:
        controllers: ``name -> Controller``; defaults to the shipped five.
        workers: Threads used to run cells; the result does not depend on it.
    """
    table = table or load_plateaus()
    controllers = controllers or {n: make_controller(n) for n in TABLE2_CONTROLLERS}
    if BASELINE not in controllers:
        controllers = {BASELINE: make_controller(BASELINE), **controllers}
    cells = [(name, band, d0) for name in controllers for band in table.bands for d0 in band.probes]

    def run(cell):
        name, band, d0 = cell
        return measure_plateau(controllers[name], table, band, d0)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            tts = list(pool.map(run, cells))
    else:
        tts = [run(c) for c in cells]
    measured = {(n, b.lo, d0): tt for (n, b, d0), tt in zip(cells, tts)}
    rows = []
    for (name, band, d0), tt in zip(cells, tts):
        base = measured[(BASELINE, band.lo, d0)]
        rows.append(Table2Row(name, band.lo, band.hi, d0, tt, base - tt, improvement_pct(tt, base)))
        log.debug("%s [%g, %g] d=%g: TT %.1f", name, band.lo, band.hi, d0, tt)
    return BenchReport(tuple(rows))


# -- table3 and the time series ------------------------------------------------

@dataclass(frozen=True)
class Table3Row:
    controller: str
    case: str
    tt: float
    tests_12h: int
    kwh_per_test: float


def bench_table3(report: Optional[BenchReport] = None, controllers: Sequence[str] = ("crisp-refined", "fuzzy-trapezoidal"),
                 setup: float = DEFAULT_SETUP, power_kw: float = DEFAULT_POWER) -> List[Table3Row]:
    """Best and worst measured TT per controller, turned into daily throughput and energy."""
    report = report or bench_table2()
    rows = []
    for name in controllers:
        best, worst = report.tt_range(name)
        for case, tt in (("best", best), ("worst", worst)):
            tests, e = throughput_and_energy(tt, setup, power_kw)
            rows.append(Table3Row(name, case, tt, tests, e))
    return rows


def write_table3_csv(rows: Iterable[Table3Row], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE3_HEADER)
        for r in rows:
            w.writerow((r.controller, r.case, f"{r.tt:.1f}", r.tests_12h, f"{r.kwh_per_test:.3f}"))


def cumulative_tests(t: float, tt: float, setup: float = DEFAULT_SETUP) -> int:
    return math.floor(t / (tt + setup) + 1e-9)


def emit_fig19(rows: Iterable[Table3Row], path=None, setup: float = DEFAULT_SETUP,
               step: float = 1.0, horizon: float = WORKDAY_MIN) -> List[tuple]:
    """Cumulative completed tests on a ``step``-minute grid for each table-3 case."""
    n = int(round(horizon / step))
    out = []
    for r in rows:
        for k in range(n + 1):
            t = round(k * step, 9)
            out.append((t, r.controller, r.case, cumulative_tests(t, r.tt, setup)))
    if path is not None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(FIG19_HEADER)
            w.writerows((f"{t:g}", c, case, k) for t, c, case, k in out)
    return out


def emit_fig20(tt: float, path=None, setup: float = DEFAULT_SETUP, power_kw: float = DEFAULT_POWER,
               horizon: float = WORKDAY_MIN) -> List[tuple]:
    """Energy per completed test, one row per test completion.

    The unit draws ``power_kw`` continuously, so after ``k`` tests at time
    ``t`` the energy per test is ``P * t / 60 / k``. Nothing is emitted
    before the first test completes.
    """
    period = tt + setup
    out = []
    k = 1
    while k * period <= horizon + 1e-9:
        t = round(k * period, 9)
        out.append((t, energy(power_kw, t / 60.0) / k))
        k += 1
    if path is not None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(FIG20_HEADER)
            w.writerows((f"{t:g}", f"{e:.4f}") for t, e in out)
    return out
