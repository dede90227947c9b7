"""The charging procedure: scan, gate on the timer, decide, record, add charge.

One *test* covers a single charge level. The scanner samples the plant every
``scan_interval`` minutes, ``dtemp`` is formed over a trailing span, and the
observation clock starts when the timer condition first holds. From then on
every scan feeds ``(dtemp, observation minutes)`` to the stop decision. A
full procedure repeats tests at increasing charge until the minimum
temperature has clearly turned upward, then recommends the coldest charge.

Units in a bank are independent and may run in threads or processes; every
unit owns its plant and noise generator, so results do not depend on the
execution mode.
"""
from __future__ import annotations

import csv
import logging
import statistics
from collections import deque
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from .controllers import (
    MainControllerConfig,
    MfFamily,
    TimerControllerConfig,
    build_main_controller,
    build_timer_controller,
    main_decide,
    timer_decide,
)
from .crisp import TIMER_START_BELOW, crisp_refined_decide, crisp_simple_decide
from .decisions import Decision, TimerDecision
from .plant import InsufficientWindow, Plant, PlantParams, Sample, dtemp

log = logging.getLogger(__name__)

__all__ = [
    "CONTROLLER_NAMES",
    "Controller",
    "RunConfig",
    "RunReport",
    "StopReason",
    "TestRecord",
    "TimerNeverStarted",
    "UnitOutcome",
    "detect_optimum",
    "make_controller",
    "run_bank",
    "run_full_procedure",
    "run_single_charge",
    "write_samples_csv",
    "write_tests_csv",
]

CONTROLLER_NAMES = ("crisp-simple", "crisp-refined", "fuzzy-triangular", "fuzzy-trapezoidal", "fuzzy-gaussian")
MAX_UNITS = 8

SAMPLE_HEADER = ("unit", "charge_g", "time_min", "temp_c", "dtemp_c", "timer_started", "output", "decision")
TEST_HEADER = ("unit", "charge_g", "min_temp_c", "tt_min", "stop_reason")


class TimerNeverStarted(RuntimeError):
    """dtemp never fell far enough for the observation clock to start."""


class StopReason(str, Enum):
    CONTROLLER_STOP = "ControllerStop"
    MAX_TIME_REACHED = "MaxTimeReached"


def _num(x: float) -> str:
    # shortest text that reads back to the same float, so logs replay exactly
    return repr(float(x))


@dataclass(frozen=True)
class Controller:
    """A named stop controller plus the timer rule that gates it.

    Crisp controllers start the clock once ``dtemp < 0.5``; fuzzy ones ask the
    timer controller built from the same ``dtemp`` terms.
    """

    name: str
    main: Optional[MainControllerConfig] = None
    timer: Optional[TimerControllerConfig] = None

    def __post_init__(self):
        if self.name not in CONTROLLER_NAMES:
            raise ValueError(f"unknown controller {self.name!r}; choose from {', '.join(CONTROLLER_NAMES)}")
        if self.is_fuzzy and (self.main is None or self.timer is None):
            raise ValueError(f"{self.name} needs main and timer configs")

    @property
    def is_fuzzy(self) -> bool:
        return self.name.startswith("fuzzy-")

    def timer_starts(self, d: float) -> bool:
        if self.is_fuzzy:
            return timer_decide(self.timer, d)[1] is TimerDecision.START
        return d < TIMER_START_BELOW

    def decide(self, d: float, obs_time: float) -> Tuple[Optional[float], Decision]:
        """``(output, decision)``; output is None for the crisp controllers."""
        if self.is_fuzzy:
            return main_decide(self.main, d, obs_time)
        if self.name == "crisp-simple":
            return None, crisp_simple_decide(d, obs_time)
        return None, crisp_refined_decide(d, obs_time)


def make_controller(name: str, main: Optional[MainControllerConfig] = None,
                    timer: Optional[TimerControllerConfig] = None) -> Controller:
    """Build a controller by name, loading the shipped configs for fuzzy ones."""
    if name.startswith("fuzzy-"):
        family = MfFamily.parse(name[len("fuzzy-"):])
        if main is None:
            main, _ = build_main_controller(family)
        if timer is None:
            timer, _ = build_timer_controller(family)
    return Controller(name, main, timer)


@dataclass(frozen=True)
class RunConfig:
    controller: str = "fuzzy-triangular"
    initial_charge: float = 60.0
    increment: float = 10.0
    max_charge: float = 160.0
    setup_time: float = 15.0
    max_test_time: float = 40.0
    optimum_patience: int = 2
    dtemp_span: float = 1.0
    median_filter: bool = False

    def __post_init__(self):
        if self.controller not in CONTROLLER_NAMES:
            raise ValueError(f"unknown controller {self.controller!r}")
        if not self.increment > 0:
            raise ValueError(f"increment must be positive, got {self.increment}")
        if not self.initial_charge < self.max_charge:
            raise ValueError("initial_charge must be below max_charge")
        if self.initial_charge < 0:
            raise ValueError("initial_charge must be >= 0")
        if not self.max_test_time > 0 or self.setup_time < 0:
            raise ValueError("max_test_time must be positive and setup_time >= 0")
        if self.optimum_patience < 1:
            raise ValueError("optimum_patience must be >= 1")
        if not self.dtemp_span > 0:
            raise ValueError("dtemp_span must be positive")


@dataclass(frozen=True)
class TestRecord:
    """One completed test at a single charge level.

    Times are minutes measured from the moment the charge was applied.
    """

    charge_q: float
    min_temp: float
    test_time_TT: float
    timer_start: float
    stop_reason: StopReason
    start_dtemp: float = float("nan")
    stop_dtemp: float = float("nan")

    __test__ = False  # keep pytest from collecting this class

    @property
    def observation_time(self) -> float:
        """Minutes between the timer start and the end of the test."""
        return round(self.test_time_TT - self.timer_start, 9)


@dataclass(frozen=True)
class RunReport:
    records: tuple
    recommended_charge: float
    unit: int = 0
    samples: tuple = field(default=(), repr=False)

    @property
    def chart(self) -> list:
        """``(charge, min_temp)`` pairs in test order."""
        return [(r.charge_q, r.min_temp) for r in self.records]

    def summary(self) -> str:
        lines = [f"unit {self.unit}: {len(self.records)} tests, recommended charge {self.recommended_charge:g} g"]
        for r in self.records:
            lines.append(
                f"  {r.charge_q:7.1f} g  min {r.min_temp:8.3f} C  TT {r.test_time_TT:6.1f} min"
                f"  (timer at {r.timer_start:.1f})  {r.stop_reason.value}"
            )
        return "\n".join(lines)


def _trailing_median(values: Sequence[float], n: int = 5) -> List[float]:
    return [statistics.median(values[max(0, i - n + 1): i + 1]) for i in range(len(values))]


def run_single_charge(plant: Plant, controller: Controller, cfg: RunConfig, unit: int = 0,
                      sample_log: Optional[list] = None) -> TestRecord:
    """Run one test on the plant's current charge level.

    Raises:
        TimerNeverStarted: if the clock has not started after ten times
            ``max_test_time``.
    """
    t0 = plant.time
    q = plant.charge_q
    window = deque([Sample(t0, plant.temperature_now())])
    temps = []
    timer_at = None
    start_d = float("nan")
    cap = 10 * cfg.max_test_time
    keep = cfg.dtemp_span + 2 * plant.params.scan_interval

    def record(s, d, started, out, dec):
        if sample_log is not None:
            sample_log.append((
                str(unit), _num(q), _num(s.time), _num(s.temp),
                "" if d is None else _num(d), "1" if started else "0",
                "" if out is None else _num(out), dec,
            ))

    while True:
        s = plant.scan()
        window.append(s)
        while window[1].time <= s.time - keep:
            window.popleft()
        temps.append(s.temp)
        elapsed = round(s.time - t0, 9)
        try:
            d = dtemp(window, cfg.dtemp_span)
        except InsufficientWindow:
            d = None
        if timer_at is None:
            if d is not None and controller.timer_starts(d):
                timer_at = s.time
                start_d = d
                log.debug("unit %d q=%g: timer started at +%.1f min (dtemp %.3f)", unit, q, elapsed, d)
            else:
                record(s, d, False, None, "WAIT")
                if elapsed >= cap:
                    raise TimerNeverStarted(f"unit {unit}, charge {q:g} g: no timer start within {cap:g} min")
                continue
        obs = round(s.time - timer_at, 9)
        out, dec = controller.decide(d, obs)
        record(s, d, True, out, dec.value)
        if dec is Decision.STOP:
            reason = StopReason.CONTROLLER_STOP
            break
        if obs >= cfg.max_test_time:
            reason = StopReason.MAX_TIME_REACHED
            break

    series = _trailing_median(temps) if cfg.median_filter else temps
    return TestRecord(
        charge_q=q,
        min_temp=min(series),
        test_time_TT=round(s.time - t0, 9),
        timer_start=round(timer_at - t0, 9),
        stop_reason=reason,
        start_dtemp=start_d,
        stop_dtemp=d,
    )


def detect_optimum(records: Sequence[TestRecord], patience: int) -> Optional[float]:
    """Charge of the coldest record once ``patience`` strict rises follow it.

    Returns None while the bowl has not visibly turned upward yet.
    """
    if not records:
        raise ValueError("no records")
    temps = [r.min_temp for r in records]
    i = min(range(len(temps)), key=temps.__getitem__)
    tail = temps[i: i + patience + 1]
    if len(tail) < patience + 1:
        return None
    if all(b > a for a, b in zip(tail, tail[1:])):
        return records[i].charge_q
    return None


def run_full_procedure(plant_params: PlantParams, cfg: RunConfig, controller: Optional[Controller] = None,
                       unit: int = 0, log_samples: bool = False) -> RunReport:
    """Test at increasing charge levels and recommend the coldest one."""
    controller = controller or make_controller(cfg.controller)
    plant = Plant(plant_params, cfg.initial_charge)
    samples: Optional[list] = [] if log_samples else None
    records: List[TestRecord] = []
    best = None
    while True:
        records.append(run_single_charge(plant, controller, cfg, unit, samples))
        best = detect_optimum(records, cfg.optimum_patience)
        if best is not None:
            break
        if plant.charge_q + cfg.increment > cfg.max_charge + 1e-9:
            break
        plant.add_charge(cfg.increment)
    if best is None:
        best = min(records, key=lambda r: r.min_temp).charge_q
    log.info("unit %d: %d tests, recommended %g g", unit, len(records), best)
    return RunReport(tuple(records), best, unit, tuple(samples or ()))


@dataclass(frozen=True)
class UnitOutcome:
    unit: int
    report: Optional[RunReport] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _run_unit(args) -> UnitOutcome:
    unit, params, cfg, controller, log_samples = args
    try:
        report = run_full_procedure(params, cfg, controller, unit, log_samples)
    except Exception as exc:  # reported per unit, the bank keeps going
        log.warning("unit %d failed: %s", unit, exc)
        return UnitOutcome(unit, None, f"{type(exc).__name__}: {exc}")
    return UnitOutcome(unit, report)


def run_bank(unit_scenarios: Sequence[PlantParams], cfg: RunConfig, controller: Optional[Controller] = None,
             mode: str = "sequential", workers: Optional[int] = None, log_samples: bool = True,
             max_units: int = MAX_UNITS) -> List[UnitOutcome]:
    """Run several independent units; outcomes come back in unit order.

    Args:
        mode: ``"sequential"``, ``"thread"`` or ``"process"``.
        workers: Pool size for the concurrent modes (default: one per unit).
    """
    n = len(unit_scenarios)
    if not 1 <= n <= max_units:
        raise ValueError(f"a bank holds 1..{max_units} units, got {n}")
    controller = controller or make_controller(cfg.controller)
    jobs = [(i + 1, p, cfg, controller, log_samples) for i, p in enumerate(unit_scenarios)]
    if mode == "sequential":
        return [_run_unit(j) for j in jobs]
    if mode == "thread":
        pool = ThreadPoolExecutor(max_workers=workers or n)
    elif mode == "process":
        pool = ProcessPoolExecutor(max_workers=workers or n)
    else:
        raise ValueError(f"unknown bank mode {mode!r}")
    with pool:
        return list(pool.map(_run_unit, jobs))


def _reports(items):
    for it in items:
        rep = it.report if isinstance(it, UnitOutcome) else it
        if rep is not None:
            yield rep


def write_samples_csv(items, path) -> None:
    """Per-sample log for a list of :class:`RunReport` or :class:`UnitOutcome`."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SAMPLE_HEADER)
        for rep in _reports(items):
            w.writerows(rep.samples)


def write_tests_csv(items, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TEST_HEADER)
        for rep in _reports(items):
            for r in rep.records:
                w.writerow((rep.unit, _num(r.charge_q), _num(r.min_temp), _num(r.test_time_TT), r.stop_reason.value))
