"""Fuzzy main and timer controllers for the charging stop decision.

The main controller has two inputs, ``dtemp`` (degC, 0..5) and ``time``
(minutes since the timer started, 0..40), and a 4 x 5 rule grid whose
consequents are the singletons Stop = 0 and Continue = 1. The timer controller
shares the ``dtemp`` terms and decides when the observation clock starts.

Three membership-function families ship as calibrated configuration files in
``fuzzycharge/data``; see :mod:`fuzzycharge.calibration` for how they are made.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Sequence

import numpy as np

from . import kernels
from .decisions import Decision, TimerDecision
from .fuzzy import (
    LinguisticVariable,
    Rule,
    RuleBase,
    Singleton,
    defuzzify_weighted_average,
)

__all__ = [
    "DTEMP_TERMS",
    "MAIN_RULES",
    "TIMER_RULES",
    "TIME_TERMS",
    "MainControllerConfig",
    "MfFamily",
    "TimerControllerConfig",
    "build_main_controller",
    "build_timer_controller",
    "main_decide",
    "main_rulebase",
    "stop_time",
    "stop_times",
    "surface",
    "timer_boundary",
    "timer_decide",
    "timer_rulebase",
]

DTEMP_RANGE = (0.0, 5.0)
TIME_RANGE = (0.0, 40.0)

DTEMP_TERMS = ("very_small", "small", "medium", "large")
TIME_TERMS = ("very_early", "early", "right", "late", "very_late")

# rows: DTEMP_TERMS, columns: TIME_TERMS
MAIN_RULES = (
    ("continue", "stop", "stop", "stop", "stop"),
    ("continue", "continue", "stop", "stop", "stop"),
    ("continue", "continue", "continue", "stop", "stop"),
    ("continue", "continue", "continue", "continue", "continue"),
)
TIMER_RULES = ("start", "start", "start", "stop")

MAIN_OUTPUT = LinguisticVariable("output", 0.0, 1.0, (("stop", Singleton(0.0)), ("continue", Singleton(1.0))))
TIMER_OUTPUT = LinguisticVariable("output", 0.0, 1.0, (("stop", Singleton(0.0)), ("start", Singleton(1.0))))


class MfFamily(str, Enum):
    TRIANGULAR_MIX = "triangular"
    TRAPEZOIDAL = "trapezoidal"
    GAUSSIAN = "gaussian"

    @classmethod
    def parse(cls, value) -> "MfFamily":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"triangular_mix": "triangular", "trapezoid": "trapezoidal", "gauss": "gaussian"}
        return cls(aliases.get(key, key))


def main_rulebase(dtemp: LinguisticVariable, time: LinguisticVariable, rules=MAIN_RULES) -> RuleBase:
    out_idx = {n: i for i, n in enumerate(MAIN_OUTPUT.term_names)}
    grid = []
    for i, row in enumerate(rules):
        for j, cons in enumerate(row):
            grid.append(Rule(((0, i), (1, j)), out_idx[cons]))
    return RuleBase((dtemp, time), MAIN_OUTPUT, grid)


def timer_rulebase(dtemp: LinguisticVariable, rules=TIMER_RULES) -> RuleBase:
    out_idx = {n: i for i, n in enumerate(TIMER_OUTPUT.term_names)}
    return RuleBase((dtemp,), TIMER_OUTPUT, [Rule(((0, i),), out_idx[c]) for i, c in enumerate(rules)])


def _check_variable(var: LinguisticVariable, names, rng) -> None:
    if var.term_names != tuple(names):
        raise ValueError(f"{var.name}: expected terms {names}, got {var.term_names}")
    if (var.lo, var.hi) != rng:
        raise ValueError(f"{var.name}: expected range {rng}, got ({var.lo}, {var.hi})")


def _peak(mf) -> float:
    p = mf.params
    if mf.kind == "trapezoidal":
        return 0.5 * (p[1] + p[2])
    if mf.kind == "triangular":
        return p[1]
    return p[0]


def _check_coverage(var: LinguisticVariable, step: float) -> None:
    n = int(round((var.hi - var.lo) / step))
    for k in range(n + 1):
        x = var.lo + k * step
        if max(var.grades(x)) <= 0.0:
            raise ValueError(f"{var.name}: no term covers {x:g}")


@dataclass(frozen=True)
class MainControllerConfig:
    """Membership functions and threshold for the main (stop/continue) controller.

    Raises ``ValueError`` if term names or ranges deviate from the fixed
    layout, peaks are out of order, or a sampled point has no covering term.
    """

    family: MfFamily
    dtemp: LinguisticVariable
    time: LinguisticVariable
    decision_threshold: float = 0.5
    rules: tuple = MAIN_RULES

    def __post_init__(self):
        object.__setattr__(self, "family", MfFamily.parse(self.family))
        object.__setattr__(self, "rules", tuple(tuple(r) for r in self.rules))
        if len(self.rules) != len(DTEMP_TERMS) or any(len(r) != len(TIME_TERMS) for r in self.rules):
            raise ValueError("main rule grid must be 4 x 5")
        _check_variable(self.dtemp, DTEMP_TERMS, DTEMP_RANGE)
        _check_variable(self.time, TIME_TERMS, TIME_RANGE)
        if not 0.0 < self.decision_threshold < 1.0:
            raise ValueError(f"decision_threshold must be in (0, 1), got {self.decision_threshold}")
        for var in (self.dtemp, self.time):
            peaks = [_peak(mf) for _, mf in var.terms]
            if any(a >= b for a, b in zip(peaks, peaks[1:])):
                raise ValueError(f"{var.name}: term peaks not increasing: {peaks}")
        _check_coverage(self.dtemp, 0.005)
        _check_coverage(self.time, 0.05)

    @property
    def mf_params(self) -> dict:
        """``{(variable, term): (kind, params)}`` for all nine input terms."""
        out = {}
        for var in (self.dtemp, self.time):
            for name, mf in var.terms:
                out[(var.name, name)] = (mf.kind, mf.params)
        return out

    def __getstate__(self):
        return {k: v for k, v in self.__dict__.items() if k != "rulebase"}

    @cached_property
    def rulebase(self) -> RuleBase:
        return main_rulebase(self.dtemp, self.time, self.rules)


@dataclass(frozen=True)
class TimerControllerConfig:
    dtemp: LinguisticVariable
    start_threshold: float = 0.5
    rules: tuple = TIMER_RULES

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        _check_variable(self.dtemp, DTEMP_TERMS, DTEMP_RANGE)
        if len(self.rules) != len(DTEMP_TERMS):
            raise ValueError("timer needs one rule per dtemp term")
        if not 0.0 < self.start_threshold < 1.0:
            raise ValueError(f"start_threshold must be in (0, 1), got {self.start_threshold}")

    def __getstate__(self):
        return {k: v for k, v in self.__dict__.items() if k != "rulebase"}

    @cached_property
    def rulebase(self) -> RuleBase:
        return timer_rulebase(self.dtemp, self.rules)


def build_main_controller(family=MfFamily.TRIANGULAR_MIX):
    """Return ``(config, rulebase)`` for a shipped, calibrated family."""
    from .configfile import load_packaged

    main, _ = load_packaged(MfFamily.parse(family))
    return main, main.rulebase


def build_timer_controller(family=MfFamily.TRIANGULAR_MIX):
    from .configfile import load_packaged

    _, timer = load_packaged(MfFamily.parse(family))
    return timer, timer.rulebase


def main_decide(cfg: MainControllerConfig, dtemp: float, timer_time: float):
    """``(output, decision)``; Stop when the output is at or below the threshold."""
    out = defuzzify_weighted_average(cfg.rulebase, (dtemp, timer_time))
    return out, (Decision.STOP if out <= cfg.decision_threshold else Decision.CONTINUE)


def timer_decide(cfg: TimerControllerConfig, dtemp: float):
    out = defuzzify_weighted_average(cfg.rulebase, (dtemp,))
    return out, (TimerDecision.START if out >= cfg.start_threshold else TimerDecision.STOP)


def surface(cfg: MainControllerConfig, dtemp_grid: Sequence[float], time_grid: Sequence[float]) -> np.ndarray:
    """Defuzzified main output, shape ``(len(dtemp_grid), len(time_grid))``."""
    return np.array(kernels.surface(cfg.rulebase.packed, list(dtemp_grid), list(time_grid)), dtype=float)


def time_grid(scan_interval: float = 0.1, max_time: float = TIME_RANGE[1]) -> list:
    n = int(round(max_time / scan_interval))
    return [round(k * scan_interval, 9) for k in range(n + 1)]


def stop_times(cfg: MainControllerConfig, dtemps: Sequence[float], scan_interval: float = 0.1,
               max_time: float = TIME_RANGE[1]) -> list:
    """Stop time at each constant ``dtemp``, sampling the clock every ``scan_interval``.

    ``None`` marks a dtemp at which the controller never stops within
    ``max_time``; ``math.nan`` marks an all-zero firing.
    """
    times = time_grid(scan_interval, max_time)
    idx = kernels.stop_indices(cfg.rulebase.packed, list(dtemps), times, cfg.decision_threshold)
    return [times[i] if i >= 0 else (None if i == -1 else math.nan) for i in idx]


def stop_time(cfg: MainControllerConfig, dtemp: float, scan_interval: float = 0.1,
              max_time: float = TIME_RANGE[1]):
    return stop_times(cfg, [dtemp], scan_interval, max_time)[0]


def timer_boundary(cfg: TimerControllerConfig, step: float = 0.001) -> float:
    """Smallest dtemp on a ``step`` grid at which the timer says Stop."""
    n = int(round(DTEMP_RANGE[1] / step))
    for k in range(n + 1):
        d = round(k * step, 9)
        if timer_decide(cfg, d)[1] is TimerDecision.STOP:
            return d
    return math.inf
