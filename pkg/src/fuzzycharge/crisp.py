"""Interval-rule (crisp) stop/continue controllers.

``obs_time`` is the elapsed time in minutes since the timer started, i.e.
since ``dtemp`` first fell below 0.5 degC. All intervals are half-open
``[lo, hi)``.
"""
from __future__ import annotations

import math

from .decisions import Decision

__all__ = [
    "DTEMP_BANDS",
    "SIXTEEN_RULES",
    "TIME_BANDS",
    "TIMER_START_BELOW",
    "crisp_refined_decide",
    "crisp_simple_decide",
    "crisp_sixteen_decide",
]

C, S = Decision.CONTINUE, Decision.STOP

TIMER_START_BELOW = 0.5

DTEMP_BANDS = ((0.0, 0.25), (0.25, 0.35), (0.35, 0.5), (0.5, math.inf))
TIME_BANDS = ((0.0, 20.0), (20.0, 25.0), (25.0, 30.0), (30.0, math.inf))

# rows follow DTEMP_BANDS, columns TIME_BANDS
SIXTEEN_RULES = (
    (C, S, S, S),
    (C, C, S, S),
    (C, C, C, S),
    (C, C, C, C),
)


def _check(dtemp: float, obs_time: float) -> None:
    if dtemp < 0 or obs_time < 0:
        raise ValueError(f"dtemp and obs_time must be >= 0, got ({dtemp}, {obs_time})")


def _band(bands, x: float) -> int:
    for i, (lo, hi) in enumerate(bands):
        if lo <= x < hi:
            return i
    raise ValueError(f"{x} outside every band")


def crisp_simple_decide(dtemp: float, obs_time: float) -> Decision:
    """Two-interval rule: stop once dtemp < 0.5 has held for 30 minutes."""
    _check(dtemp, obs_time)
    if dtemp < 0.5 and obs_time >= 30.0:
        return Decision.STOP
    return Decision.CONTINUE


def crisp_sixteen_decide(dtemp: float, obs_time: float) -> Decision:
    _check(dtemp, obs_time)
    return SIXTEEN_RULES[_band(DTEMP_BANDS, dtemp)][_band(TIME_BANDS, obs_time)]


def crisp_refined_decide(dtemp: float, obs_time: float) -> Decision:
    """The six STOP cells of the sixteen-rule table merged into three rules.

    Stop waits 20, 25 and 30 minutes for the three dtemp bands below 0.5 degC.
    """
    _check(dtemp, obs_time)
    if dtemp < 0.25 and obs_time >= 20.0:
        return Decision.STOP
    if 0.25 <= dtemp < 0.35 and obs_time >= 25.0:
        return Decision.STOP
    if 0.35 <= dtemp < 0.5 and obs_time >= 30.0:
        return Decision.STOP
    return Decision.CONTINUE
