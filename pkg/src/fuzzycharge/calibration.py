"""Tune membership-function breakpoints against target stop-time plateaus.

A target (:class:`StaircaseSpec`) lists dtemp bands with the window the stop
time must fall in, single-point probes, and a dtemp above which the
controller must never stop. The loss is the summed distance of simulated
stop times from their windows plus a penalty for any stop time that drops as
dtemp grows. :func:`calibrate` runs a deterministic coordinate sweep from a
seed table, halving the step each pass, and stops as soon as the loss is 0.

Stop times are found by holding dtemp constant and stepping the observation
clock in ``scan_interval`` increments, which is exactly what a plateau plant
feeds the controller.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import kernels
from .controllers import (
    DTEMP_RANGE,
    DTEMP_TERMS,
    MAIN_RULES,
    TIME_RANGE,
    TIME_TERMS,
    MainControllerConfig,
    MfFamily,
    main_rulebase,
    time_grid,
)
from .fuzzy import FuzzyError, LinguisticVariable, make_mf

log = logging.getLogger(__name__)

__all__ = [
    "BandTarget",
    "CalibrationFailed",
    "SEED_PARAMS",
    "StaircaseSpec",
    "calibrate",
    "config_from_params",
    "default_targets",
    "evaluate",
]


_EPS = 1e-9  # absorbs float noise in the scan grid


class CalibrationFailed(RuntimeError):
    """The sweep budget ran out before every target was met.

    ``params`` and ``loss`` hold the best point the sweep reached.
    """

    def __init__(self, msg, params=None, loss=math.inf):
        super().__init__(msg)
        self.params = params
        self.loss = loss


@dataclass(frozen=True)
class BandTarget:
    """Stop time must lie in ``[t_min, t_max]`` for dtemp across ``[lo, hi]``.

    ``lo_open`` / ``hi_open`` exclude the end points from the sampled grid.
    """

    lo: float
    hi: float
    t_min: float
    t_max: float
    lo_open: bool = False
    hi_open: bool = False

    def grid(self, step: float, edge: float = 0.0) -> List[float]:
        """Points every ``step`` plus, if ``edge``, points ``edge`` inside each end."""
        n = int(round((self.hi - self.lo) / step))
        pts = [round(self.lo + k * step, 9) for k in range(n + 1)]
        if edge:
            pts += [round(self.lo + edge, 9), round(self.hi - edge, 9)]
        if self.lo_open:
            pts = [p for p in pts if p > self.lo]
        if self.hi_open:
            pts = [p for p in pts if p < self.hi]
        return sorted(set(pts))


@dataclass(frozen=True)
class StaircaseSpec:
    bands: Tuple[BandTarget, ...]
    probes: Tuple[Tuple[float, float, float], ...] = ()  # (dtemp, target, tolerance)
    never_above: float = 0.58  # no stop for dtemp strictly above this
    monotone_upto: Optional[float] = None  # defaults to never_above
    grid_step: float = 0.01
    edge_step: float = 0.0  # extra points this far inside band ends
    scan_interval: float = 0.1
    probe_weight: float = 5.0

    def never_grid(self) -> List[float]:
        pts = [round(self.never_above + 0.01 * k, 9) for k in range(1, 50)]
        if self.edge_step:
            pts.append(round(self.never_above + self.edge_step, 9))
        pts += [round(0.5 * k, 9) for k in range(2, 11)]
        return sorted(p for p in set(pts) if self.never_above < p <= DTEMP_RANGE[1])


def default_targets(family) -> StaircaseSpec:
    """Targets for the shipped families.

    TriangularMix follows the 12/20/27 min staircase with breakpoints at
    0.15/0.37/0.58 degC. The other two follow their measured test times per
    band. Probes pin the plateau-bench points.
    """
    family = MfFamily.parse(family)
    if family is MfFamily.TRIANGULAR_MIX:
        return StaircaseSpec(
            bands=(
                BandTarget(0.0, 0.15, 11.0, 13.0),
                BandTarget(0.15, 0.37, 19.0, 21.0, lo_open=True),
                BandTarget(0.37, 0.58, 26.0, 28.0, lo_open=True),
            ),
            probes=((0.125, 12.2, 0.3), (0.2, 20.0, 0.1), (0.275, 20.0, 0.1), (0.39, 26.6, 0.4), (0.45, 27.0, 0.1)),
            never_above=0.58,
            edge_step=0.001,
        )
    if family is MfFamily.TRAPEZOIDAL:
        return StaircaseSpec(
            bands=(
                BandTarget(0.0, 0.25, 8.3, 20.1, hi_open=True),
                BandTarget(0.25, 0.3, 19.0, 21.0),
                BandTarget(0.35, 0.5, 26.0, 27.1),
            ),
            probes=((0.0, 8.8, 0.2), (0.2, 18.5, 0.7), (0.275, 20.0, 0.1), (0.39, 27.0, 0.1), (0.45, 27.0, 0.1)),
            never_above=0.6,
        )
    return StaircaseSpec(
        bands=(
            BandTarget(0.0, 0.25, 18.6, 19.8, hi_open=True),
            BandTarget(0.25, 0.3, 18.8, 19.8),
            BandTarget(0.35, 0.5, 25.7, 26.7),
        ),
        probes=((0.0, 19.1, 0.1), (0.125, 19.2, 0.1), (0.2, 19.2, 0.1), (0.275, 19.3, 0.1),
                (0.39, 26.2, 0.1), (0.45, 26.2, 0.1)),
        never_above=1.0,
    )


# (variable, term) -> (kind, params). Outer shoulders pin the range ends.
SEED_PARAMS: Dict[MfFamily, Dict[Tuple[str, str], Tuple[str, tuple]]] = {
    MfFamily.TRIANGULAR_MIX: {
        ("dtemp", "very_small"): ("trapezoidal", (0.0, 0.0, 0.09, 0.2)),
        ("dtemp", "small"): ("triangular", (0.07, 0.25, 0.49)),
        ("dtemp", "medium"): ("triangular", (0.24, 0.5, 0.65)),
        ("dtemp", "large"): ("trapezoidal", (0.435, 0.75, 5.0, 5.0)),
        ("time", "very_early"): ("trapezoidal", (0.0, 0.0, 11.5, 12.5)),
        ("time", "early"): ("trapezoidal", (11.5, 12.5, 18.5, 20.5)),
        ("time", "right"): ("trapezoidal", (19.5, 20.5, 26.5, 27.5)),
        ("time", "late"): ("trapezoidal", (26.5, 27.5, 32.0, 35.0)),
        ("time", "very_late"): ("trapezoidal", (32.5, 35.0, 40.0, 40.0)),
    },
    MfFamily.TRAPEZOIDAL: {
        ("dtemp", "very_small"): ("trapezoidal", (0.0, 0.0, 0.02, 0.25)),
        ("dtemp", "small"): ("trapezoidal", (0.02, 0.25, 0.3, 0.35)),
        ("dtemp", "medium"): ("trapezoidal", (0.3, 0.35, 0.5, 0.65)),
        ("dtemp", "large"): ("trapezoidal", (0.5, 0.65, 5.0, 5.0)),
        ("time", "very_early"): ("trapezoidal", (0.0, 0.0, 5.0, 12.6)),
        ("time", "early"): ("trapezoidal", (5.0, 12.6, 15.0, 25.0)),
        ("time", "right"): ("trapezoidal", (15.0, 25.0, 25.0, 29.0)),
        ("time", "late"): ("trapezoidal", (25.0, 29.0, 32.0, 36.0)),
        ("time", "very_late"): ("trapezoidal", (32.0, 36.0, 40.0, 40.0)),
    },
    MfFamily.GAUSSIAN: {
        ("dtemp", "very_small"): ("gaussian", (0.0811, 0.1007)),
        ("dtemp", "small"): ("gaussian", (0.2742, 0.2322)),
        ("dtemp", "medium"): ("gaussian", (0.3603, 0.2696)),
        ("dtemp", "large"): ("gaussian", (0.621, 0.3732)),
        ("time", "very_early"): ("gaussian", (3.624, 5.5158)),
        ("time", "early"): ("gaussian", (11.5831, 1.5668)),
        ("time", "right"): ("gaussian", (24.5615, 2.2108)),
        ("time", "late"): ("gaussian", (29.855, 4.1969)),
        ("time", "very_late"): ("gaussian", (37.0273, 4.9441)),
    },
}


def _fixed_positions(kind: str, params: tuple, rng: Tuple[float, float]) -> set:
    """Indices of parameters that sit on a range end and stay put."""
    if kind == "gaussian":
        return set()
    return {i for i, p in enumerate(params) if p in rng}


def _variables(family: MfFamily, params: Dict[Tuple[str, str], Tuple[str, tuple]]):
    dvar = LinguisticVariable("dtemp", *DTEMP_RANGE,
                              tuple((t, make_mf(*params[("dtemp", t)])) for t in DTEMP_TERMS), "degC")
    tvar = LinguisticVariable("time", *TIME_RANGE,
                              tuple((t, make_mf(*params[("time", t)])) for t in TIME_TERMS), "min")
    return dvar, tvar


def config_from_params(family, params, decision_threshold: float = 0.5) -> MainControllerConfig:
    family = MfFamily.parse(family)
    dvar, tvar = _variables(family, params)
    return MainControllerConfig(family, dvar, tvar, decision_threshold, MAIN_RULES)


@dataclass
class Evaluation:
    loss: float
    stop_times: Dict[float, float] = field(default_factory=dict)  # inf = never, nan = no rule fired
    failures: List[str] = field(default_factory=list)


def _stop_map(packed, dtemps, spec: StaircaseSpec, threshold: float) -> Dict[float, float]:
    times = time_grid(spec.scan_interval, TIME_RANGE[1])
    idx = kernels.stop_indices(packed, list(dtemps), times, threshold)
    return {d: (times[i] if i >= 0 else (math.inf if i == -1 else math.nan)) for d, i in zip(dtemps, idx)}


def _all_points(spec: StaircaseSpec) -> List[float]:
    pts = set()
    for b in spec.bands:
        pts.update(b.grid(spec.grid_step, spec.edge_step))
    pts.update(p[0] for p in spec.probes)
    upto = spec.monotone_upto if spec.monotone_upto is not None else spec.never_above
    n = int(round(upto / spec.grid_step))
    pts.update(round(k * spec.grid_step, 9) for k in range(n + 1))
    pts.update(spec.never_grid())
    return sorted(pts)


def _score(st: Dict[float, float], spec: StaircaseSpec, verbose: bool = False) -> Evaluation:
    loss = 0.0
    fails = []
    cap = TIME_RANGE[1] + 20.0

    def val(d):
        v = st[d]
        if math.isnan(v):
            return None
        return min(v, cap)

    for b in spec.bands:
        for d in b.grid(spec.grid_step, spec.edge_step):
            v = val(d)
            if v is None:
                loss += 100.0
                fails.append(f"no rule fired at dtemp={d}")
                continue
            miss = max(0.0, b.t_min - v - _EPS, v - b.t_max - _EPS)
            if miss > 0:
                loss += miss
                if verbose:
                    fails.append(f"dtemp={d}: stop {st[d]} outside [{b.t_min}, {b.t_max}]")
    for d, target, tol in spec.probes:
        v = val(d)
        miss = 100.0 if v is None else max(0.0, abs(v - target) - tol - _EPS)
        if miss > 0:
            loss += spec.probe_weight * miss
            if verbose:
                fails.append(f"probe dtemp={d}: stop {st[d]} vs {target}+-{tol}")
    for d in spec.never_grid():
        v = val(d)
        if v is None or v < cap:
            loss += (cap - (v or 0.0))
            if verbose:
                fails.append(f"dtemp={d}: stops at {st[d]} but should never stop")
    upto = spec.monotone_upto if spec.monotone_upto is not None else spec.never_above
    prev = -math.inf
    for k in range(int(round(upto / spec.grid_step)) + 1):
        d = round(k * spec.grid_step, 9)
        v = val(d)
        if v is None:
            continue
        if v < prev - _EPS:
            loss += prev - v
            if verbose:
                fails.append(f"stop time drops at dtemp={d}: {prev} -> {v}")
        prev = max(prev, v)
    return Evaluation(loss, st, fails)


def evaluate(cfg: MainControllerConfig, spec: StaircaseSpec) -> Evaluation:
    """Loss and per-point stop times of ``cfg`` against ``spec``."""
    st = _stop_map(cfg.rulebase.packed, _all_points(spec), spec, cfg.decision_threshold)
    return _score(st, spec, verbose=True)


def _fast_loss(family, params, spec, points, threshold) -> float:
    try:
        dvar, tvar = _variables(family, params)
    except FuzzyError:
        return math.inf
    rb = main_rulebase(dvar, tvar)
    return _score(_stop_map(rb.packed, points, spec, threshold), spec).loss


def calibrate(family, targets: Optional[StaircaseSpec] = None, seed: Optional[dict] = None,
              passes: int = 6, span: int = 6, decision_threshold: float = 0.5) -> MainControllerConfig:
    """Coordinate sweep from ``seed`` until the targets are met.

    Each pass visits every free breakpoint in a fixed order and tries
    ``base + k * step`` for ``k`` in ``-span..span``, keeping the best
    candidate. The step halves after every pass.

    Raises:
        CalibrationFailed: if the loss is still positive after ``passes``
            passes, or the result violates the config invariants.
    """
    family = MfFamily.parse(family)
    spec = targets or default_targets(family)
    params = {k: (kind, tuple(p)) for k, (kind, p) in (seed or SEED_PARAMS[family]).items()}
    points = _all_points(spec)
    fixed = {key: _fixed_positions(kind, p, DTEMP_RANGE if key[0] == "dtemp" else TIME_RANGE)
             for key, (kind, p) in params.items()}
    loss = _fast_loss(family, params, spec, points, decision_threshold)
    log.info("calibrate %s: seed loss %.4f", family.value, loss)
    base_step = {"dtemp": 0.01, "time": 0.5}
    for ps in range(passes):
        if loss == 0.0:
            break
        for key in sorted(params):
            var = key[0]
            kind, p = params[key]
            for i in range(len(p)):
                if i in fixed[key]:
                    continue
                step = base_step[var] / 2 ** ps
                if kind == "gaussian" and i == 1:
                    step /= 2
                best_v, best_loss = p[i], loss
                for k in range(-span, span + 1):
                    if k == 0:
                        continue
                    cand = list(p)
                    cand[i] = round(p[i] + k * step, 6)
                    trial = dict(params)
                    trial[key] = (kind, tuple(cand))
                    cl = _fast_loss(family, trial, spec, points, decision_threshold)
                    if cl < best_loss - 1e-12:
                        best_v, best_loss = cand[i], cl
                if best_loss < loss:
                    p = tuple(best_v if j == i else v for j, v in enumerate(p))
                    params[key] = (kind, p)
                    loss = best_loss
        log.info("calibrate %s: pass %d loss %.4f", family.value, ps, loss)
    if loss > 0.0:
        raise CalibrationFailed(f"{family.value}: loss {loss:.4f} after {passes} passes", params, loss)
    try:
        return config_from_params(family, params, decision_threshold)
    except (ValueError, FuzzyError) as exc:
        raise CalibrationFailed(f"{family.value}: calibrated parameters invalid: {exc}") from exc
