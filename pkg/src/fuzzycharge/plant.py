"""Synthetic refrigerator plant.

Each charge level has a stabilization temperature on a quadratic bowl around
the optimal charge, and the monitored temperature relaxes toward it with a
first-order exponential transient. Adding refrigerant restarts the transient
from whatever the temperature is at that moment.

The plant is stepped by a scanner: every ``scan_interval`` minutes it yields
one :class:`Sample`, optionally with seeded Gaussian noise.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence

import numpy as np

log = logging.getLogger(__name__)

__all__ = [
    "DTEMP_MAX",
    "InsufficientWindow",
    "Plant",
    "PlantParams",
    "PlantState",
    "Sample",
    "add_charge",
    "dtemp",
    "initial_state",
    "read_stream_csv",
    "scan",
    "t_stab",
    "temperature",
    "write_stream_csv",
]

DTEMP_MAX = 5.0
STREAM_HEADER = ("time_min", "temp_c")


class InsufficientWindow(ValueError):
    """The sample window does not reach back one differencing span."""


@dataclass(frozen=True)
class PlantParams:
    """Parameters of one simulated unit.

    Attributes:
        t_ambient: Room temperature, degC.
        t_initial: Temperature of the unit before the first charge, degC.
        q_opt: Charge (g) with the lowest stabilization temperature.
        t_opt: Stabilization temperature at ``q_opt``, degC.
        curvature_k: Bowl curvature, degC per g^2.
        tau: Transient time constant, minutes.
        noise_sigma: Standard deviation of additive sensor noise, degC.
        scan_interval: Minutes between samples.
        seed: Seed for the per-plant noise generator.
    """

    t_ambient: float = 25.0
    t_initial: float = 25.0
    q_opt: float = 100.0
    t_opt: float = -20.0
    curvature_k: float = 0.002
    tau: float = 8.0
    noise_sigma: float = 0.0
    scan_interval: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not self.t_opt < self.t_initial <= self.t_ambient:
            raise ValueError(
                f"need t_opt < t_initial <= t_ambient, got {self.t_opt}, {self.t_initial}, {self.t_ambient}"
            )
        if not self.q_opt > 0:
            raise ValueError(f"q_opt must be positive, got {self.q_opt}")
        if self.curvature_k < 0:
            raise ValueError(f"curvature_k must be >= 0, got {self.curvature_k}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not self.scan_interval > 0:
            raise ValueError(f"scan_interval must be positive, got {self.scan_interval}")


@dataclass(frozen=True)
class PlantState:
    """Where the plant is in its current transient.

    ``steps`` counts scans since the last charge change, so ``elapsed`` is an
    exact multiple of the scan interval rather than an accumulated float.
    """

    charge_q: float
    temp_at_charge: float
    steps: int = 0
    sample_count: int = 0
    scan_interval: float = 0.1

    def __post_init__(self):
        if self.charge_q < 0:
            raise ValueError(f"charge_q must be >= 0, got {self.charge_q}")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")

    @property
    def elapsed(self) -> float:
        return round(self.steps * self.scan_interval, 9)

    @property
    def time(self) -> float:
        """Absolute time of the most recent sample, minutes."""
        return round(self.sample_count * self.scan_interval, 9)


@dataclass(frozen=True)
class Sample:
    time: float
    temp: float


def t_stab(params: PlantParams, q: float) -> float:
    """Stabilization temperature for charge ``q`` grams."""
    if q < 0:
        raise ValueError(f"charge must be >= 0, got {q}")
    return params.t_opt + params.curvature_k * (q - params.q_opt) ** 2


def temperature(params: PlantParams, q: float, t: float, t_from: float) -> float:
    """Noise-free temperature ``t`` minutes into a transient that began at ``t_from``."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t == 0:
        return t_from  # exact, the closed form can be off by an ulp here
    ts = t_stab(params, q)
    return ts + (t_from - ts) * math.exp(-t / params.tau)


def initial_state(params: PlantParams, charge_q: float) -> PlantState:
    """State right after ``charge_q`` grams went into a unit resting at ``t_initial``."""
    return PlantState(charge_q, params.t_initial, 0, 0, params.scan_interval)


def current_temperature(state: PlantState, params: PlantParams) -> float:
    return temperature(params, state.charge_q, state.elapsed, state.temp_at_charge)


def scan(state: PlantState, params: PlantParams, rng: Optional[np.random.Generator] = None):
    """Advance one scan interval; returns ``(new_state, sample)``.

    Noise is drawn from ``rng`` only when ``noise_sigma > 0``, so a noise-free
    plant never touches its generator.
    """
    new = replace(state, steps=state.steps + 1, sample_count=state.sample_count + 1)
    temp = current_temperature(new, params)
    if params.noise_sigma > 0:
        if rng is None:
            raise ValueError("a noisy plant needs a random generator")
        temp += float(rng.normal(0.0, params.noise_sigma))
    return new, Sample(new.time, temp)


def add_charge(state: PlantState, params: PlantParams, increment: float) -> PlantState:
    """Add ``increment`` grams and restart the transient from the current temperature."""
    if not increment > 0:
        raise ValueError(f"increment must be positive, got {increment}")
    return replace(
        state,
        charge_q=state.charge_q + increment,
        temp_at_charge=current_temperature(state, params),
        steps=0,
    )


def dtemp(window: Sequence[Sample], span: float = 1.0) -> float:
    """Temperature drop over the last ``span`` minutes of ``window``, clamped to [0, 5].

    Uses the latest sample at or before ``t_now - span``.

    Raises:
        InsufficientWindow: if no sample is that old.
    """
    if not window:
        raise InsufficientWindow("empty window")
    now = window[-1]
    target = now.time - span + 1e-9
    for s in reversed(window):
        if s.time <= target:
            drop = s.temp - now.temp
            return min(max(drop, 0.0), DTEMP_MAX)
    raise InsufficientWindow(f"window starts at {window[0].time}, need {now.time - span}")


class Plant:
    """Mutable convenience wrapper owning one state and one noise generator."""

    def __init__(self, params: PlantParams, charge_q: float, keep_history: bool = False):
        self.params = params
        self.state = initial_state(params, charge_q)
        self.rng = np.random.default_rng(params.seed)
        self.history: Optional[List[Sample]] = [] if keep_history else None

    @property
    def charge_q(self) -> float:
        return self.state.charge_q

    @property
    def time(self) -> float:
        return self.state.time

    def temperature_now(self) -> float:
        return current_temperature(self.state, self.params)

    def scan(self) -> Sample:
        self.state, sample = scan(self.state, self.params, self.rng)
        if self.history is not None:
            self.history.append(sample)
        return sample

    def add_charge(self, increment: float) -> None:
        self.state = add_charge(self.state, self.params, increment)
        log.debug("charge -> %g g at t=%g", self.state.charge_q, self.state.time)


def write_stream_csv(samples: Iterable[Sample], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STREAM_HEADER)
        for s in samples:
            w.writerow((repr(s.time), repr(s.temp)))


def read_stream_csv(path) -> List[Sample]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [Sample(float(r["time_min"]), float(r["temp_c"])) for r in rows]
