"""Plain-text configuration files for controllers, plant scenarios and benches.

Files are INI-style (``configparser``). Sections may be nested by dotted
names. Floats are written with ``repr`` so a dump/load cycle is lossless.

Controller file::

    [controller]
    family = triangular
    decision_threshold = 0.5
    start_threshold = 0.5

    [variable.dtemp]
    lo = 0.0
    hi = 5.0
    units = degC
    terms = very_small, small, medium, large

    [variable.dtemp.very_small]
    kind = trapezoidal
    params = 0.0, 0.0, 0.09, 0.2

    ... same for variable.time and its five terms ...

    [rules.main]            ; one row per dtemp term, one column per time term
    very_small = continue, stop, stop, stop, stop
    ...

    [rules.timer]
    very_small = start
    ...

Scenario file::

    [plant]                 ; defaults shared by every unit
    tau = 8.0
    ...
    [unit.2]                ; optional per-unit overrides, makes a bank
    q_opt = 120.0

    [run]
    controller = fuzzy-triangular
    initial_charge = 60.0
    ...
"""
from __future__ import annotations

import configparser
import io
from dataclasses import fields
from importlib import resources
from pathlib import Path
from typing import Dict, List, Tuple

from .controllers import (
    DTEMP_TERMS,
    MAIN_OUTPUT,
    TIME_TERMS,
    TIMER_OUTPUT,
    MainControllerConfig,
    MfFamily,
    TimerControllerConfig,
)
from .fuzzy import FuzzyError, LinguisticVariable, make_mf
from .plant import PlantParams
from .runner import RunConfig

__all__ = [
    "ConfigError",
    "dump_controller",
    "dumps_controller",
    "load_controller",
    "load_packaged",
    "load_scenario",
    "loads_controller",
    "packaged_path",
    "dump_scenario",
    "parse_ini",
    "read_ini",
]


class ConfigError(ValueError):
    """A configuration file could not be parsed or fails validation."""


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    cp.optionxform = str  # keep key case
    return cp


def read_ini(path) -> configparser.ConfigParser:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"no such config file: {path}")
    return parse_ini(path.read_text(), str(path))


def parse_ini(text: str, source: str = "<string>") -> configparser.ConfigParser:
    cp = _parser()
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    return cp


def _get(cp, section, key, conv=str, default=None):
    if not cp.has_section(section):
        if default is not None:
            return default
        raise ConfigError(f"missing section [{section}]")
    if not cp.has_option(section, key):
        if default is not None:
            return default
        raise ConfigError(f"[{section}] missing key {key!r}")
    raw = cp.get(section, key)
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc


def _floats(raw: str) -> List[float]:
    return [float(v) for v in raw.split(",") if v.strip()]


def _names(raw: str) -> List[str]:
    return [v.strip() for v in raw.split(",") if v.strip()]


def _bool(raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError("not a boolean")


def _fmt_floats(vals) -> str:
    return ", ".join(repr(float(v)) for v in vals)


# -- controllers --------------------------------------------------------------

def _read_variable(cp, name: str) -> LinguisticVariable:
    sec = f"variable.{name}"
    lo = _get(cp, sec, "lo", float)
    hi = _get(cp, sec, "hi", float)
    units = cp.get(sec, "units", fallback="")
    terms = []
    for term in _get(cp, sec, "terms", _names):
        tsec = f"{sec}.{term}"
        kind = _get(cp, tsec, "kind")
        params = _get(cp, tsec, "params", _floats)
        try:
            terms.append((term, make_mf(kind, params)))
        except FuzzyError as exc:
            raise ConfigError(f"[{tsec}] {exc}") from exc
    try:
        return LinguisticVariable(name, lo, hi, tuple(terms), units)
    except FuzzyError as exc:
        raise ConfigError(str(exc)) from exc


def _write_variable(cp, var: LinguisticVariable) -> None:
    sec = f"variable.{var.name}"
    cp[sec] = {"lo": repr(float(var.lo)), "hi": repr(float(var.hi)), "units": var.units,
               "terms": ", ".join(var.term_names)}
    for term, mf in var.terms:
        cp[f"{sec}.{term}"] = {"kind": mf.kind, "params": _fmt_floats(mf.params)}


def _check_output(cp, name: str, expected: LinguisticVariable) -> None:
    if not cp.has_section(f"variable.{name}"):
        return
    var = _read_variable(cp, name)
    got = [(n, mf.kind, mf.params) for n, mf in var.terms]
    want = [(n, mf.kind, mf.params) for n, mf in expected.terms]
    if got != want:
        raise ConfigError(f"[variable.{name}] output singletons are fixed at {want}, got {got}")


def parse_controller(cp) -> Tuple[MainControllerConfig, TimerControllerConfig]:
    """Build both controller configs from a parsed INI."""
    try:
        family = MfFamily.parse(_get(cp, "controller", "family"))
    except ValueError as exc:
        raise ConfigError(f"[controller] family: {exc}") from exc
    dthr = _get(cp, "controller", "decision_threshold", float, 0.5)
    sthr = _get(cp, "controller", "start_threshold", float, 0.5)
    dvar = _read_variable(cp, "dtemp")
    tvar = _read_variable(cp, "time")
    _check_output(cp, "output", MAIN_OUTPUT)
    _check_output(cp, "timer_output", TIMER_OUTPUT)

    rules = []
    for term in DTEMP_TERMS:
        row = _get(cp, "rules.main", term, _names)
        if len(row) != len(TIME_TERMS) or not set(row) <= {"stop", "continue"}:
            raise ConfigError(f"[rules.main] {term}: need {len(TIME_TERMS)} of stop/continue, got {row}")
        rules.append(tuple(row))
    timer_rules = []
    for term in DTEMP_TERMS:
        c = _get(cp, "rules.timer", term).strip()
        if c not in ("start", "stop"):
            raise ConfigError(f"[rules.timer] {term}: need start or stop, got {c!r}")
        timer_rules.append(c)
    try:
        main = MainControllerConfig(family, dvar, tvar, dthr, tuple(rules))
        timer = TimerControllerConfig(dvar, sthr, tuple(timer_rules))
    except (ValueError, FuzzyError) as exc:
        raise ConfigError(str(exc)) from exc
    return main, timer


def load_controller(source) -> Tuple[MainControllerConfig, TimerControllerConfig]:
    return parse_controller(read_ini(source))


def loads_controller(text: str) -> Tuple[MainControllerConfig, TimerControllerConfig]:
    return parse_controller(parse_ini(text))


def dumps_controller(main: MainControllerConfig, timer: TimerControllerConfig = None, header: str = "") -> str:
    """Serialize a controller pair; the timer defaults to main's dtemp terms."""
    if timer is None:
        timer = TimerControllerConfig(main.dtemp)
    if timer.dtemp != main.dtemp:
        raise ValueError("timer and main controller must share dtemp terms")
    cp = _parser()
    cp["controller"] = {
        "family": main.family.value,
        "decision_threshold": repr(float(main.decision_threshold)),
        "start_threshold": repr(float(timer.start_threshold)),
    }
    _write_variable(cp, main.dtemp)
    _write_variable(cp, main.time)
    _write_variable(cp, MAIN_OUTPUT)
    _write_variable(cp, LinguisticVariable("timer_output", TIMER_OUTPUT.lo, TIMER_OUTPUT.hi, TIMER_OUTPUT.terms))
    cp["rules.main"] = {term: ", ".join(row) for term, row in zip(DTEMP_TERMS, main.rules)}
    cp["rules.timer"] = dict(zip(DTEMP_TERMS, timer.rules))
    buf = io.StringIO()
    if header:
        for line in header.splitlines():
            buf.write(f"# {line}\n" if line else "#\n")
        buf.write("\n")
    cp.write(buf)
    return buf.getvalue().rstrip("\n") + "\n"


def dump_controller(main: MainControllerConfig, timer: TimerControllerConfig, path, header: str = "") -> None:
    Path(path).write_text(dumps_controller(main, timer, header))


def packaged_path(family) -> Path:
    family = MfFamily.parse(family)
    return Path(str(resources.files("fuzzycharge") / "data" / f"{family.value}.ini"))


_PACKAGED: Dict[MfFamily, tuple] = {}


def load_packaged(family) -> Tuple[MainControllerConfig, TimerControllerConfig]:
    """The calibrated configs that ship with the package (cached)."""
    family = MfFamily.parse(family)
    if family not in _PACKAGED:
        _PACKAGED[family] = load_controller(packaged_path(family))
    return _PACKAGED[family]


# -- scenarios ----------------------------------------------------------------

_PLANT_CONV = {"seed": int}
_RUN_CONV = {"controller": str, "optimum_patience": int, "median_filter": _bool}


def _section_kwargs(cp, section, cls, conv) -> dict:
    known = {f.name for f in fields(cls)}
    out = {}
    for key, raw in cp.items(section):
        if key not in known:
            raise ConfigError(f"[{section}] unknown key {key!r}")
        try:
            out[key] = conv.get(key, float)(raw.strip())
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc
    return out


def parse_scenario(cp) -> Tuple[List[PlantParams], RunConfig]:
    """Plant units and run settings; any section missing means defaults."""
    base = _section_kwargs(cp, "plant", PlantParams, _PLANT_CONV) if cp.has_section("plant") else {}
    unit_secs = sorted((s for s in cp.sections() if s.startswith("unit.")),
                       key=lambda s: (len(s), s))
    try:
        if unit_secs:
            units = [PlantParams(**{**base, **_section_kwargs(cp, s, PlantParams, _PLANT_CONV)})
                     for s in unit_secs]
        else:
            units = [PlantParams(**base)]
        run = RunConfig(**_section_kwargs(cp, "run", RunConfig, _RUN_CONV)) if cp.has_section("run") else RunConfig()
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    return units, run


def load_scenario(source) -> Tuple[List[PlantParams], RunConfig]:
    return parse_scenario(read_ini(source))


def _as_text(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dump_scenario(units: List[PlantParams], run: RunConfig) -> str:
    """Scenario text; several units are written as full ``[unit.N]`` sections."""
    cp = _parser()
    if len(units) == 1:
        cp["plant"] = {f.name: _as_text(getattr(units[0], f.name)) for f in fields(PlantParams)}
    else:
        for i, u in enumerate(units, 1):
            cp[f"unit.{i}"] = {f.name: _as_text(getattr(u, f.name)) for f in fields(PlantParams)}
    cp["run"] = {f.name: _as_text(getattr(run, f.name)) for f in fields(RunConfig)}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue().rstrip("\n") + "\n"
