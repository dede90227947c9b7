"""Fuzzy and crisp stop controllers for refrigerant charging.

The package is layered:

* :mod:`fuzzycharge.fuzzy` holds membership functions, rule bases and inference.
* :mod:`fuzzycharge.controllers` and :mod:`fuzzycharge.crisp` hold the concrete
  stop/continue controllers.
* :mod:`fuzzycharge.plant` is a synthetic refrigerator.
* :mod:`fuzzycharge.runner` drives the charging procedure.
* :mod:`fuzzycharge.bench` produces the indicator tables and curves.

Inference kernels come from a compiled extension when it is built and fall back
to pure Python otherwise; see :mod:`fuzzycharge.kernels`.
"""
__version__ = "0.1.0"

from .decisions import Decision, TimerDecision
from .fuzzy import (
    AllRulesZero,
    Gaussian,
    LinguisticVariable,
    Rule,
    RuleBase,
    Singleton,
    Trapezoidal,
    Triangular,
    defuzzify_weighted_average,
    fire_strength,
    grade,
    infer_cri,
)
from .crisp import crisp_refined_decide, crisp_simple_decide, crisp_sixteen_decide
from .controllers import (
    MainControllerConfig,
    MfFamily,
    TimerControllerConfig,
    build_main_controller,
    build_timer_controller,
    main_decide,
    surface,
    timer_decide,
)
from .plant import Plant, PlantParams, Sample, t_stab, temperature
from .runner import RunConfig, RunReport, TestRecord, make_controller, run_bank, run_full_procedure

__all__ = [
    "AllRulesZero",
    "Decision",
    "Gaussian",
    "LinguisticVariable",
    "MainControllerConfig",
    "MfFamily",
    "Plant",
    "PlantParams",
    "Rule",
    "RuleBase",
    "RunConfig",
    "RunReport",
    "Sample",
    "Singleton",
    "TestRecord",
    "TimerControllerConfig",
    "TimerDecision",
    "Trapezoidal",
    "Triangular",
    "build_main_controller",
    "build_timer_controller",
    "crisp_refined_decide",
    "crisp_simple_decide",
    "crisp_sixteen_decide",
    "defuzzify_weighted_average",
    "fire_strength",
    "grade",
    "infer_cri",
    "main_decide",
    "make_controller",
    "run_bank",
    "run_full_procedure",
    "surface",
    "t_stab",
    "temperature",
    "timer_decide",
]
