"""Fuzzy sets, rule bases and the two inference routes used by the controllers.

Membership functions are small frozen dataclasses. A rule base is a list of
MISO rules over a set of linguistic variables; crisp output is obtained by
weighted-average defuzzification over singleton consequents, while
:func:`infer_cri` returns the max-min aggregated fuzzy output on a grid.

AND and implication are the minimum, aggregation across rules is the maximum.
Crisp inputs are clamped to their variable's range before grading.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

from . import kernels

__all__ = [
    "AllRulesZero",
    "FuzzyError",
    "FuzzyOutputSamples",
    "Gaussian",
    "LinguisticVariable",
    "MembershipFunction",
    "Rule",
    "RuleBase",
    "Singleton",
    "Trapezoidal",
    "Triangular",
    "defuzzify_weighted_average",
    "fire_strength",
    "grade",
    "infer_cri",
    "weighted_average",
]


class FuzzyError(ValueError):
    """Malformed fuzzy set, variable or rule base."""


class AllRulesZero(FuzzyError):
    """Every rule fired with strength zero, so the weighted average is undefined."""


# Kernel kind codes; must match _pykernels / _ckernels.
SINGLETON, TRIANGULAR, TRAPEZOIDAL, GAUSSIAN = 0, 1, 2, 3


@dataclass(frozen=True)
class Triangular:
    a: float
    b: float
    c: float

    kind = "triangular"
    code = TRIANGULAR

    def __post_init__(self):
        if not self.a <= self.b <= self.c:
            raise FuzzyError(f"triangular needs a <= b <= c, got {self.params}")

    @property
    def params(self) -> tuple:
        return (self.a, self.b, self.c)

    @property
    def support(self) -> tuple:
        return (self.a, self.c)

    def grade(self, x: float) -> float:
        if x < self.a or x > self.c:
            return 0.0
        if x == self.b:
            return 1.0
        if x < self.b:
            return (x - self.a) / (self.b - self.a)
        return (self.c - x) / (self.c - self.b)


@dataclass(frozen=True)
class Trapezoidal:
    """Trapezoid with feet ``a``, ``d`` and plateau ``[b, c]``.

    ``a == b`` or ``c == d`` gives a shoulder, which is how the outermost
    terms of a variable are usually written.
    """

    a: float
    b: float
    c: float
    d: float

    kind = "trapezoidal"
    code = TRAPEZOIDAL

    def __post_init__(self):
        if not self.a <= self.b <= self.c <= self.d:
            raise FuzzyError(f"trapezoidal needs a <= b <= c <= d, got {self.params}")

    @property
    def params(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    @property
    def support(self) -> tuple:
        return (self.a, self.d)

    def grade(self, x: float) -> float:
        if x < self.a or x > self.d:
            return 0.0
        if self.b <= x <= self.c:
            return 1.0
        if x < self.b:
            return (x - self.a) / (self.b - self.a)
        return (self.d - x) / (self.d - self.c)


@dataclass(frozen=True)
class Gaussian:
    mean: float
    sigma: float

    kind = "gaussian"
    code = GAUSSIAN

    def __post_init__(self):
        if not self.sigma > 0:
            raise FuzzyError(f"gaussian sigma must be positive, got {self.sigma}")

    @property
    def params(self) -> tuple:
        return (self.mean, self.sigma)

    @property
    def support(self) -> tuple:
        return (-math.inf, math.inf)

    def grade(self, x: float) -> float:
        z = (x - self.mean) / self.sigma
        return math.exp(-0.5 * z * z)


@dataclass(frozen=True)
class Singleton:
    c: float

    kind = "singleton"
    code = SINGLETON

    @property
    def params(self) -> tuple:
        return (self.c,)

    @property
    def support(self) -> tuple:
        return (self.c, self.c)

    def grade(self, x: float) -> float:
        return 1.0 if x == self.c else 0.0


MembershipFunction = Union[Triangular, Trapezoidal, Gaussian, Singleton]

MF_KINDS = {cls.kind: cls for cls in (Triangular, Trapezoidal, Gaussian, Singleton)}


def make_mf(kind: str, params: Sequence[float]) -> MembershipFunction:
    """Build a membership function from its kind name and parameter list."""
    try:
        cls = MF_KINDS[kind]
    except KeyError:
        raise FuzzyError(f"unknown membership function kind {kind!r}") from None
    try:
        return cls(*(float(p) for p in params))
    except TypeError:
        raise FuzzyError(f"wrong number of parameters for {kind}: {list(params)}") from None


def grade(mf: MembershipFunction, x: float) -> float:
    return mf.grade(x)


@dataclass(frozen=True)
class LinguisticVariable:
    """A named variable over ``[lo, hi]`` with an ordered set of terms."""

    name: str
    lo: float
    hi: float
    terms: tuple  # ((term_name, mf), ...)
    units: str = ""

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((str(n), mf) for n, mf in self.terms))
        if not self.lo < self.hi:
            raise FuzzyError(f"{self.name}: range needs lo < hi, got [{self.lo}, {self.hi}]")
        names = [n for n, _ in self.terms]
        if len(set(names)) != len(names):
            raise FuzzyError(f"{self.name}: duplicate term names {names}")
        if not names:
            raise FuzzyError(f"{self.name}: no terms")
        for n, mf in self.terms:
            s_lo, s_hi = mf.support
            if s_hi < self.lo or s_lo > self.hi:
                raise FuzzyError(f"{self.name}.{n}: support {mf.support} misses the range")

    @property
    def term_names(self) -> tuple:
        return tuple(n for n, _ in self.terms)

    def term_index(self, name: str) -> int:
        try:
            return self.term_names.index(name)
        except ValueError:
            raise FuzzyError(f"{self.name}: no term {name!r}") from None

    def mf(self, term: Union[int, str]) -> MembershipFunction:
        if isinstance(term, str):
            term = self.term_index(term)
        return self.terms[term][1]

    def clamp(self, x: float) -> float:
        return min(max(x, self.lo), self.hi)

    def grades(self, x: float) -> list:
        x = self.clamp(x)
        return [mf.grade(x) for _, mf in self.terms]


@dataclass(frozen=True)
class Rule:
    """IF input_k is term_k AND ... THEN output is ``consequent``.

    ``antecedents`` holds one ``(variable_index, term_index)`` pair per input
    variable; ``consequent`` indexes a term of the output variable.
    """

    antecedents: tuple
    consequent: int

    def __post_init__(self):
        object.__setattr__(self, "antecedents", tuple((int(v), int(t)) for v, t in self.antecedents))


@dataclass(frozen=True)
class RuleBase:
    inputs: tuple
    output: LinguisticVariable
    rules: tuple

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "rules", tuple(self.rules))
        if not self.rules:
            raise FuzzyError("rule base has no rules")
        n_in = len(self.inputs)
        for j, rule in enumerate(self.rules):
            used = sorted(v for v, _ in rule.antecedents)
            if used != list(range(n_in)):
                raise FuzzyError(f"rule {j}: needs exactly one antecedent per input, got {rule.antecedents}")
            for v, t in rule.antecedents:
                if not 0 <= t < len(self.inputs[v].terms):
                    raise FuzzyError(f"rule {j}: term index {t} invalid for {self.inputs[v].name}")
            if not 0 <= rule.consequent < len(self.output.terms):
                raise FuzzyError(f"rule {j}: consequent {rule.consequent} invalid")

    def __getstate__(self):
        # the packed kernel form is rebuilt lazily and may not pickle
        return {k: v for k, v in self.__dict__.items() if k != "packed"}

    @property
    def singleton_output(self) -> bool:
        return all(isinstance(mf, Singleton) for _, mf in self.output.terms)

    def consequent_value(self, rule: Rule) -> float:
        mf = self.output.terms[rule.consequent][1]
        if not isinstance(mf, Singleton):
            raise FuzzyError("weighted-average defuzzification needs singleton consequents")
        return mf.c

    @cached_property
    def packed(self):
        """Backend representation used by :mod:`fuzzycharge.kernels`."""
        return kernels.pack_rulebase(self)

    def check_inputs(self, crisp_inputs: Sequence[float]) -> None:
        if len(crisp_inputs) != len(self.inputs):
            raise FuzzyError(f"expected {len(self.inputs)} inputs, got {len(crisp_inputs)}")


def fire_strength(rule: Rule, rulebase: RuleBase, crisp_inputs: Sequence[float]) -> float:
    """Minimum of the rule's antecedent grades at the (clamped) crisp inputs."""
    rulebase.check_inputs(crisp_inputs)
    mu = 1.0
    for v, t in rule.antecedents:
        var = rulebase.inputs[v]
        mu = min(mu, var.terms[t][1].grade(var.clamp(crisp_inputs[v])))
    return mu


def weighted_average(strengths: Sequence[float], values: Sequence[float]) -> float:
    """``sum(mu * c) / sum(mu)``; raises :class:`AllRulesZero` when nothing fired."""
    num = 0.0
    den = 0.0
    for mu, c in zip(strengths, values):
        num += mu * c
        den += mu
    if den == 0.0:
        raise AllRulesZero("no rule fired")
    return num / den


def defuzzify_weighted_average(rulebase: RuleBase, crisp_inputs: Sequence[float]) -> float:
    """Crisp output of a singleton-consequent rule base.

    Evaluated through the compiled kernel when available; the result is
    bit-identical to ``weighted_average`` over :func:`fire_strength` values.
    """
    rulebase.check_inputs(crisp_inputs)
    num, den = kernels.weighted_sums(rulebase.packed, crisp_inputs)
    if den == 0.0:
        raise AllRulesZero(f"no rule fired at inputs {list(crisp_inputs)}")
    return num / den


@dataclass(frozen=True)
class FuzzyOutputSamples:
    z_grid: tuple
    grades: tuple = field(default=())

    def __post_init__(self):
        if len(self.z_grid) != len(self.grades):
            raise FuzzyError("z_grid and grades differ in length")


def infer_cri(rulebase: RuleBase, crisp_inputs: Sequence[float], z_grid: Sequence[float]) -> FuzzyOutputSamples:
    """Max-min compositional inference sampled on ``z_grid``.

    ``grade(z) = max_j min(mu_j, mu_Cj(z))`` with ``mu_j`` the rule's fire
    strength. No defuzzification is applied.
    """
    strengths = [fire_strength(r, rulebase, crisp_inputs) for r in rulebase.rules]
    out_mfs = [rulebase.output.terms[r.consequent][1] for r in rulebase.rules]
    grades = []
    for z in z_grid:
        g = 0.0
        for mu, mf in zip(strengths, out_mfs):
            g = max(g, min(mu, mf.grade(z)))
        grades.append(g)
    return FuzzyOutputSamples(tuple(z_grid), tuple(grades))
