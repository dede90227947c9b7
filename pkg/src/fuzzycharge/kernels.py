"""Backend selection for the inference kernels.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
pure-Python ``_pykernels`` module is loaded. Setting ``FUZZYCHARGE_PURE_PYTHON=1``
forces the fallback. Both backends produce bit-identical results.
"""
from __future__ import annotations

import importlib
import os

_FORCE_PY = os.environ.get("FUZZYCHARGE_PURE_PYTHON", "").strip() not in ("", "0")


def load_backend(name: str):
    """Import a backend module by name (``"cython"`` or ``"python"``)."""
    if name == "cython":
        return importlib.import_module("fuzzycharge._ckernels")
    if name == "python":
        return importlib.import_module("fuzzycharge._pykernels")
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends() -> list:
    names = ["python"]
    try:
        load_backend("cython")
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


if _FORCE_PY:
    _impl = load_backend("python")
else:
    try:
        _impl = load_backend("cython")
    except ImportError:
        _impl = load_backend("python")

BACKEND: str = _impl.NAME


def pack_rulebase(rulebase, backend=None):
    """Flatten a :class:`~fuzzycharge.fuzzy.RuleBase` for a kernel backend."""
    impl = backend or _impl
    kinds, params, lo, hi, offsets = [], [], [], [], [0]
    for var in rulebase.inputs:
        for _, mf in var.terms:
            kinds.append(mf.code)
            params.append(tuple(mf.params) + (0.0,) * (4 - len(mf.params)))
        lo.append(var.lo)
        hi.append(var.hi)
        offsets.append(len(kinds))
    rule_terms = []
    for rule in rulebase.rules:
        ids = [0] * len(rulebase.inputs)
        for v, t in rule.antecedents:
            ids[v] = offsets[v] + t
        rule_terms.append(ids)
    if rulebase.singleton_output:
        cons = [rulebase.consequent_value(r) for r in rulebase.rules]
    else:
        cons = [float("nan")] * len(rulebase.rules)
    return impl.pack(kinds, params, lo, hi, offsets, rule_terms, cons)


def weighted_sums(packed, inputs):
    return _impl.weighted_sums(packed, inputs)


def fire_strengths(packed, inputs):
    return _impl.fire_strengths(packed, inputs)


def stop_indices(packed, xs, times, threshold):
    return _impl.stop_indices(packed, xs, times, threshold)


def surface(packed, xs, ys):
    return _impl.surface(packed, xs, ys)
