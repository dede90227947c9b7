"""Pure-Python inference kernels.

Same interface and floating-point operation order as the Cython module
``_ckernels``, so both backends return bit-identical results.
"""
from math import exp

NAME = "python"


class Packed:
    __slots__ = ("kinds", "params", "lo", "hi", "offsets", "rule_terms", "cons", "n_inputs")

    def __init__(self, kinds, params, lo, hi, offsets, rule_terms, cons):
        self.kinds = [int(k) for k in kinds]
        self.params = [tuple(float(v) for v in p) for p in params]
        self.lo = [float(v) for v in lo]
        self.hi = [float(v) for v in hi]
        self.offsets = [int(v) for v in offsets]
        self.rule_terms = [tuple(int(t) for t in r) for r in rule_terms]
        self.cons = [float(c) for c in cons]
        self.n_inputs = len(self.lo)


def pack(kinds, params, lo, hi, offsets, rule_terms, cons):
    return Packed(kinds, params, lo, hi, offsets, rule_terms, cons)


def grade(kind, p, x):
    if kind == 1:
        a, b, c = p[0], p[1], p[2]
        if x < a or x > c:
            return 0.0
        if x == b:
            return 1.0
        if x < b:
            return (x - a) / (b - a)
        return (c - x) / (c - b)
    if kind == 2:
        a, b, c, d = p[0], p[1], p[2], p[3]
        if x < a or x > d:
            return 0.0
        if b <= x <= c:
            return 1.0
        if x < b:
            return (x - a) / (b - a)
        return (d - x) / (d - c)
    if kind == 3:
        z = (x - p[0]) / p[1]
        return exp(-0.5 * z * z)
    return 1.0 if x == p[0] else 0.0


def _clamp(x, lo, hi):
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x


def _input_grades(pk, v, x):
    x = _clamp(x, pk.lo[v], pk.hi[v])
    return [grade(pk.kinds[t], pk.params[t], x) for t in range(pk.offsets[v], pk.offsets[v + 1])]


def _all_grades(pk, inputs):
    # grades indexed by global term id
    g = []
    for v in range(pk.n_inputs):
        g.extend(_input_grades(pk, v, inputs[v]))
    return g


def _sums(pk, g):
    num = 0.0
    den = 0.0
    for terms, c in zip(pk.rule_terms, pk.cons):
        mu = 1.0
        for t in terms:
            gt = g[t]
            if gt < mu:
                mu = gt
        num += mu * c
        den += mu
    return num, den


def fire_strengths(pk, inputs):
    g = _all_grades(pk, inputs)
    out = []
    for terms in pk.rule_terms:
        mu = 1.0
        for t in terms:
            if g[t] < mu:
                mu = g[t]
        out.append(mu)
    return out


def weighted_sums(pk, inputs):
    return _sums(pk, _all_grades(pk, inputs))


def stop_indices(pk, xs, times, threshold):
    """First index into ``times`` where the output is at or below ``threshold``.

    Two-input rule bases only: input 0 is held at each ``x`` in ``xs``, input 1
    sweeps ``times``. Returns -1 when the output never drops that low and -2
    when an all-zero firing is hit before that.
    """
    n0 = pk.offsets[1]
    tgrades = [_input_grades(pk, 1, t) for t in times]
    out = []
    for x in xs:
        g0 = _input_grades(pk, 0, x)
        res = -1
        for k, g1 in enumerate(tgrades):
            num = 0.0
            den = 0.0
            for terms, c in zip(pk.rule_terms, pk.cons):
                mu = 1.0
                for t in terms:
                    gt = g0[t] if t < n0 else g1[t - n0]
                    if gt < mu:
                        mu = gt
                num += mu * c
                den += mu
            if den == 0.0:
                res = -2
                break
            if num / den <= threshold:
                res = k
                break
        out.append(res)
    return out


def surface(pk, xs, ys):
    """Defuzzified output on the ``xs`` x ``ys`` grid (NaN where nothing fires)."""
    ygrades = [_input_grades(pk, 1, y) for y in ys]
    rows = []
    for x in xs:
        g0 = _input_grades(pk, 0, x)
        row = []
        for g1 in ygrades:
            num, den = _sums(pk, g0 + g1)
            row.append(num / den if den != 0.0 else float("nan"))
        rows.append(row)
    return rows
