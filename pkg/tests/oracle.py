"""Independent reference implementations used to check the package.

Everything here is written directly from the model definitions with numpy and
shares no code with ``fuzzycharge``.
"""
import math

import numpy as np


def tri(x, a, b, c):
    x = np.asarray(x, dtype=float)
    left = np.where(b > a, (x - a) / (b - a if b > a else 1.0), 1.0)
    right = np.where(c > b, (c - x) / (c - b if c > b else 1.0), 1.0)
    g = np.where(x < b, left, right)
    g = np.where(x == b, 1.0, g)
    return np.clip(np.where((x < a) | (x > c), 0.0, g), 0.0, 1.0)


def trap(x, a, b, c, d):
    x = np.asarray(x, dtype=float)
    up = (x - a) / (b - a) if b > a else np.ones_like(x)
    down = (d - x) / (d - c) if d > c else np.ones_like(x)
    g = np.minimum(np.minimum(up, 1.0), down)
    g = np.where((x >= b) & (x <= c), 1.0, g)
    return np.clip(np.where((x < a) | (x > d), 0.0, g), 0.0, 1.0)


def gauss(x, m, s):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * ((x - m) / s) ** 2)


def grades(kind, params, x):
    return {"triangular": tri, "trapezoidal": trap, "gaussian": gauss}[kind](x, *params)


def main_surface(mf_params, rules, dtemps, times, d_range=(0.0, 5.0), t_range=(0.0, 40.0)):
    """Weighted-average output over a (dtemp, time) grid.

    ``mf_params`` maps ``(variable, term) -> (kind, params)``; ``rules`` is the
    4 x 5 grid of "stop" / "continue".
    """
    d = np.clip(np.asarray(dtemps, dtype=float), *d_range)
    t = np.clip(np.asarray(times, dtype=float), *t_range)
    dterms = [k for k in mf_params if k[0] == "dtemp"]
    tterms = [k for k in mf_params if k[0] == "time"]
    gd = [grades(*mf_params[k], d) for k in dterms]
    gt = [grades(*mf_params[k], t) for k in tterms]
    num = np.zeros((len(d), len(t)))
    den = np.zeros((len(d), len(t)))
    for i, row in enumerate(rules):
        for j, cons in enumerate(row):
            mu = np.minimum.outer(gd[i], gt[j])
            num += mu * (1.0 if cons == "continue" else 0.0)
            den += mu
    with np.errstate(invalid="ignore", divide="ignore"):
        return num / den


def crisp_sixteen(d, t):
    """Interval table evaluated by explicit row lookups."""
    drow = 0 if d < 0.25 else 1 if d < 0.35 else 2 if d < 0.5 else 3
    tcol = 0 if t < 20 else 1 if t < 25 else 2 if t < 30 else 3
    stop_cells = {(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)}
    return "stop" if (drow, tcol) in stop_cells else "continue"


def euler_temperature(t_from, t_stab, tau, t_end, h=0.001):
    """Explicit Euler for dT/dt = -(T - t_stab)/tau; returns (times, temps)."""
    n = int(round(t_end / h))
    temps = np.empty(n + 1)
    temps[0] = t_from
    T = t_from
    for k in range(n):
        T = T - h * (T - t_stab) / tau
        temps[k + 1] = T
    return np.arange(n + 1) * h, temps


def t_stab(q, q_opt, t_opt, k):
    return t_opt + k * (q - q_opt) ** 2


def tests_in_day(tt, setup, day=720.0):
    # count completions one by one instead of dividing
    n, t = 0, 0.0
    while True:
        t += tt + setup
        if t > day + 1e-9:
            return n
        n += 1


def isclose(a, b, tol=1e-9):
    return math.isclose(a, b, rel_tol=0.0, abs_tol=tol)
