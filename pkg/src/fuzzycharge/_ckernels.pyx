# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inference kernels; see _pykernels for the reference semantics."""
from libc.math cimport exp
from libc.stdlib cimport malloc, free

NAME = "cython"

cdef enum:
    MAX_TERMS = 64


cdef inline double _grade(int kind, const double* p, double x) noexcept nogil:
    cdef double z
    if kind == 1:
        if x < p[0] or x > p[2]:
            return 0.0
        if x == p[1]:
            return 1.0
        if x < p[1]:
            return (x - p[0]) / (p[1] - p[0])
        return (p[2] - x) / (p[2] - p[1])
    if kind == 2:
        if x < p[0] or x > p[3]:
            return 0.0
        if p[1] <= x and x <= p[2]:
            return 1.0
        if x < p[1]:
            return (x - p[0]) / (p[1] - p[0])
        return (p[3] - x) / (p[3] - p[2])
    if kind == 3:
        z = (x - p[0]) / p[1]
        return exp(-0.5 * z * z)
    return 1.0 if x == p[0] else 0.0


cdef class Packed:
    cdef int n_terms, n_inputs, n_rules
    cdef int* kinds
    cdef double* params   # n_terms x 4
    cdef double* lo
    cdef double* hi
    cdef int* offsets     # n_inputs + 1
    cdef int* rule_terms  # n_rules x n_inputs, global term ids
    cdef double* cons

    def __cinit__(self, kinds, params, lo, hi, offsets, rule_terms, cons):
        cdef int i, j
        self.n_terms = len(kinds)
        self.n_inputs = len(lo)
        self.n_rules = len(cons)
        if self.n_terms > MAX_TERMS:
            raise ValueError("too many terms for the compiled kernel")
        self.kinds = <int*>malloc(self.n_terms * sizeof(int))
        self.params = <double*>malloc(self.n_terms * 4 * sizeof(double))
        self.lo = <double*>malloc(self.n_inputs * sizeof(double))
        self.hi = <double*>malloc(self.n_inputs * sizeof(double))
        self.offsets = <int*>malloc((self.n_inputs + 1) * sizeof(int))
        self.rule_terms = <int*>malloc(self.n_rules * self.n_inputs * sizeof(int))
        self.cons = <double*>malloc(self.n_rules * sizeof(double))
        if (not self.kinds or not self.params or not self.lo or not self.hi
                or not self.offsets or not self.rule_terms or not self.cons):
            raise MemoryError()
        for i in range(self.n_terms):
            self.kinds[i] = kinds[i]
            p = params[i]
            for j in range(4):
                self.params[4 * i + j] = p[j] if j < len(p) else 0.0
        for i in range(self.n_inputs):
            self.lo[i] = lo[i]
            self.hi[i] = hi[i]
        for i in range(self.n_inputs + 1):
            self.offsets[i] = offsets[i]
        for i in range(self.n_rules):
            self.cons[i] = cons[i]
            for j in range(self.n_inputs):
                self.rule_terms[i * self.n_inputs + j] = rule_terms[i][j]

    def __dealloc__(self):
        free(self.kinds)
        free(self.params)
        free(self.lo)
        free(self.hi)
        free(self.offsets)
        free(self.rule_terms)
        free(self.cons)


def pack(kinds, params, lo, hi, offsets, rule_terms, cons):
    return Packed(kinds, params, lo, hi, offsets, rule_terms, cons)


def grade(int kind, p, double x):
    cdef double buf[4]
    cdef int j
    for j in range(4):
        buf[j] = p[j] if j < len(p) else 0.0
    return _grade(kind, buf, x)


cdef inline void _input_grades(Packed pk, int v, double x, double* g) noexcept nogil:
    cdef int t
    if x < pk.lo[v]:
        x = pk.lo[v]
    elif x > pk.hi[v]:
        x = pk.hi[v]
    for t in range(pk.offsets[v], pk.offsets[v + 1]):
        g[t] = _grade(pk.kinds[t], &pk.params[4 * t], x)


cdef inline void _sums(Packed pk, const double* g, double* num, double* den) noexcept nogil:
    cdef int j, i
    cdef double mu, gt
    num[0] = 0.0
    den[0] = 0.0
    for j in range(pk.n_rules):
        mu = 1.0
        for i in range(pk.n_inputs):
            gt = g[pk.rule_terms[j * pk.n_inputs + i]]
            if gt < mu:
                mu = gt
        num[0] += mu * pk.cons[j]
        den[0] += mu


def fire_strengths(Packed pk, inputs):
    cdef double g[MAX_TERMS]
    cdef int v, j, i
    cdef double mu, gt
    for v in range(pk.n_inputs):
        _input_grades(pk, v, inputs[v], g)
    out = []
    for j in range(pk.n_rules):
        mu = 1.0
        for i in range(pk.n_inputs):
            gt = g[pk.rule_terms[j * pk.n_inputs + i]]
            if gt < mu:
                mu = gt
        out.append(mu)
    return out


def weighted_sums(Packed pk, inputs):
    cdef double g[MAX_TERMS]
    cdef double num, den
    cdef int v
    for v in range(pk.n_inputs):
        _input_grades(pk, v, inputs[v], g)
    _sums(pk, g, &num, &den)
    return num, den


def stop_indices(Packed pk, xs, times, double threshold):
    if pk.n_inputs != 2:
        raise ValueError("stop_indices needs a two-input rule base")
    cdef int nt = len(times)
    cdef int n0 = pk.offsets[1]
    cdef int n1 = pk.offsets[2] - n0
    cdef double g[MAX_TERMS]
    cdef double num, den
    cdef double* tg = <double*>malloc(nt * n1 * sizeof(double)) if nt > 0 else NULL
    cdef int k, i, res
    out = []
    try:
        for k in range(nt):
            _input_grades(pk, 1, times[k], g)
            for i in range(n1):
                tg[k * n1 + i] = g[n0 + i]
        for x in xs:
            _input_grades(pk, 0, x, g)
            res = -1
            for k in range(nt):
                for i in range(n1):
                    g[n0 + i] = tg[k * n1 + i]
                _sums(pk, g, &num, &den)
                if den == 0.0:
                    res = -2
                    break
                if num / den <= threshold:
                    res = k
                    break
            out.append(res)
    finally:
        free(tg)
    return out


def surface(Packed pk, xs, ys):
    cdef double g[MAX_TERMS]
    cdef double num, den
    rows = []
    for x in xs:
        _input_grades(pk, 0, x, g)
        row = []
        for y in ys:
            _input_grades(pk, 1, y, g)
            _sums(pk, g, &num, &den)
            row.append(num / den if den != 0.0 else float("nan"))
        rows.append(row)
    return rows
