# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernels: the same API as ``_kernels_py`` but with gmpy2 ``mpq``
arithmetic inside typed loops.  Fractions in, Fractions out."""

from fractions import Fraction

from gmpy2 import mpq

from aplab.errors import BracketFailure, NonConvergence, OutOfRange

BACKEND = "cython"

cdef object _ZERO = mpq(0)
cdef object _ONE = mpq(1)
cdef object _QUARTER = mpq(1, 4)
cdef object _THREE_QUARTERS = mpq(3, 4)

try:
    Fraction(1, 1, _normalize=False)
    _FAST_FRACTION = True
except TypeError:
    _FAST_FRACTION = False


cdef inline object _q(object x):
    if type(x) is int:
        return mpq(x)
    return mpq(x.numerator, x.denominator)


cdef inline object _f(object q):
    # mpq is always reduced with positive denominator
    if _FAST_FRACTION:
        return Fraction(int(q.numerator), int(q.denominator), _normalize=False)
    return Fraction(int(q.numerator), int(q.denominator))


cdef inline object _density(object x):
    if -1 <= x <= 1:
        return _QUARTER
    return 1 / (4 * x * x)


cdef inline object _cdf(object x):
    if x <= -1:
        return -1 / (4 * x)
    if x >= 1:
        return 1 - 1 / (4 * x)
    return (x + 2) / 4


cdef inline Py_ssize_t _bisect_right(list a, object x):
    cdef Py_ssize_t lo = 0, hi = len(a), mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if x < a[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


cdef inline Py_ssize_t _bisect_left(list a, object x):
    cdef Py_ssize_t lo = 0, hi = len(a), mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


def ref_density(x):
    return _f(_density(_q(x)))


def ref_cdf(x):
    return _f(_cdf(_q(x)))


def ref_cdf_inv(p):
    cdef object q = _q(p)
    if not 0 < q < 1:
        raise OutOfRange(f"probability {p} outside (0, 1)")
    if q <= _QUARTER:
        return _f(-1 / (4 * q))
    if q >= _THREE_QUARTERS:
        return _f(1 / (4 * (1 - q)))
    return _f(4 * q - 2)


cdef tuple _density_bounds(object lo, object hi):
    cdef object peak
    if lo <= 0 <= hi:
        peak = _ZERO
    elif lo > 0:
        peak = lo
    else:
        peak = hi
    return min(_density(lo), _density(hi)), _density(peak)


def ref_density_bounds(lo, hi):
    a, b = _density_bounds(_q(lo), _q(hi))
    return _f(a), _f(b)


cdef class PLTable:
    cdef public list xs, ys, sl, all_s
    cdef public object ls, rs, b
    cdef Py_ssize_t n

    def __init__(self, xs, ys, left_slope, right_slope, intercept=None):
        self.xs = [_q(x) for x in xs]
        self.ys = [_q(y) for y in ys]
        self.ls = _q(left_slope)
        self.rs = _q(right_slope)
        self.b = None if intercept is None else _q(intercept)
        self.n = len(self.xs)
        self.sl = [(self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i]) for i in range(self.n - 1)]
        self.all_s = [self.ls] + self.sl + [self.rs]

    cdef object ev(self, object x):
        cdef Py_ssize_t i
        if self.n == 0:
            return self.ls * x + self.b
        if x <= self.xs[0]:
            return self.ys[0] + self.ls * (x - self.xs[0])
        if x >= self.xs[self.n - 1]:
            return self.ys[self.n - 1] + self.rs * (x - self.xs[self.n - 1])
        i = _bisect_right(self.xs, x) - 1
        return self.ys[i] + self.sl[i] * (x - self.xs[i])

    cdef object sd(self, object x):
        cdef Py_ssize_t i
        if self.n == 0:
            return self.ls
        i = _bisect_right(self.xs, x)
        return self.all_s[i]

    cdef tuple srange(self, object lo, object hi):
        cdef Py_ssize_t i, j
        if self.n == 0:
            return self.ls, self.ls
        if lo < hi:
            i = _bisect_right(self.xs, lo)
            j = _bisect_left(self.xs, hi)
        else:
            i = _bisect_left(self.xs, lo)
            j = _bisect_right(self.xs, lo)
        cand = self.all_s[i:j + 1]
        return min(cand), max(cand)

    def __call__(self, x):
        return _f(self.ev(_q(x)))

    def eval_many(self, points):
        return [_f(self.ev(_q(x))) for x in points]

    def slope(self, x):
        return _f(self.sd(_q(x)))

    def slope_range(self, lo, hi):
        a, b = self.srange(_q(lo), _q(hi))
        return _f(a), _f(b)


cdef class Mixture:
    cdef list w
    cdef list t
    cdef Py_ssize_t n

    def __init__(self, weights, tables):
        self.w = [_q(x) for x in weights]
        self.t = list(tables)
        self.n = len(self.w)

    cdef object _cdf_q(self, object x):
        cdef object acc = _ZERO
        cdef Py_ssize_t i
        cdef PLTable tab
        for i in range(self.n):
            tab = <PLTable>self.t[i]
            acc += self.w[i] * _cdf(tab.ev(x))
        return acc

    def cdf(self, x):
        return _f(self._cdf_q(_q(x)))

    def density(self, x):
        cdef object acc = _ZERO
        cdef object xq = _q(x)
        cdef Py_ssize_t i
        cdef PLTable tab
        for i in range(self.n):
            tab = <PLTable>self.t[i]
            acc += self.w[i] * _density(tab.ev(xq)) * tab.sd(xq)
        return _f(acc)

    def density_bounds(self, lo, hi):
        cdef object mn = _ZERO, mx = _ZERO
        cdef object l = _q(lo), h = _q(hi)
        cdef Py_ssize_t i
        cdef PLTable tab
        for i in range(self.n):
            tab = <PLTable>self.t[i]
            dlo, dhi = _density_bounds(tab.ev(l), tab.ev(h))
            slo, shi = tab.srange(l, h)
            mn += self.w[i] * dlo * slo
            mx += self.w[i] * dhi * shi
        return _f(mn), _f(mx)

    def invert(self, p, tol, int max_iter=200, int max_bracket=200):
        cdef object pq = _q(p), tq = _q(tol)
        cdef object lo = -_ONE, hi = _ONE, mid, v
        cdef int n = 0, k
        if not 0 < pq < 1:
            raise OutOfRange(f"probability {p} outside (0, 1)")
        while self._cdf_q(lo) > pq:
            lo *= 2
            n += 1
            if n > max_bracket:
                raise BracketFailure(f"no lower bracket for p={p}")
        while self._cdf_q(hi) < pq:
            hi *= 2
            n += 1
            if n > max_bracket:
                raise BracketFailure(f"no upper bracket for p={p}")
        for k in range(max_iter):
            if hi - lo <= tq:
                return _f(lo), _f(hi)
            mid = (lo + hi) / 2
            v = self._cdf_q(mid)
            if v == pq:
                return _f(mid), _f(mid)
            if v < pq:
                lo = mid
            else:
                hi = mid
        if hi - lo <= tq:
            return _f(lo), _f(hi)
        raise NonConvergence(f"bisection for p={p} exceeded {max_iter} steps")


def flow_sup_distance(PLTable table, s, t, lo, hi):
    cdef object sq = _q(s), tq = _q(t), l = _q(lo), h = _q(hi)
    cdef object best = _ZERO, d, c, x
    cdef set pts = {l, h}
    for x in table.xs:
        c = x + sq
        if l < c < h:
            pts.add(c)
        c = x + tq
        if l < c < h:
            pts.add(c)
    for x in pts:
        d = abs(table.ev(x - sq) + sq - table.ev(x - tq) - tq)
        if d > best:
            best = d
    return _f(best)
