"""Pure-Python kernels (``fractions.Fraction`` arithmetic).

Mirror of ``_kernels.pyx``; :mod:`aplab.kernels` picks whichever imports.
Every function takes and returns Fractions.
"""

from bisect import bisect_left, bisect_right
from fractions import Fraction

from aplab.errors import BracketFailure, NonConvergence, OutOfRange

BACKEND = "python"

_ZERO = Fraction(0)
_ONE = Fraction(1)
_HALF = Fraction(1, 2)
_QUARTER = Fraction(1, 4)


def ref_density(x):
    if -1 <= x <= 1:
        return _QUARTER
    return 1 / (4 * x * x)


def ref_cdf(x):
    if x <= -1:
        return -1 / (4 * x)
    if x >= 1:
        return 1 - 1 / (4 * x)
    return (x + 2) / 4


def ref_cdf_inv(p):
    if not 0 < p < 1:
        raise OutOfRange(f"probability {p} outside (0, 1)")
    if p <= _QUARTER:
        return -1 / (4 * p)
    if p >= 1 - _QUARTER:
        return 1 / (4 * (1 - p))
    return 4 * p - 2


def ref_density_bounds(lo, hi):
    """Exact (min, max) of the reference density on ``[lo, hi]`` (unimodal, peak plateau at 0)."""
    peak = _ZERO if lo <= 0 <= hi else (lo if lo > 0 else hi)
    return min(ref_density(lo), ref_density(hi)), ref_density(peak)


class PLTable:
    """Flat PL data for fast evaluation: breakpoints, piece slopes, tails."""

    def __init__(self, xs, ys, left_slope, right_slope, intercept=None):
        self.xs = list(xs)
        self.ys = list(ys)
        self.ls = left_slope
        self.rs = right_slope
        self.b = intercept
        self.sl = [(y1 - y0) / (x1 - x0) for x0, x1, y0, y1 in zip(self.xs, self.xs[1:], self.ys, self.ys[1:])]
        self.all_s = [self.ls] + self.sl + [self.rs]

    def __call__(self, x):
        xs = self.xs
        if not xs:
            return self.ls * x + self.b
        if x <= xs[0]:
            return self.ys[0] + self.ls * (x - xs[0])
        if x >= xs[-1]:
            return self.ys[-1] + self.rs * (x - xs[-1])
        i = bisect_right(xs, x) - 1
        return self.ys[i] + self.sl[i] * (x - xs[i])

    def eval_many(self, points):
        return [self(x) for x in points]

    def slope(self, x):
        """Right derivative."""
        xs = self.xs
        if not xs:
            return self.ls
        i = bisect_right(xs, x)
        if i == 0:
            return self.ls
        if i == len(xs):
            return self.rs
        return self.sl[i - 1]

    def slope_range(self, lo, hi):
        """(min, max) slope over the pieces meeting ``[lo, hi]`` (both sides of a lone point)."""
        xs = self.xs
        if not xs:
            return self.ls, self.ls
        if lo < hi:
            i, j = bisect_right(xs, lo), bisect_left(xs, hi)
        else:
            i, j = bisect_left(xs, lo), bisect_right(xs, lo)
        cand = self.all_s[i : j + 1]
        return min(cand), max(cand)


class Mixture:
    """CDF ``x -> sum_g w_g F(g^{-1} x)`` of a weighted family of pushforwards."""

    def __init__(self, weights, tables):
        self.w = list(weights)
        self.t = list(tables)

    def cdf(self, x):
        acc = _ZERO
        for w, t in zip(self.w, self.t):
            acc += w * ref_cdf(t(x))
        return acc

    def density(self, x):
        acc = _ZERO
        for w, t in zip(self.w, self.t):
            acc += w * ref_density(t(x)) * t.slope(x)
        return acc

    def density_bounds(self, lo, hi):
        mn = mx = _ZERO
        for w, t in zip(self.w, self.t):
            dlo, dhi = ref_density_bounds(t(lo), t(hi))
            slo, shi = t.slope_range(lo, hi)
            mn += w * dlo * slo
            mx += w * dhi * shi
        return mn, mx

    def invert(self, p, tol, max_iter=200, max_bracket=200):
        """Bracket ``[lo, hi]`` of width <= tol around the solution of ``cdf(x) = p``."""
        if not 0 < p < 1:
            raise OutOfRange(f"probability {p} outside (0, 1)")
        lo, hi = -_ONE, _ONE
        n = 0
        while self.cdf(lo) > p:
            lo *= 2
            n += 1
            if n > max_bracket:
                raise BracketFailure(f"no lower bracket for p={p}")
        while self.cdf(hi) < p:
            hi *= 2
            n += 1
            if n > max_bracket:
                raise BracketFailure(f"no upper bracket for p={p}")
        for _ in range(max_iter):
            if hi - lo <= tol:
                return lo, hi
            mid = (lo + hi) / 2
            v = self.cdf(mid)
            if v == p:
                return mid, mid
            if v < p:
                lo = mid
            else:
                hi = mid
        if hi - lo <= tol:
            return lo, hi
        raise NonConvergence(f"bisection for p={p} exceeded {max_iter} steps")


def flow_sup_distance(table, s, t, lo, hi):
    """``sup_{x in [lo, hi]} |g(x - s) + s - g(x - t) - t|`` for the PL map ``g`` in ``table``."""
    pts = {lo, hi}
    for b in table.xs:
        for c in (b + s, b + t):
            if lo < c < hi:
                pts.add(c)
    best = _ZERO
    for x in pts:
        d = abs(table(x - s) + s - table(x - t) - t)
        if d > best:
            best = d
    return best
