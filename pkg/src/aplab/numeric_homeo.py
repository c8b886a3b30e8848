"""Homeomorphisms that are not piecewise linear, evaluated by certified enclosures.

An expression tree is built from four node kinds:

* :class:`PL` wraps an exact :class:`~aplab.pl_homeo.PLHomeo`;
* :class:`CdfMap` is a cumulative distribution function, either the closed-form
  reference CDF or a :class:`MixtureCdf` (weighted sum of pushforwards);
* :class:`Inverse` and :class:`Compose` combine children.

Every node can enclose the image of an interval, the preimage of an interval,
and the range of its derivative on an interval.  Enclosure endpoints are exact
rationals, so every bound reported here is sound; the only approximation is the
bisection that inverts a mixture CDF, and its error is carried in the enclosure
width.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from functools import partial
from typing import NamedTuple

from aplab import kernels
from aplab._workers import pmap
from aplab.errors import NonConvergence
from aplab.pl_homeo import PLHomeo, compose as pl_compose, inverse as pl_inverse
from aplab.rational import Q, bits_for, dyadic_round

DEFAULT_TOL = Fraction(1, 1 << 40)
MAX_BISECTIONS = 200
# each refinement round shrinks the internal tolerance 16-fold
_MAX_REFINE = 40


class Interval(NamedTuple):
    lo: Fraction
    hi: Fraction

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi


# -- CDFs -------------------------------------------------------------------


class ReferenceCdf:
    """CDF of the reference probability measure (flat core, inverse-square tails)."""

    name = "reference"

    def value(self, x):
        return kernels.ref_cdf(x)

    def invert(self, lo, hi, tol):
        return kernels.ref_cdf_inv(lo), kernels.ref_cdf_inv(hi)

    def density(self, x):
        return kernels.ref_density(x)

    def density_bounds(self, lo, hi):
        return kernels.ref_density_bounds(lo, hi)

    def __repr__(self):
        return "ReferenceCdf()"


REFERENCE = ReferenceCdf()


class MixtureCdf:
    """``x -> sum_g w_g F(g^{-1}(x))`` for PL maps ``g`` and the reference CDF ``F``.

    Forward evaluation is exact; inversion is bisection (bracket doubling from
    ``[-1, 1]``, then halving) capped at :data:`MAX_BISECTIONS` steps.
    """

    name = "mixture"

    def __init__(self, weights, maps):
        self.weights = tuple(Q(w) for w in weights)
        self.maps = tuple(maps)
        if len(self.weights) != len(self.maps):
            raise ValueError("one weight per map")
        self._kernel = kernels.Mixture(self.weights, [kernels.table_of(pl_inverse(g)) for g in self.maps])

    def value(self, x):
        return self._kernel.cdf(x)

    def density(self, x):
        return self._kernel.density(x)

    def density_bounds(self, lo, hi):
        return self._kernel.density_bounds(lo, hi)

    def invert(self, lo, hi, tol):
        a, b = self._kernel.invert(lo, tol, MAX_BISECTIONS)
        if hi != lo:
            b = self._kernel.invert(hi, tol, MAX_BISECTIONS)[1]
        return a, b

    def __reduce__(self):
        return (MixtureCdf, (self.weights, self.maps))

    def __repr__(self):
        return f"MixtureCdf({len(self.maps)} terms)"


# -- expression nodes -------------------------------------------------------


class HomeoExpr:
    """Base node.  ``meta`` carries optional analytic data (e.g. a Radon-Nikodym constant)."""

    meta: dict

    def enclose(self, lo, hi, tol):
        raise NotImplementedError

    def enclose_inverse(self, lo, hi, tol):
        raise NotImplementedError

    def slope_bounds(self, lo, hi, tol):
        raise NotImplementedError

    def as_pl(self):
        """The equivalent PLHomeo if every leaf is PL, else ``None``."""
        return None

    def inverse(self) -> "HomeoExpr":
        return Inverse(self)


class PL(HomeoExpr):
    def __init__(self, h: PLHomeo, meta=None):
        if not isinstance(h, PLHomeo):
            raise TypeError("PL node needs a PLHomeo")
        self.h = h
        self.meta = dict(meta or {})
        self._inv = None

    def enclose(self, lo, hi, tol):
        return self.h(lo), self.h(hi)

    def enclose_inverse(self, lo, hi, tol):
        return self.h.preimage(lo), self.h.preimage(hi)

    def slope_bounds(self, lo, hi, tol):
        s = self.h.slopes_on(lo, hi)
        return min(s), max(s)

    def as_pl(self):
        return self.h

    def __repr__(self):
        return f"PL({self.h})"


class CdfMap(HomeoExpr):
    """Increasing bijection from the line onto ``(0, 1)``."""

    def __init__(self, cdf, meta=None):
        self.cdf = cdf
        self.meta = dict(meta or {})

    def enclose(self, lo, hi, tol):
        return self.cdf.value(lo), self.cdf.value(hi)

    def enclose_inverse(self, lo, hi, tol):
        return self.cdf.invert(lo, hi, tol)

    def slope_bounds(self, lo, hi, tol):
        return self.cdf.density_bounds(lo, hi)

    def __repr__(self):
        return f"CdfMap({self.cdf!r})"


class Inverse(HomeoExpr):
    def __init__(self, child: HomeoExpr, meta=None):
        self.child = child
        self.meta = dict(meta or {})

    def enclose(self, lo, hi, tol):
        return self.child.enclose_inverse(lo, hi, tol)

    def enclose_inverse(self, lo, hi, tol):
        return self.child.enclose(lo, hi, tol)

    def slope_bounds(self, lo, hi, tol):
        a, b = self.child.enclose_inverse(lo, hi, tol)
        s, t = self.child.slope_bounds(a, b, tol)
        return 1 / t, 1 / s

    def as_pl(self):
        h = self.child.as_pl()
        return None if h is None else pl_inverse(h)

    def inverse(self):
        return self.child

    def __repr__(self):
        return f"Inverse({self.child!r})"


class Compose(HomeoExpr):
    """``left o right`` (``right`` applied first)."""

    def __init__(self, left: HomeoExpr, right: HomeoExpr, meta=None):
        self.left = left
        self.right = right
        self.meta = dict(meta or {})

    def enclose(self, lo, hi, tol):
        a, b = self.right.enclose(lo, hi, tol)
        return self.left.enclose(a, b, tol)

    def enclose_inverse(self, lo, hi, tol):
        a, b = self.left.enclose_inverse(lo, hi, tol)
        return self.right.enclose_inverse(a, b, tol)

    def slope_bounds(self, lo, hi, tol):
        s0, s1 = self.right.slope_bounds(lo, hi, tol)
        a, b = self.right.enclose(lo, hi, tol)
        t0, t1 = self.left.slope_bounds(a, b, tol)
        return s0 * t0, s1 * t1

    def as_pl(self):
        left, right = self.left.as_pl(), self.right.as_pl()
        if left is None or right is None:
            return None
        return pl_compose(left, right)

    def inverse(self):
        return Compose(self.right.inverse(), self.left.inverse())

    def __repr__(self):
        return f"Compose({self.left!r}, {self.right!r})"


def chain(*nodes: HomeoExpr, meta=None) -> HomeoExpr:
    """``chain(f, g, h)`` is ``f o g o h``."""
    out = nodes[-1]
    for node in reversed(nodes[:-1]):
        out = Compose(node, out)
    if meta:
        out.meta.update(meta)
    return out


def lift(e) -> HomeoExpr:
    return PL(e) if isinstance(e, PLHomeo) else e


# -- operations -------------------------------------------------------------


def _refine(fn, tol):
    t = tol / 4
    for _ in range(_MAX_REFINE):
        a, b = fn(t)
        if b - a <= tol:
            return Interval(a, b)
        t /= 16
    raise NonConvergence(f"enclosure width stuck above {tol}")


def eval_enclosure(e: HomeoExpr, x, tol=DEFAULT_TOL) -> Interval:
    """Interval of width <= ``tol`` containing ``e(x)``."""
    x, tol = Q(x), Q(tol)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    return _refine(lambda t: e.enclose(x, x, t), tol)


def invert_point(e: HomeoExpr, y, tol=DEFAULT_TOL) -> Interval:
    """Interval of width <= ``tol`` containing the unique ``x`` with ``e(x) = y``."""
    y, tol = Q(y), Q(tol)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    return _refine(lambda t: e.enclose_inverse(y, y, t), tol)


def _enclose_at(e, tol, x):
    return eval_enclosure(e, x, tol)


def eval_many(e: HomeoExpr, xs, tol=DEFAULT_TOL) -> list[Interval]:
    """Enclosures at many points (fans out over worker processes for large grids)."""
    return pmap(partial(_enclose_at, e, Q(tol)), [Q(x) for x in xs])


def _cell_error(x0, x1, p0, p1, slopes):
    """Certified sup-distance between the function and the chord through the stored values.

    ``p = (lo, hi, v)`` is an enclosure plus the stored value.  Two bounds are
    combined: the monotone rectangle ``[lo0, hi1]`` and, given derivative
    bounds ``[s, t]``, the chord deviation ``(t - s) * h / 4``.
    """
    lo0, hi0, v0 = p0
    lo1, hi1, v1 = p1
    rect = max(hi1 - v0, v1 - lo0)
    if slopes is None:
        return rect
    s, t = slopes
    r = max(hi0 - v0, v0 - lo0, hi1 - v1, v1 - lo1)
    return min(rect, (t - s) * (x1 - x0) / 4 + r)


def certified_pl_approx(e: HomeoExpr, window, err, *, max_cells=1 << 16, return_bound=False):
    """PL homeomorphism within ``err`` of ``e`` on ``window`` (sup norm, certified).

    Adaptive: the cell with the largest certified error is split first.
    Outside the window the result continues with the slopes of the extreme
    cells; no bound is claimed there.
    """
    lo, hi = (Q(w) for w in window)
    err = Q(err)
    if not lo < hi:
        raise ValueError("window must have positive length")
    exact = e.as_pl()
    if exact is not None:
        return (exact, Fraction(0)) if return_bound else exact

    tol = err / 8
    bits = bits_for(err / 64)

    def sample(x):
        a, b = e.enclose(x, x, tol)
        if b - a > tol:
            iv = eval_enclosure(e, x, tol)
            a, b = iv.lo, iv.hi
        v = (a + b) / 2
        if v.denominator.bit_length() > bits + 8:
            v = dyadic_round(v, bits)
        return (a, b, v)

    def slopes(x0, x1):
        try:
            return e.slope_bounds(x0, x1, tol)
        except (ZeroDivisionError, NotImplementedError):
            return None

    n0 = 16
    xs = [lo + (hi - lo) * i / n0 for i in range(n0 + 1)]
    vals = {x: sample(x) for x in xs}
    heap = []
    for x0, x1 in zip(xs, xs[1:]):
        heapq.heappush(heap, (-_cell_error(x0, x1, vals[x0], vals[x1], slopes(x0, x1)), x0, x1))
    cells = n0
    while -heap[0][0] > err:
        _, x0, x1 = heapq.heappop(heap)
        m = (x0 + x1) / 2
        vals[m] = sample(m)
        for a, b in ((x0, m), (m, x1)):
            heapq.heappush(heap, (-_cell_error(a, b, vals[a], vals[b], slopes(a, b)), a, b))
        cells += 1
        if cells > max_cells:
            raise NonConvergence(f"certified PL approximation needs more than {max_cells} cells")
    bound = -heap[0][0]
    grid = sorted(vals)
    ys = [vals[x][2] for x in grid]
    for i in range(1, len(ys)):
        if ys[i] <= ys[i - 1]:
            # rounding collapsed an increment; fall back to unrounded midpoints
            mids = [(vals[x][0] + vals[x][1]) / 2 for x in grid]
            bound += max(abs(m - y) for m, y in zip(mids, ys))
            ys = mids
            break
    ls = (ys[1] - ys[0]) / (grid[1] - grid[0])
    rs = (ys[-1] - ys[-2]) / (grid[-1] - grid[-2])
    h = PLHomeo(zip(grid, ys), ls, rs)
    return (h, bound) if return_bound else h


def lipschitz_estimate(e: HomeoExpr, window, grid_n: int, tol=DEFAULT_TOL):
    """Certified lower bound for the Lipschitz constant on a grid, plus the analytic hint.

    The lower bound is the largest certified difference quotient between
    consecutive grid points (a quotient over a wider pair is an average of
    these).  When ``e.meta`` holds ``"rn_L"`` the hint is the grid maximum of
    ``L * f(x) / f(e(x))`` with ``f`` the reference density, using the
    smallest density over each enclosure.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    lo, hi = (Q(w) for w in window)
    xs = [lo + (hi - lo) * i / (grid_n - 1) for i in range(grid_n)]
    ivs = eval_many(e, xs, tol)
    lower = None
    for (x0, i0), (x1, i1) in zip(zip(xs, ivs), zip(xs[1:], ivs[1:])):
        q = (i1.lo - i0.hi) / (x1 - x0)
        lower = q if lower is None else max(lower, q)
    hint = None
    L = e.meta.get("rn_L")
    if L is not None:
        for x, iv in zip(xs, ivs):
            fmin, _ = kernels.ref_density_bounds(iv.lo, iv.hi)
            b = L * kernels.ref_density(x) / fmin
            hint = b if hint is None else max(hint, b)
    return lower, hint
