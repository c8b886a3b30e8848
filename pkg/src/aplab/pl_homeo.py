"""Exact piecewise-linear maps of the real line with affine tails.

Two types live here.  :class:`PLFunction` is any continuous piecewise-affine
function with finitely many breakpoints; :class:`PLHomeo` adds the constraint
that every slope is positive, so the map is an orientation-preserving
homeomorphism and is closed under composition and inversion.

All data is :class:`fractions.Fraction`.  Values are immutable and kept in a
canonical form (no collinear breakpoints, tails stored as slopes only), so
``==`` is equality of maps.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from fractions import Fraction
from typing import Iterable, Sequence

from aplab.errors import ValidationError
from aplab.rational import Q, format_rational

__all__ = [
    "PLFunction",
    "PLHomeo",
    "identity",
    "affine",
    "translation",
    "compose",
    "inverse",
    "conjugate",
    "lipschitz_constant",
    "displacement",
    "displacement_extrema",
    "envelope",
    "sup_abs_difference",
]

_ZERO = Fraction(0)
_ONE = Fraction(1)


class PLFunction:
    """Continuous piecewise-affine function ``R -> R``.

    ``points`` is a strictly increasing (in x) sequence of ``(x, y)`` pairs;
    ``left_slope``/``right_slope`` are the slopes of the two unbounded
    pieces.  With no points the function is affine and ``intercept`` is
    required.
    """

    __slots__ = ("xs", "ys", "left_slope", "right_slope", "intercept", "slopes", "_hash")

    def __init__(self, points: Iterable = (), left_slope=None, right_slope=None, *, intercept=None):
        pts = [(Q(x), Q(y)) for x, y in points]
        for (x0, _), (x1, _) in zip(pts, pts[1:]):
            if not x0 < x1:
                raise ValidationError(f"breakpoint abscissae not strictly increasing at {x1}")
        if left_slope is None:
            raise ValidationError("a left tail slope is required")
        ls = Q(left_slope)
        rs = ls if right_slope is None else Q(right_slope)
        if not pts:
            if ls != rs:
                raise ValidationError("an affine map needs equal tail slopes")
            if intercept is None:
                raise ValidationError("an affine map needs an intercept")
            self._set(ls, rs, (), (), Q(intercept))
            return
        if intercept is not None:
            raise ValidationError("intercepts are derived from breakpoints, not stored")
        self._canonicalize(pts, ls, rs)

    def _set(self, ls, rs, xs, ys, intercept):
        self.left_slope = ls
        self.right_slope = rs
        self.xs = tuple(xs)
        self.ys = tuple(ys)
        self.intercept = intercept
        self.slopes = tuple(
            (y1 - y0) / (x1 - x0) for x0, x1, y0, y1 in zip(self.xs, self.xs[1:], self.ys, self.ys[1:])
        )
        self._hash = None

    def _canonicalize(self, pts, ls, rs):
        seg = [ls]
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            seg.append((y1 - y0) / (x1 - x0))
        seg.append(rs)
        kept = [p for i, p in enumerate(pts) if seg[i] != seg[i + 1]]
        if not kept:
            x0, y0 = pts[0]
            self._set(ls, ls, (), (), y0 - ls * x0)
        else:
            self._set(ls, rs, [p[0] for p in kept], [p[1] for p in kept], None)

    @classmethod
    def _raw(cls, xs, ys, ls, rs, intercept=None):
        # trusted constructor: data already canonical
        obj = cls.__new__(cls)
        obj._set(ls, rs, xs, ys, intercept)
        return obj

    # -- evaluation ---------------------------------------------------------

    def __call__(self, x) -> Fraction:
        x = x if isinstance(x, Fraction) else Q(x)
        xs = self.xs
        if not xs:
            return self.left_slope * x + self.intercept
        if x <= xs[0]:
            return self.ys[0] + self.left_slope * (x - xs[0])
        if x >= xs[-1]:
            return self.ys[-1] + self.right_slope * (x - xs[-1])
        i = bisect_right(xs, x) - 1
        return self.ys[i] + self.slopes[i] * (x - xs[i])

    def values_sorted(self, pts) -> list[Fraction]:
        """Values at an increasing sequence of points, in one merge pass."""
        xs, ys = self.xs, self.ys
        if not xs:
            return [self.left_slope * x + self.intercept for x in pts]
        out = []
        i, n = 0, len(xs)
        for x in pts:
            while i < n and xs[i] <= x:
                i += 1
            if i == 0:
                out.append(ys[0] + self.left_slope * (x - xs[0]))
            elif i == n:
                out.append(ys[-1] + self.right_slope * (x - xs[-1]))
            else:
                out.append(ys[i - 1] + self.slopes[i - 1] * (x - xs[i - 1]))
        return out

    def slope_at(self, x, side: str = "right") -> Fraction:
        """One-sided derivative at ``x``."""
        x = Q(x)
        xs = self.xs
        if not xs:
            return self.left_slope
        i = bisect_right(xs, x) if side == "right" else bisect_left(xs, x)
        if i == 0:
            return self.left_slope
        if i == len(xs):
            return self.right_slope
        return self.slopes[i - 1]

    # -- structure ----------------------------------------------------------

    @property
    def breakpoints(self) -> list[tuple[Fraction, Fraction]]:
        return list(zip(self.xs, self.ys))

    @property
    def is_affine(self) -> bool:
        return not self.xs

    def affine_coefficients(self) -> tuple[Fraction, Fraction]:
        if self.xs:
            raise ValueError("not an affine map")
        return self.left_slope, self.intercept

    def all_slopes(self) -> tuple[Fraction, ...]:
        return (self.left_slope, *self.slopes, self.right_slope)

    def pieces(self):
        """Yield ``(lo, hi, slope)`` for every affine piece; ``None`` marks an infinite end."""
        xs = self.xs
        if not xs:
            yield None, None, self.left_slope
            return
        yield None, xs[0], self.left_slope
        for i, s in enumerate(self.slopes):
            yield xs[i], xs[i + 1], s
        yield xs[-1], None, self.right_slope

    def slopes_on(self, lo, hi) -> list[Fraction]:
        """Slopes of the pieces that meet the closed interval ``[lo, hi]``."""
        lo, hi = Q(lo), Q(hi)
        out = []
        for a, b, s in self.pieces():
            if (a is None or a <= hi) and (b is None or b >= lo):
                if lo < hi and ((a is not None and a == hi) or (b is not None and b == lo)):
                    continue
                out.append(s)
        return out

    def breakpoints_in(self, lo, hi) -> list[Fraction]:
        i = bisect_left(self.xs, lo)
        j = bisect_right(self.xs, hi)
        return list(self.xs[i:j])

    def critical_points(self, lo, hi) -> list[Fraction]:
        """Window endpoints plus the breakpoints strictly inside."""
        lo, hi = Q(lo), Q(hi)
        inner = [x for x in self.breakpoints_in(lo, hi) if lo < x < hi]
        return [lo, *inner, hi] if lo < hi else [lo]

    def extrema(self, lo, hi):
        """Exact ``(min, argmin, max, argmax)`` on ``[lo, hi]`` (leftmost attaining points)."""
        best_lo = best_hi = None
        for x in self.critical_points(lo, hi):
            v = self(x)
            if best_lo is None or v < best_lo[0]:
                best_lo = (v, x)
            if best_hi is None or v > best_hi[0]:
                best_hi = (v, x)
        return best_lo[0], best_lo[1], best_hi[0], best_hi[1]

    # -- arithmetic that keeps the PL class ---------------------------------

    def __neg__(self) -> "PLFunction":
        if not self.xs:
            return PLFunction._raw((), (), -self.left_slope, -self.right_slope, -self.intercept)
        return PLFunction._raw(self.xs, tuple(-y for y in self.ys), -self.left_slope, -self.right_slope)

    def __sub__(self, other: "PLFunction") -> "PLFunction":
        return _pointwise(self, other, lambda a, b: a - b)

    def __add__(self, other: "PLFunction") -> "PLFunction":
        return _pointwise(self, other, lambda a, b: a + b)

    def minus_identity(self) -> "PLFunction":
        if not self.xs:
            return PLFunction.affine(self.left_slope - 1, self.intercept)
        return PLFunction(
            zip(self.xs, (y - x for x, y in zip(self.xs, self.ys))),
            self.left_slope - 1,
            self.right_slope - 1,
        )

    def shifted(self, s) -> "PLFunction":
        """Conjugate by the translation ``x -> x + s``: ``x -> f(x - s) + s``."""
        s = Q(s)
        if s == 0:
            return self
        cls = type(self)
        if not self.xs:
            m = self.left_slope
            return cls._raw((), (), m, m, self.intercept + s * (1 - m))
        return cls._raw(
            tuple(x + s for x in self.xs),
            tuple(y + s for y in self.ys),
            self.left_slope,
            self.right_slope,
        )

    @classmethod
    def affine(cls, slope, intercept=0):
        slope = Q(slope)
        return cls._checked_raw((), (), slope, slope, Q(intercept))

    @classmethod
    def _checked_raw(cls, xs, ys, ls, rs, intercept=None):
        return cls._raw(xs, ys, ls, rs, intercept)

    # -- identity & display -------------------------------------------------

    def _key(self):
        return (self.xs, self.ys, self.left_slope, self.right_slope, self.intercept)

    def __eq__(self, other):
        if not isinstance(other, PLFunction):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self):
        name = type(self).__name__
        if not self.xs:
            return f"{name}.affine({format_rational(self.left_slope)}, {format_rational(self.intercept)})"
        pts = ", ".join(f"({format_rational(x)}, {format_rational(y)})" for x, y in zip(self.xs, self.ys))
        return (
            f"{name}([{pts}], left_slope={format_rational(self.left_slope)}, "
            f"right_slope={format_rational(self.right_slope)})"
        )

    def __str__(self):
        if not self.xs:
            m, b = self.left_slope, self.intercept
            mx = "x" if m == 1 else f"{format_rational(m)}*x"
            if b == 0:
                return f"x -> {mx}"
            sign = "+" if b > 0 else "-"
            return f"x -> {mx} {sign} {format_rational(abs(b))}"
        return repr(self)


class PLHomeo(PLFunction):
    """Orientation-preserving PL homeomorphism of the line."""

    __slots__ = ()

    def __init__(self, points: Iterable = (), left_slope=None, right_slope=None, *, intercept=None):
        super().__init__(points, left_slope, right_slope, intercept=intercept)
        self._validate()

    def _validate(self):
        for s in self.all_slopes():
            if s <= 0:
                raise ValidationError(f"non-positive slope {format_rational(s)} in a homeomorphism")

    @classmethod
    def _checked_raw(cls, xs, ys, ls, rs, intercept=None):
        obj = cls._raw(xs, ys, ls, rs, intercept)
        obj._validate()
        return obj

    def preimage(self, y) -> Fraction:
        """Exact ``h^{-1}(y)`` without building the inverse map."""
        y = Q(y)
        if not self.xs:
            return (y - self.intercept) / self.left_slope
        ys = self.ys
        if y <= ys[0]:
            return self.xs[0] + (y - ys[0]) / self.left_slope
        if y >= ys[-1]:
            return self.xs[-1] + (y - ys[-1]) / self.right_slope
        i = bisect_right(ys, y) - 1
        return self.xs[i] + (y - ys[i]) / self.slopes[i]


def identity() -> PLHomeo:
    return PLHomeo.affine(1, 0)


def affine(slope, intercept=0) -> PLHomeo:
    return PLHomeo.affine(slope, intercept)


def translation(t) -> PLHomeo:
    return PLHomeo.affine(1, t)


def _as_function_class(*fs):
    return PLHomeo if all(isinstance(f, PLHomeo) for f in fs) else PLFunction


def compose(g: PLFunction, h: PLHomeo) -> PLFunction:
    """``g o h`` (apply ``h`` first).  ``h`` must be a homeomorphism."""
    if not isinstance(h, PLHomeo):
        raise TypeError("the inner map of a composition must be a PLHomeo")
    cls = _as_function_class(g, h)
    if not g.xs and not h.xs:
        m = g.left_slope * h.left_slope
        return cls._raw((), (), m, m, g.left_slope * h.intercept + g.intercept)
    xs = set(h.xs)
    xs.update(h.preimage(x) for x in g.xs)
    xs = sorted(xs)
    pts = [(x, g(h(x))) for x in xs]
    return cls(pts, g.left_slope * h.left_slope, g.right_slope * h.right_slope)


def inverse(h: PLHomeo) -> PLHomeo:
    if not h.xs:
        m = h.left_slope
        return PLHomeo._raw((), (), 1 / m, 1 / m, -h.intercept / m)
    # swapping coordinates of a canonical map is canonical
    return PLHomeo._raw(h.ys, h.xs, 1 / h.left_slope, 1 / h.right_slope)


def conjugate(h: PLHomeo, phi: PLHomeo) -> PLHomeo:
    """``phi o h o phi^{-1}``."""
    return compose(phi, compose(h, inverse(phi)))


def lipschitz_constant(h: PLFunction, window=None) -> Fraction:
    """Bilipschitz constant ``max(s, 1/s)`` over the pieces (restricted to ``window`` if given)."""
    slopes = h.all_slopes() if window is None else h.slopes_on(*window)
    k = _ONE
    for s in slopes:
        if s <= 0:
            raise ValidationError("bilipschitz constant needs positive slopes")
        k = max(k, s, 1 / s)
    return k


def displacement(h: PLFunction) -> PLFunction:
    """``x -> h(x) - x``."""
    return h.minus_identity()


def displacement_extrema(h: PLFunction, window) -> tuple[Fraction, Fraction]:
    lo, hi = (Q(w) for w in window)
    if lo > hi:
        raise ValueError("empty window")
    mn, _, mx, _ = displacement(h).extrema(lo, hi)
    return mn, mx


def _pointwise(f: PLFunction, g: PLFunction, op) -> PLFunction:
    xs = sorted(set(f.xs) | set(g.xs))
    if not xs:
        return PLFunction.affine(op(f.left_slope, g.left_slope), op(f.intercept, g.intercept))
    return PLFunction(
        [(x, op(f(x), g(x))) for x in xs],
        op(f.left_slope, g.left_slope),
        op(f.right_slope, g.right_slope),
    )


def sup_abs_difference(f: PLFunction, g: PLFunction, window) -> Fraction:
    """Exact ``sup |f - g|`` on a closed window."""
    lo, hi = (Q(w) for w in window)
    pts = {lo, hi}
    pts.update(x for x in f.breakpoints_in(lo, hi))
    pts.update(x for x in g.breakpoints_in(lo, hi))
    return max(abs(f(x) - g(x)) for x in pts)


def _sweep(lines, start, direction, stop=None):
    """Follow the upper envelope of ``lines`` from ``start``.

    ``lines`` holds ``(value_at_start, slope)`` pairs.  Moving right
    (``direction=+1``) the maximal line can only be overtaken by a steeper
    one, moving left by a shallower one.  Returns the crossing abscissae
    (strictly between ``start`` and ``stop``) and the index of the line that
    is on top at the far end.
    """
    d = direction
    cur = max(range(len(lines)), key=lambda i: (lines[i][0], d * lines[i][1]))
    pos = _ZERO  # offset from start
    crossings = []
    while True:
        v_cur, m_cur = lines[cur]
        best = None
        for j, (v_j, m_j) in enumerate(lines):
            if d * (m_j - m_cur) <= 0:
                continue
            t = (v_cur - v_j) / (m_j - m_cur)
            if d * t <= d * pos:
                continue
            key = (d * t, -d * m_j)
            if best is None or key < best[0]:
                best = (key, j, t)
        if best is None:
            return crossings, cur
        _, j, t = best
        if stop is not None and d * (start + t) >= d * stop:
            return crossings, cur
        if t != pos:
            crossings.append(start + t)
        cur, pos = j, t


def envelope(hs: Sequence[PLFunction], mode: str = "max") -> PLFunction:
    """Exact pointwise max (or min) of finitely many PL functions."""
    if not hs:
        raise ValueError("envelope of an empty family")
    if mode not in ("max", "min"):
        raise ValueError("mode must be 'max' or 'min'")
    if len(hs) == 1:
        return hs[0]
    fs = list(hs) if mode == "max" else [-h for h in hs]
    bps = sorted(set().union(*(f.xs for f in fs)))
    pts = set(bps)
    if not bps:
        lines0 = [(f(_ZERO), f.left_slope) for f in fs]
        right, top_r = _sweep(lines0, _ZERO, +1)
        left, top_l = _sweep(lines0, _ZERO, -1)
        pts.update(right)
        pts.update(left)
        pts.add(_ZERO)
    else:
        vals = [f.values_sorted(bps) for f in fs]
        left, top_l = _sweep([(v[0], f.left_slope) for f, v in zip(fs, vals)], bps[0], -1)
        pts.update(left)
        for k, (a, b) in enumerate(zip(bps, bps[1:])):
            # a line whose larger end value is below some line's smaller end
            # value stays below that line on the whole interval
            floor = max(min(v[k], v[k + 1]) for v in vals)
            lines = [(v[k], (v[k + 1] - v[k]) / (b - a)) for v in vals if max(v[k], v[k + 1]) >= floor]
            if len(lines) > 1:
                inner, _ = _sweep(lines, a, +1, stop=b)
                pts.update(inner)
        right, top_r = _sweep([(v[-1], f.right_slope) for f, v in zip(fs, vals)], bps[-1], +1)
        pts.update(right)
    pts = sorted(pts)
    tops = [max(col) for col in zip(*(f.values_sorted(pts) for f in fs))]
    env = PLFunction(list(zip(pts, tops)), fs[top_l].left_slope, fs[top_r].right_slope)
    return env if mode == "max" else -env
