"""Translation flow on representations, the universal representation, and
finite-window diagnostics (metric, almost fixed points, almost periods,
covering numbers of flow orbits).

A representation is a :class:`~aplab.group_action.GroupAction`.  The flow
conjugates every generator by a translation, ``Phi_s(rho)(g) = t_s o rho(g) o t_{-s}``.
Distances are measured on a window ``[-W, W]``; for PL actions every number
below is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from gmpy2 import mpq

from aplab import kernels
from aplab.errors import GeneratorMismatch
from aplab.group_action import GroupAction, word_eval
from aplab.numeric_homeo import Compose, DEFAULT_TOL, PL, eval_enclosure, lift
from aplab.pl_homeo import PLHomeo, _sweep, sup_abs_difference, translation
from aplab.rational import Q

DEFAULT_W = Fraction(20)
DEFAULT_S = Fraction(50)
DEFAULT_EPS = Fraction(1, 100)
DEFAULT_SAMPLES = 500


def _shift(g, s):
    if isinstance(g, PLHomeo):
        return g.shifted(s)
    return Compose(PL(translation(s)), Compose(lift(g), PL(translation(-s))))


def flow_translate(A: GroupAction, s) -> GroupAction:
    """``Phi_s``: every generator becomes ``x -> g(x - s) + s``."""
    s = Q(s)
    if s == 0:
        return A
    return A.with_generators({n: _shift(g, s) for n, g in A.generators.items()})


def univ_apply(A: GroupAction, g) -> GroupAction:
    """``Univ(g)(rho) = t_{-rho(g)(0)} o rho o t_{rho(g)(0)}`` (a flow translate by ``-rho(g)(0)``)."""
    return flow_translate(A, -_value(word_eval(A, g), Fraction(0)))


def _value(m, x):
    if isinstance(m, PLHomeo):
        return m(x)
    return eval_enclosure(m, x, DEFAULT_TOL).mid


def semiconjugacy_residual(A: GroupAction, g, h, s, x) -> Fraction:
    """``|Univ(g)(Phi_{-s} rho)(h)(x) - Phi_{-rho(g)(s)}(rho)(h)(x)|`` (zero for PL actions)."""
    s, x = Q(s), Q(x)
    lhs = univ_apply(flow_translate(A, -s), g)
    rhs = flow_translate(A, -_value(word_eval(A, g), s))
    return abs(_value(word_eval(lhs, h), x) - _value(word_eval(rhs, h), x))


def afp(A: GroupAction, window) -> tuple[Fraction, Fraction]:
    """Exact ``inf_x max_g |g(x) - x|`` over the window, with a minimizer.

    Among minimizers the one closest to 0 is returned (smaller on ties).
    """
    lo, hi = (Q(w) for w in window)
    ds = []
    for g in A.generators.values():
        if not isinstance(g, PLHomeo):
            raise TypeError("afp needs PL generators")
        ds.append(g.minus_identity())
    if lo == hi:
        return max(abs(d(lo)) for d in ds), lo
    xs = sorted({lo, hi}.union(*(d.breakpoints_in(lo, hi) for d in ds)))
    vals = [[mpq(v.numerator, v.denominator) for v in d.values_sorted(xs)] for d in ds]
    xs = [mpq(x.numerator, x.denominator) for x in xs]
    zero = mpq(0)
    # on each cell every |d| is convex, so the max is convex there; its
    # minimum sits at a cell end or at a crossing of the lines +-d
    cells = []
    for k in range(len(xs) - 1):
        lb = max(zero if u * w <= 0 else min(abs(u), abs(w)) for u, w in ((v[k], v[k + 1]) for v in vals))
        cells.append((lb, k))
    cells.sort()
    best = None
    cands = []
    for lb, k in cells:
        if best is not None and lb > best:
            break
        a, b = xs[k], xs[k + 1]
        ends = [(v[k], v[k + 1]) for v in vals]
        ends += [(-u, -w) for u, w in ends]
        floor = max(min(u, w) for u, w in ends)
        lines = [(u, (w - u) / (b - a)) for u, w in ends if max(u, w) >= floor]
        evals = [(a, max(u for u, _ in ends))]
        if len(lines) > 1:
            for x in _sweep(lines, a, +1, stop=b)[0]:
                t = x - a
                evals.append((x, max(u + m * t for u, m in lines)))
        evals.append((b, max(w for _, w in ends)))
        for x, v in evals:
            if best is None or v < best:
                best, cands = v, []
            if v == best:
                cands.append(x)
        for (x0, v0), (x1, v1) in zip(evals, evals[1:]):
            if v0 == best == v1 and x0 < 0 < x1:
                cands.append(zero)
    arg = min(cands, key=lambda x: (abs(x), x))
    return Fraction(int(best.numerator), int(best.denominator)), Fraction(int(arg.numerator), int(arg.denominator))


def rep_metric(A: GroupAction, B: GroupAction, W) -> Fraction:
    """``max_g sup_{|x| <= W} |rho_A(g)(x) - rho_B(g)(x)|`` over the shared generator names."""
    if set(A.generators) != set(B.generators):
        raise GeneratorMismatch(f"{sorted(A.generators)} vs {sorted(B.generators)}")
    W = Q(W)
    best = Fraction(0)
    for n, g in A.generators.items():
        h = B.generators[n]
        if not (isinstance(g, PLHomeo) and isinstance(h, PLHomeo)):
            raise TypeError("rep_metric needs PL generators")
        best = max(best, sup_abs_difference(g, h, (-W, W)))
    return best


class _FlowOrbit:
    """Distances between flow translates of one PL action via the kernel."""

    def __init__(self, A: GroupAction, W):
        if not A.is_pl:
            raise TypeError("flow diagnostics need PL generators")
        self.tables = [kernels.table_of(g) for g in A.generators.values()]
        self.W = Q(W)

    def distance(self, s, t) -> Fraction:
        best = Fraction(0)
        for tab in self.tables:
            d = kernels.flow_sup_distance(tab, s, t, -self.W, self.W)
            if d > best:
                best = d
        return best


@dataclass
class AlmostPeriodScan:
    shifts: list
    distances: list
    almost_periods: list
    max_gap: Fraction


def almost_periods(A: GroupAction, eps, S, step, W) -> AlmostPeriodScan:
    """Scan ``s = 0, step, 2 step, ... <= S`` for ``d_W(Phi_s A, A) <= eps``.

    ``max_gap`` is the largest gap between consecutive almost periods,
    counting the stretch from the last one to ``S``.
    """
    eps, S, step = Q(eps), Q(S), Q(step)
    if eps <= 0 or S <= 0 or step <= 0:
        raise ValueError("eps, S and step must be positive")
    orbit = _FlowOrbit(A, W)
    shifts, dists, found = [], [], []
    k = 0
    while k * step <= S:
        s = k * step
        d = orbit.distance(s, Fraction(0))
        shifts.append(s)
        dists.append(d)
        if d <= eps:
            found.append(s)
        k += 1
    gaps = [b - a for a, b in zip(found, found[1:])]
    gaps.append(S - found[-1])
    return AlmostPeriodScan(shifts, dists, found, max(gaps))


def covering_number(A: GroupAction, eps, samples: int, S, W) -> int:
    """Greedy ``eps``-net size of ``{Phi_{s_i} A}``, ``s_i = i S / samples``, ``0 <= i < samples``."""
    if samples < 1:
        raise ValueError("samples must be positive")
    eps, S = Q(eps), Q(S)
    orbit = _FlowOrbit(A, W)
    centers: list[Fraction] = []
    for i in range(samples):
        s = S * i / samples
        # newest centers first: nearby shifts are the likeliest cover
        if not any(orbit.distance(s, c) <= eps for c in reversed(centers)):
            centers.append(s)
    return len(centers)


@dataclass
class FlowWindowSample:
    """Per-generator displacement traces on a rational grid of ``[-W, W]``."""

    W: Fraction
    grid: list
    values: dict


def window_sample(A: GroupAction, W, n: int) -> FlowWindowSample:
    W = Q(W)
    grid = [-W + 2 * W * i / (n - 1) for i in range(n)]
    vals = {name: [_value(g, x) - x for x in grid] for name, g in A.generators.items()}
    return FlowWindowSample(W, grid, vals)
