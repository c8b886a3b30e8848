"""Stage 2: straighten an action so every point is pushed by a bounded amount.

Starting from ``x_0 = 0`` the escape sequence climbs by the largest generator
image, ``x_{n+1} = max_g g(x_n)``, and descends by the smallest.  The PL map
sending ``x_n`` to ``n`` conjugates the action into one where single
generators move points by at most 2 and, on the squared generating set, some
element moves every point right by at least 1 and at most 4.  Everything here
is exact rational arithmetic on PL maps; certificates hold on a declared
window.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from aplab.errors import FixedPointDetected
from aplab.group_action import GroupAction, square_generating_set, symmetrize
from aplab.numeric_homeo import certified_pl_approx
from aplab.pl_homeo import (
    PLHomeo,
    conjugate,
    envelope,
    inverse,
    lipschitz_constant,
)
from aplab.rational import Q

DEFAULT_DEPTH = 64
SNAPSHOT_ERR = Fraction(1, 1 << 30)


@dataclass(frozen=True)
class EscapeSequence:
    """Points ``x_n`` for ``n`` in ``[-M, M]`` and the generators attaining each step.

    ``up[n]`` names the generator with ``g(x_n) = x_{n+1}`` and ``down[n]``
    the one with ``g(x_n) = x_{n-1}`` (lowest generator index on ties).
    """

    depth: int
    points: tuple
    up: tuple
    down: tuple

    def x(self, n: int) -> Fraction:
        return self.points[n + self.depth]

    def gap(self, n: int) -> Fraction:
        return self.x(n + 1) - self.x(n)

    def up_generator(self, n: int) -> str:
        return self.up[n + self.depth]

    @property
    def indices(self) -> range:
        return range(-self.depth, self.depth + 1)


def escape_sequence(A: GroupAction, M: int = DEFAULT_DEPTH) -> EscapeSequence:
    if M < 1:
        raise ValueError("depth must be at least 1")
    if not A.is_pl:
        raise TypeError("escape_sequence needs PL generators")
    if not A.symmetric:
        A = symmetrize(A)
    gens = list(A.generators.items())

    def step(x, pick):
        best_name, best = None, None
        for name, g in gens:
            v = g(x)
            if best is None or pick(v, best):
                best_name, best = name, v
        return best_name, best

    fwd = [Fraction(0)]
    for _ in range(M):
        _, v = step(fwd[-1], lambda a, b: a > b)
        if v <= fwd[-1]:
            raise FixedPointDetected(fwd[-1])
        fwd.append(v)
    bwd = [Fraction(0)]
    for _ in range(M):
        _, v = step(bwd[-1], lambda a, b: a < b)
        if v >= bwd[-1]:
            raise FixedPointDetected(bwd[-1])
        bwd.append(v)
    points = tuple(reversed(bwd[1:])) + tuple(fwd)
    # up[n] for n in [-M, M]: the generator realizing x_n -> x_{n+1}
    ups = []
    downs = []
    for n in range(-M, M + 1):
        x = points[n + M]
        ups.append(step(x, lambda a, b: a > b)[0])
        downs.append(step(x, lambda a, b: a < b)[0])
    return EscapeSequence(M, points, tuple(ups), tuple(downs))


def build_straightening(es: EscapeSequence) -> PLHomeo:
    """PL map with ``x_n -> n``, affine between, tails continuing the extreme pieces."""
    M = es.depth
    pts = [(es.x(n), Fraction(n)) for n in es.indices]
    return PLHomeo(pts, 1 / es.gap(-M), 1 / es.gap(M - 1))


def distortion_check(es: EscapeSequence, K) -> tuple[bool, Fraction, int | None]:
    """Exact scan of ``K^-1 gap(n+1) <= gap(n) <= K gap(n+1)``.

    Returns ``(passes, worst ratio, first failing n)``; the worst ratio is
    ``max(gap(n+1)/gap(n), gap(n)/gap(n+1))``.
    """
    K = Q(K)
    worst = Fraction(1)
    witness = None
    for n in range(-es.depth, es.depth - 1):
        a, b = es.gap(n), es.gap(n + 1)
        r = max(a / b, b / a)
        if r > worst:
            worst = r
        if r > K and witness is None:
            witness = n
    return witness is None, worst, witness


@dataclass
class Witness:
    x: Fraction
    generator: str
    bound: str
    value: Fraction


@dataclass
class RMembershipReport:
    window: tuple
    K_bound: Fraction
    C: Fraction
    D: Fraction
    max_slope: dict = field(default_factory=dict)
    min_displacement: tuple = ()  # (min over window of the min-envelope displacement, max of it)
    max_displacement: tuple = ()
    checked_points: int = 0
    witnesses: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.witnesses


def _argbest(A, x, pick):
    best = None
    for name, g in A.generators.items():
        v = g(x)
        if best is None or pick(v, best[1]):
            best = (name, v)
    return best


def check_R_membership(A: GroupAction, K, C, D, window) -> RMembershipReport:
    """Exact check of the bilipschitz and two-sided displacement conditions on ``window``.

    Slopes of every piece meeting the window must lie in ``[1/K, K]``.  The
    displacement envelopes ``max_g g(x) - x`` and ``min_g g(x) - x`` are PL,
    so they are checked at their breakpoints, the window ends and (for
    readable witnesses) every integer in the window.
    """
    K, C, D = Q(K), Q(C), Q(D)
    lo, hi = (Q(w) for w in window)
    if not A.is_pl:
        raise TypeError("check_R_membership needs PL generators")
    rep = RMembershipReport((lo, hi), K, C, D)
    for name, g in A.generators.items():
        slopes = g.slopes_on(lo, hi)
        kmax = lipschitz_constant(g, (lo, hi))
        rep.max_slope[name] = kmax
        if kmax > K:
            bad = max(slopes, key=lambda s: max(s, 1 / s))
            x = _piece_point(g, bad, lo, hi)
            rep.witnesses.append(Witness(x, name, "lipschitz", max(bad, 1 / bad)))
    gens = list(A.generators.values())
    upper = envelope(gens, "max").minus_identity()
    lower = envelope(gens, "min").minus_identity()
    pts = set(upper.critical_points(lo, hi)) | set(lower.critical_points(lo, hi))
    pts.update(Fraction(n) for n in range(_ceil(lo), _floor(hi) + 1))
    pts = sorted(pts)
    rep.checked_points = len(pts)
    ups = [upper(x) for x in pts]
    downs = [lower(x) for x in pts]
    rep.max_displacement = (min(ups), max(ups))
    rep.min_displacement = (min(downs), max(downs))
    for x, u, d in zip(pts, ups, downs):
        if u > D:
            rep.witnesses.append(Witness(x, _argbest(A, x, lambda a, b: a > b)[0], "max_displacement>D", u))
        if u < C:
            rep.witnesses.append(Witness(x, _argbest(A, x, lambda a, b: a > b)[0], "max_displacement<C", u))
        if d < -D:
            rep.witnesses.append(Witness(x, _argbest(A, x, lambda a, b: a < b)[0], "min_displacement<-D", d))
        if d > -C:
            rep.witnesses.append(Witness(x, _argbest(A, x, lambda a, b: a < b)[0], "min_displacement>-C", d))
    return rep


def _ceil(q):
    return -((-q.numerator) // q.denominator)


def _floor(q):
    return q.numerator // q.denominator


def _piece_point(g, slope, lo, hi):
    for a, b, s in g.pieces():
        if s != slope:
            continue
        a = lo if a is None or a < lo else a
        b = hi if b is None or b > hi else b
        if a <= b:
            return (a + b) / 2
    return lo


@dataclass
class NormalizationResult:
    action: GroupAction  # conjugated, generators = G u G^2
    base: GroupAction  # conjugated single generators
    sequence: EscapeSequence
    straightening: PLHomeo
    K: Fraction
    window: tuple
    report: RMembershipReport  # R(G-bar, K^6, 1, 4)
    single_report: RMembershipReport  # Lipschitz K^3 on G (displacement [1, 2] is not required there)
    distortion: tuple
    notes: list = field(default_factory=list)


def snapshot_action(A: GroupAction, window, err=SNAPSHOT_ERR) -> GroupAction:
    """Replace expression generators by certified PL snapshots on ``window``.

    Of each inverse pair only the first name (in sort order) is snapshotted;
    its partner becomes the exact inverse of that snapshot, so the pairing
    stays exact.  Self-inverse pairings and relators are dropped because a
    snapshot need not satisfy them exactly.
    """
    gens = {}
    inv = {}
    for name in sorted(A.generators):
        if name in gens:
            continue
        g = A.generators[name]
        gens[name] = g if isinstance(g, PLHomeo) else certified_pl_approx(g, window, err)
        partner = A.inverses.get(name)
        if partner is not None and partner != name:
            gens[partner] = inverse(gens[name])
            inv[name], inv[partner] = partner, name
    gens = {n: gens[n] for n in A.generators}
    meta = {**A.meta, "snapshot_err": Q(err), "snapshot_window": tuple(window)}
    meta.pop("phi", None)
    return A.with_generators(gens, inverses=inv, relators=(), meta=meta)


def normalize_action(A: GroupAction, M: int = DEFAULT_DEPTH) -> NormalizationResult:
    """Conjugate by the straightening map and certify membership in ``R(G-bar, K^6, 1, 4)``.

    The certified window is ``[-(M-2), M-2]`` (the image of
    ``[x_{-M+2}, x_{M-2}]``) so tail extrapolation never enters a check.
    """
    notes = []
    if not A.is_pl:
        raise TypeError("normalize_action needs PL generators; snapshot expressions first")
    if not A.symmetric:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            A = symmetrize(A)
        notes.append("input was not symmetric; inverses adjoined")
    es = escape_sequence(A, M)
    phi = build_straightening(es)
    K = max(lipschitz_constant(g) for g in A.generators.values())
    window = (Fraction(-(M - 2)), Fraction(M - 2))
    base = A.with_generators({n: conjugate(g, phi) for n, g in A.generators.items()})
    squared = square_generating_set(A)
    rho = squared.with_generators(
        {n: conjugate(g, phi) for n, g in squared.generators.items()},
        meta={**A.meta, "certified_window": window, "stage": "normalized"},
    )
    report = check_R_membership(rho, K**6, 1, 4, window)
    single = RMembershipReport(window, K**3, Fraction(0), Fraction(2))
    for name, g in base.generators.items():
        k = lipschitz_constant(g, window)
        single.max_slope[name] = k
        if k > K**3:
            single.witnesses.append(Witness(window[0], name, "lipschitz", k))
        dmin, dmax = _displacement_range(g, window)
        if dmin < -2 or dmax > 2:
            single.witnesses.append(Witness(window[0], name, "|displacement|>2", max(-dmin, dmax)))
    if "snapshot_err" in A.meta:
        notes.append(f"certificates hold within {A.meta['snapshot_err']} of the PL snapshot")
    return NormalizationResult(rho, base, es, phi, K, window, report, single, distortion_check(es, K), notes)


def _displacement_range(g, window):
    mn, _, mx, _ = g.minus_identity().extrema(*window)
    return mn, mx
