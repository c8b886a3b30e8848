"""Stage 1: conjugate a PL action into a uniformly bilipschitz one.

A reference probability measure with density ``f`` (flat ``1/4`` on
``[-1, 1]``, ``1/(4x^2)`` outside) is averaged over a ball of the group with
weights ``alpha**|g|``.  The resulting measure ``nu`` is atomless with full
support, so ``phi = F^{-1} o F_nu`` pushes ``nu`` to the reference measure, and
every conjugated generator ``phi o g o phi^{-1}`` has derivative at most
``L f(x) / f(g(x))`` with ``L = alpha**-|g|`` (up to the mass of the truncated
ball).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from aplab import kernels
from aplab.group_action import GroupAction, ball, word_length, word_eval
from aplab.numeric_homeo import (
    DEFAULT_TOL,
    REFERENCE,
    CdfMap,
    Compose,
    HomeoExpr,
    Inverse,
    MixtureCdf,
    PL,
    eval_many,
    lipschitz_estimate,
)
from aplab.pl_homeo import PLHomeo, identity, inverse
from aplab.rational import Q

DEFAULT_RADIUS = 6


def reference_density(x) -> Fraction:
    return kernels.ref_density(Q(x))


def reference_cdf(x) -> Fraction:
    return kernels.ref_cdf(Q(x))


def reference_cdf_inv(p) -> Fraction:
    """Closed-form inverse CDF; raises :class:`~aplab.errors.OutOfRange` outside ``(0, 1)``."""
    return kernels.ref_cdf_inv(Q(p))


@dataclass(frozen=True)
class WeightScheme:
    alpha: Fraction
    radius: int = DEFAULT_RADIUS

    def __post_init__(self):
        object.__setattr__(self, "alpha", Q(self.alpha))
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.radius < 0:
            raise ValueError("radius must be non-negative")

    @classmethod
    def default_for(cls, A: GroupAction, radius: int = DEFAULT_RADIUS) -> "WeightScheme":
        k = max(1, len(A.generators))
        return cls(Fraction(1, 4 * k), radius)


def ball_weights(A: GroupAction, ws: WeightScheme):
    """``[(ball element, normalized weight)]`` with weights ``alpha**len / Z``."""
    els = ball(A, ws.radius)
    raw = [ws.alpha**el.length for el in els]
    z = sum(raw)
    return [(el, w / z) for el, w in zip(els, raw)]


def truncation_defect(A: GroupAction, ws: WeightScheme) -> Fraction | float:
    """Upper bound on the weight the infinite sum puts outside the ball.

    Uses ``|sphere_r| <= k (k-1)**(r-1)`` for ``k`` generators, relative to
    the ball's normalizing mass.  Returns ``inf`` when the series diverges.
    """
    k = len(A.generators)
    a, n = ws.alpha, ws.radius
    z = sum(ws.alpha**el.length for el in ball(A, n))
    if k == 0:
        return Fraction(0)
    if k == 1:
        return a ** (n + 1) / (1 - a) / z
    ratio = (k - 1) * a
    if ratio >= 1:
        return math.inf
    return k * a ** (n + 1) * (k - 1) ** n / (1 - ratio) / z


def build_nu_cdf(A: GroupAction, ws: WeightScheme) -> MixtureCdf:
    """``F_nu(x) = sum_g w_g F(g^{-1}(x))`` over the ball."""
    if not A.is_pl:
        raise TypeError("the measure construction needs PL generators")
    pairs = ball_weights(A, ws)
    return MixtureCdf([w for _, w in pairs], [el.map for el, _ in pairs])


def build_phi(A: GroupAction, ws: WeightScheme) -> HomeoExpr:
    """``phi = F^{-1} o F_nu``; exact at rationals, its inverse goes through bisection."""
    return Compose(Inverse(CdfMap(REFERENCE)), CdfMap(build_nu_cdf(A, ws)))


@dataclass(frozen=True)
class RadonNikodymBound:
    L: Fraction
    word_length: int
    truncation_defect: Fraction | float


def radon_nikodym_bound(A: GroupAction, h, ws: WeightScheme) -> RadonNikodymBound:
    """``L = alpha**-|h|`` with ``h_* nu <= L nu`` on the untruncated sum.

    ``h`` is a generator name or word; the truncation defect is reported
    separately rather than folded into ``L``.
    """
    n = word_length(A, h)
    return RadonNikodymBound(ws.alpha ** (-n), n, truncation_defect(A, ws))


def pushforward_ratio_sup(h: PLHomeo):
    """Exact ``sup_x d(h_* lambda)/d lambda`` and a point attaining it (``None`` if only a limit).

    The density of ``h_* lambda`` is ``f(h^{-1} x) (h^{-1})'(x)``.  On every
    piece where ``h^{-1}`` is affine and ``f`` has a single formula the ratio
    is monotone, so the sup is taken over piece ends and the limits at
    infinity (``1/s`` for a tail slope ``s`` of ``h^{-1}``).
    """
    hi = inverse(h)
    f = kernels.ref_density
    cand = {Fraction(-1), Fraction(0), Fraction(1), h(-1), h(1), *h.ys}
    best, arg = None, None
    for x in sorted(cand):
        for side in ("left", "right"):
            r = f(hi(x)) * hi.slope_at(x, side) / f(x)
            if best is None or r > best:
                best, arg = r, x
    for s in (hi.left_slope, hi.right_slope):
        if 1 / s > best:
            best, arg = 1 / s, None
    return best, arg


def pushforward_density_ratio(nu: MixtureCdf, h: PLHomeo, x) -> Fraction:
    """``d(h_* nu)/d nu`` at ``x`` (right derivatives at kinks)."""
    x = Q(x)
    hi = inverse(h)
    return nu.density(hi(x)) * hi.slope_at(x) / nu.density(x)


@dataclass
class GeneratorLipschitz:
    name: str
    L: Fraction
    empirical_lower: Fraction
    analytic_tail_hint: Fraction  # L**3
    grid_bound_max: Fraction | None
    quotient_violations: int


@dataclass
class LipschitzReport:
    alpha: Fraction
    radius: int
    tol: Fraction
    window: tuple
    ball_size: int
    truncation_defect: Fraction | float
    generators: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(g.quotient_violations == 0 for g in self.generators)


def conjugate_expr(phi: HomeoExpr, g: PLHomeo, L=None) -> HomeoExpr:
    """``phi o g o phi^{-1}`` as an expression, tagged with its Radon-Nikodym constant."""
    meta = {} if L is None else {"rn_L": L}
    return Compose(phi, Compose(PL(g), Inverse(phi)), meta=meta)


def quotient_bound_check(e: HomeoExpr, xs, tol=DEFAULT_TOL):
    """Compare difference quotients of ``e`` on consecutive grid points with ``L f(x)/f(e(x))``.

    Returns ``(violations, worst_excess)`` where an excess counts only if the
    midpoint quotient exceeds the left-endpoint bound by more than the
    width of the quotient's certified enclosure.
    """
    L = e.meta["rn_L"]
    xs = sorted(Q(x) for x in xs)
    ivs = eval_many(e, xs, tol)
    violations = 0
    worst = None
    for (x0, i0), (x1, i1) in zip(zip(xs, ivs), zip(xs[1:], ivs[1:])):
        dx = x1 - x0
        q_hi = (i1.hi - i0.lo) / dx
        q_lo = (i1.lo - i0.hi) / dx
        q_mid = (i1.mid - i0.mid) / dx
        bound = L * kernels.ref_density(x0) / kernels.ref_density(i0.mid)
        excess = q_mid - bound
        worst = excess if worst is None else max(worst, excess)
        if excess > q_hi - q_lo:
            violations += 1
    return violations, worst


def lipschitzify(
    A: GroupAction,
    ws: WeightScheme | None = None,
    *,
    window=(-100, 100),
    grid_n: int = 201,
    tol=DEFAULT_TOL,
):
    """Conjugate every generator by ``phi``; returns ``(action, LipschitzReport)``.

    The report holds, per generator, the certified empirical lower bound on
    the Lipschitz constant over ``window``, the tail hint ``L**3``, the grid
    maximum of ``L f(x) / f(h(x))`` and the number of grid quotients that
    break that bound beyond enclosure width.
    """
    if not A.is_pl:
        raise TypeError("lipschitzify needs PL generators")
    ws = ws or WeightScheme.default_for(A)
    tol = Q(tol)
    lo, hi = (Q(w) for w in window)
    phi = build_phi(A, ws)
    defect = truncation_defect(A, ws)
    xs = [lo + (hi - lo) * i / (grid_n - 1) for i in range(grid_n)]
    report = LipschitzReport(ws.alpha, ws.radius, tol, (lo, hi), len(ball(A, ws.radius)), defect)
    gens = {}
    for name, g in A.generators.items():
        L = radon_nikodym_bound(A, (name,), ws).L if g != identity() else Fraction(1)
        e = conjugate_expr(phi, g, L)
        gens[name] = e
        lower, hint = lipschitz_estimate(e, (lo, hi), grid_n, tol)
        viol, _ = quotient_bound_check(e, xs, tol)
        report.generators.append(GeneratorLipschitz(name, L, lower, L**3, hint, viol))
    meta = {**A.meta, "phi": phi, "weights": ws, "stage": "lipschitz"}
    return A.with_generators(gens, meta=meta), report


def relator_residuals(A: GroupAction, probes, tol=DEFAULT_TOL):
    """Largest ``|w(x) - x|`` enclosure bound per relator over probe points."""
    out = []
    for r in A.relators:
        e = word_eval(A, r)
        worst = Fraction(0)
        for iv, x in zip(eval_many(e, probes, tol), probes):
            worst = max(worst, abs(iv.hi - x), abs(iv.lo - x))
        out.append((r, worst))
    return out
