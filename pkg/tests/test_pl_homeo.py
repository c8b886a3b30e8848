from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from aplab.errors import ValidationError
from aplab.pl_homeo import (
    PLFunction,
    PLHomeo,
    affine,
    compose,
    conjugate,
    displacement,
    displacement_extrema,
    envelope,
    identity,
    inverse,
    lipschitz_constant,
    sup_abs_difference,
    translation,
)
from conftest import pl_homeos, rationals

H = PLHomeo([(0, 0), (1, 2)], 1, 1)


def test_eval_examples():
    assert affine(2)(3) == 6
    assert identity()(F(7, 3)) == F(7, 3)
    assert H(F(1, 2)) == 1
    assert H(-5) == -5 and H(3) == 4


def test_compose_examples():
    assert compose(translation(1), affine(2)) == affine(2, 1)
    assert compose(inverse(H), H) == identity()
    a, b = translation(1), affine(2)
    assert compose(b, a) == affine(2, 2)


def test_inverse_examples():
    assert inverse(affine(2)) == affine(F(1, 2))
    assert inverse(identity()) == identity()
    hi = inverse(H)
    assert hi.breakpoints == [(0, 0), (2, 1)]


def test_lipschitz_examples():
    assert lipschitz_constant(affine(2)) == 2
    assert lipschitz_constant(translation(5)) == 1
    g = PLHomeo([(0, 0), (3, 1), (4, 5)], F(1, 3), 4)
    assert lipschitz_constant(g) == 4


def test_lipschitz_against_grid_quotients():
    g = PLHomeo([(0, 0), (3, 1), (4, 5)], F(1, 3), 4)
    xs = [F(k, 4) for k in range(-8, 30)]
    best = max(max(q, 1 / q) for q in ((g(b) - g(a)) / (b - a) for a, b in zip(xs, xs[1:])))
    assert best == lipschitz_constant(g)


def test_displacement_examples():
    assert displacement_extrema(affine(2), (-1, 2)) == (-1, 2)
    assert displacement_extrema(translation(1), (-50, 7)) == (1, 1)
    assert displacement_extrema(H, (-1, 3)) == (0, 1)
    assert displacement(translation(3))(100) == 3


def test_envelope_examples():
    env = envelope([translation(1), affine(2)], "max")
    assert env.breakpoints == [(1, 2)]
    assert envelope([H], "min") == H
    bs = [translation(1), translation(-1), affine(2), affine(F(1, 2))]
    m = envelope(bs, "max")
    assert m(0) == 1 and m(3) == 6


def test_conjugate_examples():
    assert conjugate(H, identity()) == H
    assert conjugate(translation(1), affine(2)) == translation(2)
    assert conjugate(affine(2), translation(1)) == affine(2, -1)


def test_canonical_form_drops_collinear_points():
    h = PLHomeo([(0, 0), (1, 1), (2, 2)], 1, 1)
    assert h == identity() and h.is_affine
    assert hash(h) == hash(identity())


@pytest.mark.parametrize(
    "pts,ls,rs",
    [([(0, 0), (1, 0)], 1, 1), ([(1, 0), (0, 1)], 1, 1), ([(0, 0)], 0, 1), ([(0, 0)], 1, -2)],
)
def test_invalid_homeos(pts, ls, rs):
    with pytest.raises(ValidationError):
        PLHomeo(pts, ls, rs)


def test_plfunction_allows_any_slope():
    f = PLFunction([(0, 0), (1, -1)], 0, -3)
    assert f(5) == -13 and f(-2) == 0


def test_sup_abs_difference():
    assert sup_abs_difference(affine(2), affine(2, -3), (-4, 4)) == 3
    assert sup_abs_difference(identity(), H, (-1, 3)) == 1


def test_str():
    assert str(affine(2, 1)) == "x -> 2*x + 1"


# -- invariants ----------------------------------------------------------------


@given(pl_homeos(), st.lists(rationals, min_size=1, max_size=20))
def test_inverse_round_trip(h, xs):
    hi = inverse(h)
    c = compose(h, hi)
    for x in xs:
        assert c(x) == x
        assert hi(h(x)) == x


@given(pl_homeos(), pl_homeos(), st.lists(rationals, min_size=1, max_size=10))
def test_compose_pointwise(g, h, xs):
    gh = compose(g, h)
    for x in xs:
        assert gh(x) == g(h(x))


@given(pl_homeos(), pl_homeos())
def test_lipschitz_submultiplicative(g, h):
    assert lipschitz_constant(compose(g, h)) <= lipschitz_constant(g) * lipschitz_constant(h)


@given(st.lists(pl_homeos(max_breaks=3), min_size=1, max_size=4), st.lists(rationals, min_size=1, max_size=10))
def test_envelope_dominance(hs, xs):
    top, bot = envelope(hs, "max"), envelope(hs, "min")
    for x in xs:
        vals = [h(x) for h in hs]
        assert top(x) == max(vals)
        assert bot(x) == min(vals)


@given(pl_homeos(), rationals, rationals)
def test_displacement_extremality(h, a, b):
    lo, hi = min(a, b), max(a, b)
    d = displacement(h)
    pts = [lo, hi] + [x for x in h.xs if lo <= x <= hi]
    vals = [d(x) for x in pts]
    assert displacement_extrema(h, (lo, hi)) == (min(vals), max(vals))


@given(pl_homeos(), pl_homeos(), rationals)
def test_conjugate_pointwise(h, phi, x):
    assert conjugate(h, phi)(x) == phi(h(inverse(phi)(x)))


@given(pl_homeos(), rationals)
def test_preimage(h, y):
    assert h(h.preimage(y)) == y


@given(pl_homeos(), st.lists(rationals, max_size=20))
def test_values_sorted_agrees_with_pointwise(g, xs):
    xs = sorted(xs)
    assert g.values_sorted(xs) == [g(x) for x in xs]
