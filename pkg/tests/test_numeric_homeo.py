import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from aplab.errors import NonConvergence
from aplab.group_action import GroupAction
from aplab.lipschitz_conjugation import WeightScheme, build_phi
from aplab.numeric_homeo import (
    REFERENCE,
    CdfMap,
    Compose,
    Interval,
    Inverse,
    MixtureCdf,
    PL,
    certified_pl_approx,
    chain,
    eval_enclosure,
    eval_many,
    invert_point,
    lipschitz_estimate,
)
from aplab.pl_homeo import PLHomeo, affine, identity, translation
from conftest import pl_homeos, rationals

TOL = F(1, 2**40)


def z_action():
    return GroupAction("z", {"a": translation(1), "a-": translation(-1)}, {"a": "a-", "a-": "a"})


def test_eval_examples():
    assert eval_enclosure(PL(affine(2)), 3, TOL) == Interval(6, 6)
    h = PLHomeo([(0, 0), (1, 2)], 1, 1)
    assert eval_enclosure(Inverse(PL(h)), 1, TOL) == Interval(F(1, 2), F(1, 2))
    iv = eval_enclosure(Inverse(CdfMap(REFERENCE)), F(1, 2), TOL)
    assert 0 in iv and iv.width <= TOL


def test_invert_examples():
    assert invert_point(PL(affine(2)), 6, TOL) == Interval(3, 3)
    assert 1 in invert_point(CdfMap(REFERENCE), F(3, 4), TOL)
    assert 0 in invert_point(CdfMap(REFERENCE), F(1, 2), TOL)


def test_mixture_inverse_encloses_root():
    m = MixtureCdf([F(1, 2), F(1, 4), F(1, 4)], [identity(), translation(3), affine(2)])
    e = CdfMap(m)
    for p in (F(1, 100), F(1, 2), F(97, 100)):
        iv = invert_point(e, p, TOL)
        assert iv.width <= TOL
        assert m.value(iv.lo) <= p <= m.value(iv.hi)


def test_tolerance_must_be_positive():
    with pytest.raises(ValueError):
        eval_enclosure(PL(identity()), 0, 0)


def test_nonconvergence_on_stuck_enclosure():
    class Stuck(PL):
        def enclose(self, lo, hi, tol):
            return lo - 1, hi + 1

    with pytest.raises(NonConvergence):
        eval_enclosure(Stuck(identity()), 0, TOL)


def test_certified_approx_is_exact_on_pl():
    h = PLHomeo([(0, 0), (1, 2)], 1, 3)
    assert certified_pl_approx(PL(h), (-4, 4), F(1, 2**20)) == h
    assert certified_pl_approx(Compose(PL(identity()), PL(h)), (-4, 4), F(1, 2**20)) == h


def test_certified_approx_of_conjugator():
    phi = build_phi(z_action(), WeightScheme(F(1, 4), 2))
    err = F(1, 2**20)
    snap, bound = certified_pl_approx(phi, (-4, 4), err, return_bound=True)
    assert bound <= err
    rng = random.Random(7)
    for _ in range(300):
        x = F(rng.randint(-4 * 10**6, 4 * 10**6), 10**6)
        iv = eval_enclosure(phi, x, F(1, 2**40))
        assert abs(snap(x) - iv.mid) <= err + iv.width


def test_lipschitz_estimate_examples():
    assert lipschitz_estimate(PL(affine(2)), (-3, 3), 7)[0] == 2
    assert lipschitz_estimate(PL(identity()), (-3, 3), 7) == (1, None)


def test_chain_order():
    e = chain(PL(translation(1)), PL(affine(2)))
    assert eval_enclosure(e, 3).lo == 7


def test_eval_many_matches_single():
    e = Inverse(CdfMap(REFERENCE))
    xs = [F(k, 10) for k in range(1, 10)]
    assert eval_many(e, xs, TOL) == [eval_enclosure(e, x, TOL) for x in xs]


# -- invariants ----------------------------------------------------------------


@given(st.lists(rationals, min_size=2, max_size=8, unique=True))
def test_monotone_enclosures(xs):
    e = Compose(Inverse(CdfMap(REFERENCE)), CdfMap(MixtureCdf([F(1, 2), F(1, 2)], [identity(), translation(1)])))
    xs = sorted(xs)
    ivs = [eval_enclosure(e, x, F(1, 2**30)) for x in xs]
    for a, b in zip(ivs, ivs[1:]):
        assert a.lo <= b.hi


@given(st.builds(F, st.integers(-2000, 2000), st.integers(1, 20)))
def test_inverse_consistency(x):
    e = CdfMap(MixtureCdf([F(2, 3), F(1, 3)], [identity(), affine(2, 1)]))
    tol = F(1, 2**30)
    y = eval_enclosure(e, x, tol).mid
    back = invert_point(e, y, tol)
    assert back.lo <= x <= back.hi


@given(pl_homeos(), rationals)
def test_pl_leaf_is_exact(h, x):
    iv = eval_enclosure(PL(h), x)
    assert iv.lo == iv.hi == h(x)
