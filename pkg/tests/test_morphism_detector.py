import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from aplab.errors import TranslationOverflow
from aplab.flow_lab import flow_translate
from aplab.group_action import GroupAction, symmetrize, word_eval
from aplab.morphism_detector import (
    INCONCLUSIVE,
    SCALING,
    TRANSLATION,
    morphism_report,
    tail_slope_morphism,
    translation_number,
)
from aplab.pl_homeo import PLHomeo, affine, translation


def bs12():
    gens = {"a": translation(1), "a-": translation(-1), "b": affine(2), "b-": affine(F(1, 2))}
    inv = {"a": "a-", "a-": "a", "b": "b-", "b-": "b"}
    return GroupAction("bs12", gens, inv, (("b", "a", "b-", "a-", "a-"),))


Z = GroupAction("z", {"a": translation(1), "a-": translation(-1)}, {"a": "a-", "a-": "a"})
FREE = symmetrize(
    GroupAction(
        "free",
        {"a": PLHomeo([(0, 1), (1, 3)], 1, 1), "b": PLHomeo([(0, 0), (3, F(1, 2)), (4, 4)], 1, 1)},
    ),
    warn=False,
)


def test_tail_slopes_bs12():
    rep = tail_slope_morphism(bs12())
    assert rep.morphism == {"a": 1, "a-": 1, "b": 2, "b-": F(1, 2)}
    assert all(ok for *_, ok in rep.relators)
    assert rep.verdict == SCALING


def test_tail_slopes_translations_trivial():
    rep = tail_slope_morphism(Z)
    assert not rep.nontrivial and rep.verdict is None


def test_tail_slopes_free_scaling():
    g = GroupAction("s", {"a": translation(1), "b": PLHomeo([(0, 0)], F(1, 3), 3)})
    assert tail_slope_morphism(g).morphism["b"] == 3


def test_translation_number_examples():
    A = bs12()
    t = translation_number(A, "a", 256)
    assert (t.estimate, t.halving_error) == (1, 0)
    t = translation_number(A, "b", 256)
    assert (t.estimate, t.halving_error) == (0, 0)
    with pytest.raises(TranslationOverflow):
        translation_number(A, "b", 256, base=1)
    with pytest.raises(ValueError):
        translation_number(A, "a", 100)


def test_reports():
    r = morphism_report(bs12())
    assert r.verdict == SCALING and r.morphism["b"] == 2
    r = morphism_report(Z)
    assert r.verdict == TRANSLATION and r.translation_numbers["a"].estimate == 1
    assert len(r.additivity) == 20
    r = morphism_report(FREE)
    assert r.verdict == INCONCLUSIVE


def test_vanishing_translation_numbers_are_not_translation_like():
    A = GroupAction("fix", {"c": PLHomeo([(0, 0), (1, 2), (2, 2 + F(1, 2))], 1, 1)})
    A = symmetrize(A, warn=False)
    r = morphism_report(A)
    assert r.verdict == INCONCLUSIVE and r.notes


# -- invariants ----------------------------------------------------------------

words = st.lists(st.sampled_from(["a", "a-", "b", "b-"]), min_size=1, max_size=5)


@given(words, words)
def test_tail_slope_multiplicative(u, v):
    A = bs12()
    uv = word_eval(A, u + v)
    assert uv.right_slope == word_eval(A, u).right_slope * word_eval(A, v).right_slope
    assert uv.left_slope == word_eval(A, u).left_slope * word_eval(A, v).left_slope


@given(st.builds(F, st.integers(-100, 100), st.integers(1, 9)))
def test_tail_slopes_flow_invariant(s):
    assert tail_slope_morphism(flow_translate(bs12(), s)).tail_slopes == tail_slope_morphism(bs12()).tail_slopes


@given(st.integers(1, 6), st.builds(F, st.integers(-50, 50), st.integers(1, 9)))
def test_translation_number_of_powers(n, t):
    A = GroupAction("t", {"g": translation(t)})
    base = translation_number(A, "g", 64).estimate
    assert translation_number(A, ["g"] * n, 64).estimate == n * base


def test_relators_map_to_one_on_random_words():
    A = bs12()
    rng = random.Random(5)
    names = list(A.generators)
    for _ in range(50):
        w = [rng.choice(names) for _ in range(4)]
        conj = tuple(w) + A.relators[0] + tuple(reversed([{"a": "a-", "a-": "a", "b": "b-", "b-": "b"}[t] for t in w]))
        assert word_eval(A, conj).right_slope == 1
