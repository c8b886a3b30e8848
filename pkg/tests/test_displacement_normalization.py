from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from aplab.displacement_normalization import (
    build_straightening,
    check_R_membership,
    distortion_check,
    escape_sequence,
    normalize_action,
    snapshot_action,
)
from aplab.errors import FixedPointDetected
from aplab.group_action import GroupAction, inverse_token, word_eval
from aplab.lipschitz_conjugation import WeightScheme, lipschitzify
from aplab.pl_homeo import affine, compose, conjugate, envelope, identity, lipschitz_constant, translation

Z = GroupAction("z", {"a": translation(1), "a-": translation(-1)}, {"a": "a-", "a-": "a"})


def bs12():
    gens = {"a": translation(1), "a-": translation(-1), "b": affine(2), "b-": affine(F(1, 2))}
    inv = {"a": "a-", "a-": "a", "b": "b-", "b-": "b"}
    return GroupAction("bs12", gens, inv, (("b", "a", "b-", "a-", "a-"),))


@pytest.fixture(scope="module")
def normalized():
    return normalize_action(bs12(), 16)


def test_escape_examples():
    es = escape_sequence(Z, 10)
    assert [es.x(n) for n in es.indices] == list(range(-10, 11))
    es = escape_sequence(bs12(), 8)
    assert [es.x(n) for n in range(-4, 5)] == [-8, -4, -2, -1, 0, 1, 2, 4, 8]
    assert es.x(8) == 128 and es.up_generator(3) == "b"
    fixed = GroupAction("f", {"b": affine(2), "b-": affine(F(1, 2))}, {"b": "b-", "b-": "b"})
    with pytest.raises(FixedPointDetected) as info:
        escape_sequence(fixed, 4)
    assert info.value.point == 0


def test_escape_is_envelope_orbit():
    A = bs12()
    es = escape_sequence(A, 12)
    top = envelope(list(A.generators.values()), "max")
    bot = envelope(list(A.generators.values()), "min")
    for n in range(-12, 12):
        assert top(es.x(n)) == es.x(n + 1)
        assert bot(es.x(n + 1)) == es.x(n)


def test_straightening():
    assert build_straightening(escape_sequence(Z, 5)) == identity()
    es = escape_sequence(bs12(), 8)
    phi = build_straightening(es)
    assert phi(4) == 3 and phi(6) == F(7, 2)
    assert all(phi(es.x(n)) == n for n in es.indices)


def test_distortion():
    assert distortion_check(escape_sequence(Z, 5), 1) == (True, 1, None)
    es = escape_sequence(bs12(), 8)
    ok, worst, _ = distortion_check(es, 2)
    assert ok and worst == 2
    ok, worst, n = distortion_check(es, F(3, 2))
    r = es.gap(n + 1) / es.gap(n)
    assert not ok and max(r, 1 / r) == 2


def test_normalize_translations():
    res = normalize_action(Z, 8)
    assert res.base.generators == Z.generators
    assert res.report.passed and res.K == 1
    lo, hi = res.report.max_displacement
    assert 1 <= lo <= hi <= 2


def test_normalized_bs12(normalized):
    res = normalized
    rho = res.base
    assert rho["b"](3) == 4 and rho["a"](0) == 1
    assert res.report.passed and res.single_report.passed
    for g in rho.generators.values():
        assert lipschitz_constant(g, res.window) <= 8


def test_raw_bs12_fails_with_witness():
    raw = GroupAction("raw", {"a": translation(1), "b": affine(2)})
    rep = check_R_membership(raw, 2, 1, 4, (-20, 20))
    assert not rep.passed
    assert any(w.x == 16 and w.generator == "b" and w.value == 16 for w in rep.witnesses)


def test_translations_membership():
    assert check_R_membership(Z, 1, 1, 1, (-7, 13)).passed


def test_per_generator_displacement_bound(normalized):
    lo, hi = normalized.window
    for g in normalized.base.generators.values():
        d = g.minus_identity()
        for x in [lo, hi] + g.breakpoints_in(lo, hi):
            assert -2 <= d(x) <= 2


def test_pair_product_push(normalized):
    lo, hi = normalized.window
    gens = list(normalized.action.generators.values())
    top = envelope(gens, "max").minus_identity()
    bot = envelope(gens, "min").minus_identity()
    assert top.extrema(lo, hi)[0] >= 1
    assert bot.extrema(lo, hi)[2] <= -1


def test_straightening_is_nearly_affine_on_triples():
    A = bs12()
    K = 2
    es = escape_sequence(A, 12)
    phi = build_straightening(es)
    for n in range(-10, 10):
        a, b = es.x(n - 1), es.x(n + 2)
        for s in phi.slopes_on(a, b):
            assert 1 / (K * es.gap(n)) <= s <= K / es.gap(n)


def test_conjugation_exactness(normalized):
    A = bs12()
    rho, phi = normalized.base, normalized.straightening
    for g in A.generators:
        for h in A.generators:
            lhs = compose(rho[g], rho[h])
            assert lhs == conjugate(word_eval(A, (g, h)), phi)


def test_snapshot_keeps_pairs_exact():
    L, _ = lipschitzify(Z, WeightScheme(F(1, 4), 1), window=(-2, 2), grid_n=3, tol=F(1, 2**20))
    S = snapshot_action(L, (-2, 2), F(1, 2**12))
    assert S.is_pl and S.relators == ()
    assert compose(S["a"], S["a-"]) == identity()
    assert S.meta["snapshot_err"] == F(1, 2**12)


def test_snapshot_normalization_is_tagged():
    L, _ = lipschitzify(Z, WeightScheme(F(1, 4), 1), window=(-4, 4), grid_n=3, tol=F(1, 2**20))
    S = snapshot_action(L, (-4, 4), F(1, 2**10))
    res = normalize_action(S, 3)
    assert any("snapshot" in n for n in res.notes)


@given(st.lists(st.sampled_from(["a", "a-", "b", "b-"]), min_size=1, max_size=4))
def test_word_inverse_tokens(w):
    A = bs12()
    inv = tuple(inverse_token(A, t) for t in reversed(w))
    assert compose(word_eval(A, w), word_eval(A, inv)) == identity()
