"""The compiled and pure-Python kernels must agree exactly."""

from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from aplab import _kernels_py, kernels
from aplab.errors import BracketFailure, OutOfRange
from aplab.pl_homeo import inverse, translation
from conftest import pl_homeos, rationals

try:
    from aplab import _kernels as _compiled
except ImportError:  # pragma: no cover - extension not built
    _compiled = None

BACKENDS = [_kernels_py] + ([_compiled] if _compiled is not None else [])
needs_compiled = pytest.mark.skipif(_compiled is None, reason="compiled kernel not built")


def _table(mod, h):
    return mod.PLTable(h.xs, h.ys, h.left_slope, h.right_slope, h.intercept)


def test_backend_names():
    assert _kernels_py.BACKEND == "python"
    assert kernels.BACKEND in {"python", "cython"}


@pytest.mark.parametrize("mod", BACKENDS, ids=lambda m: m.BACKEND)
def test_reference_closed_forms(mod):
    assert mod.ref_cdf(F(0)) == F(1, 2)
    assert mod.ref_cdf(F(1)) == F(3, 4)
    assert mod.ref_cdf(F(-2)) == F(1, 8)
    assert mod.ref_cdf_inv(F(3, 4)) == 1
    assert mod.ref_density(F(2)) == F(1, 16)
    assert mod.ref_density(F(0)) == F(1, 4)
    with pytest.raises(OutOfRange):
        mod.ref_cdf_inv(F(1))


@pytest.mark.parametrize("mod", BACKENDS, ids=lambda m: m.BACKEND)
def test_mixture_bracket_failure(mod):
    # a mixture whose CDF never leaves [1/4, 3/4] cannot be bracketed at p = 9/10
    m = mod.Mixture([F(1)], [_table(mod, translation(0))])
    with pytest.raises(BracketFailure):
        mod.Mixture([F(1, 2)], [_table(mod, translation(0))]).invert(F(3, 4), F(1, 1024), max_bracket=5)
    lo, hi = m.invert(F(3, 4), F(1, 1024))
    assert lo <= 1 <= hi


@given(rationals)
def test_reference_parity(x):
    for mod in BACKENDS[1:]:
        assert mod.ref_cdf(x) == _kernels_py.ref_cdf(x)
        assert mod.ref_density(x) == _kernels_py.ref_density(x)
    p = _kernels_py.ref_cdf(x)
    for mod in BACKENDS:
        assert mod.ref_cdf_inv(p) == x


@needs_compiled
@given(pl_homeos(), st.lists(rationals, min_size=1, max_size=12), rationals, rationals)
def test_table_parity(h, xs, s, t):
    a, b = _table(_kernels_py, h), _table(_compiled, h)
    assert list(a.eval_many(xs)) == list(b.eval_many(xs))
    for x in xs:
        assert a(x) == b(x) == h(x)
        assert a.slope(x) == b.slope(x) == h.slope_at(x)
    lo, hi = min(s, t), max(s, t)
    assert a.slope_range(lo, hi) == b.slope_range(lo, hi)
    assert _kernels_py.flow_sup_distance(a, s, t, F(-20), F(20)) == _compiled.flow_sup_distance(b, s, t, F(-20), F(20))


@needs_compiled
@given(st.lists(pl_homeos(max_breaks=3), min_size=1, max_size=4), rationals)
def test_mixture_parity(hs, x):
    ws = [F(1, len(hs))] * len(hs)
    inv = [inverse(h) for h in hs]
    a = _kernels_py.Mixture(ws, [_table(_kernels_py, h) for h in inv])
    b = _compiled.Mixture(ws, [_table(_compiled, h) for h in inv])
    assert a.cdf(x) == b.cdf(x)
    assert a.density(x) == b.density(x)
    assert a.density_bounds(x, x + 1) == b.density_bounds(x, x + 1)
    p = a.cdf(x)
    assert a.invert(p, F(1, 2**30)) == b.invert(p, F(1, 2**30))


@given(pl_homeos(), rationals, rationals)
def test_slope_range_contains_slopes(h, u, v):
    lo, hi = min(u, v), max(u, v)
    t = kernels.table_of(h)
    smin, smax = t.slope_range(lo, hi)
    for k in range(9):
        x = lo + (hi - lo) * k / 8
        assert smin <= h.slope_at(x, "left") <= smax or x == lo
        assert smin <= h.slope_at(x, "right") <= smax or x == hi
