from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from aplab.pl_homeo import PLHomeo

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DATA = Path(__file__).resolve().parents[1] / "src" / "aplab" / "data"

rationals = st.builds(
    Fraction,
    st.integers(min_value=-400, max_value=400),
    st.integers(min_value=1, max_value=24),
)
positive = st.builds(Fraction, st.integers(min_value=1, max_value=12), st.integers(min_value=1, max_value=12))


@st.composite
def pl_homeos(draw, max_breaks=5):
    n = draw(st.integers(min_value=0, max_value=max_breaks))
    x = draw(rationals)
    y = draw(rationals)
    pts = [(x, y)]
    for _ in range(n):
        x += draw(positive)
        y += draw(positive)
        pts.append((x, y))
    return PLHomeo(pts, draw(positive), draw(positive))


@pytest.fixture
def data_dir():
    return DATA


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
