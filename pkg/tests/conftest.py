import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from ptfsense.poly import MultilinearPoly  # noqa: E402

settings.register_profile(
    "default", max_examples=60, deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@st.composite
def polys(draw, min_n=1, max_n=6, max_d=3, integer=False):
    """Random sparse multilinear polynomial; integer coefficients when asked."""
    n = draw(st.integers(min_n, max_n))
    d = draw(st.integers(0, min(max_d, n)))
    masks = [m for m in range(1 << n) if bin(m).count("1") <= d]
    chosen = draw(st.lists(st.sampled_from(masks), min_size=1, max_size=8, unique=True))
    if integer:
        coeff = st.integers(-5, 5).map(float)
    else:
        coeff = st.floats(-4, 4, allow_nan=False).filter(lambda c: abs(c) > 1e-3)
    return MultilinearPoly(n, {m: draw(coeff) for m in chosen})


@st.composite
def tables(draw, min_n=1, max_n=7):
    from ptfsense.poly import TruthTable

    n = draw(st.integers(min_n, max_n))
    bits = draw(st.lists(st.sampled_from([-1, 1]), min_size=1 << n, max_size=1 << n))
    return TruthTable(n, np.array(bits, dtype=np.int8))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
