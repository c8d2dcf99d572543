"""The thirteen acceptance criteria, each run through its built-in suite.

Every test prints one ``PASS``/``FAIL`` line; the lines are also collected
into a section of the terminal summary.
"""

import pytest

from conftest import ACCEPTANCE_LINES
from ptfsense.suites import run_suite

CRITERIA = [
    (1, "lemma-key-exact"),
    (2, "as-bound-d"),
    (3, "ns-spectral-oracle"),
    (4, "restriction-conservation"),
    (5, "reduction-identity"),
    (6, "sheppard-gns"),
    (7, "qnorm-exact"),
    (8, "hermite-orthonormality"),
    (9, "gl-extremal-shape"),
    (10, "gns-exponent-shape"),
    (11, "critical-index-machinery"),
    (12, "learner-agnostic"),
    (13, "determinism"),
]


def check(number: int, suite_id: str) -> None:
    res = run_suite(suite_id, seed=0)
    line = f"{'PASS' if res.passed else 'FAIL'}  [{number:2d}] {suite_id:26s} {res.seconds:6.1f}s  {res.summary}"
    print("\n" + line)
    ACCEPTANCE_LINES.append(line)
    failing = [r for r in res.rows if not r["ok"]][:5]
    assert res.passed, f"{res.summary}; first failing rows: {failing}"


@pytest.mark.slow
@pytest.mark.parametrize("number,suite_id", CRITERIA, ids=[s for _, s in CRITERIA])
def test_criterion(number, suite_id):
    check(number, suite_id)
