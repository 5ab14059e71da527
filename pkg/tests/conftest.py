from __future__ import annotations

import pytest

from mzia.fixtures import boiler_p, boiler_q
from mzia.zonegraph import build_zone_automaton


@pytest.fixture(scope="session")
def model_p():
    return boiler_p()


@pytest.fixture(scope="session")
def model_q():
    return boiler_q()


@pytest.fixture(scope="session")
def zone_p(model_p):
    return build_zone_automaton(model_p)


@pytest.fixture(scope="session")
def zone_q(model_q):
    return build_zone_automaton(model_q)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, title = RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}")
