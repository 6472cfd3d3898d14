import random

import pytest

from mpcmp.abb import ABB
from mpcmp.transport import run_parties


def run_abb(n_parties, body, alphas=None, tamper=None, fabric="sim"):
    """Run ``body(abb, party)`` at every party; returns (outputs, RunResult)."""

    def role(i, endpoint):
        abb = ABB(i, n_parties, endpoint, alphas[i] if alphas else None, tamper[1] if tamper and tamper[0] == i else None)
        out = body(abb, i)
        abb.check()
        return out

    res = run_parties(n_parties, role, fabric)
    return res.outputs, res


@pytest.fixture
def rng():
    return random.Random(1234)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
