"""One test per acceptance criterion, each printing a PASS/FAIL line.

The lines are also repeated in the pytest terminal summary, so they show up
without ``-s``.
"""

import pytest

from mpcmp.harness import SUITES, run_suite

# criterion -> (suite, tolerance text, wall-clock budget in seconds or None)
CRITERIA = {
    1: ("ltbits_p_exhaustive", "exact, < 60 s", 60),
    2: ("ltbits_2n_exhaustive", "exact, < 120 s", 120),
    3: ("msb_p", "exact, < 60 s", 60),
    4: ("msb_2k", "exact, < 180 s", 180),
    5: ("round_counts", "exact counter equality", None),
    6: ("communication", "exact", None),
    7: ("branching_wan", "WAN ratio n=2 / best n >= 1.5, < 10 s", 10),
    8: ("tamper", "100% abort, 0 honest aborts", None),
    9: ("uniformity", "chi-square p >= 0.001 per opened symbol, < 120 s", 120),
    10: ("fabric_equivalence", "byte-identical transcripts", None),
}

RESULTS: list[str] = []


def test_every_suite_is_mapped():
    assert sorted(SUITES[name][0] for name, _, _ in CRITERIA.values()) == list(range(1, 11))


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    suite, tolerance, seconds = CRITERIA[number]
    report = run_suite(suite)
    in_time = seconds is None or report.elapsed_s < seconds
    ok = report.passed and report.cases > 0 and in_time
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'} [{tolerance}] {report.line()}"
    if not in_time:
        line += f"; over the {seconds} s budget"
    RESULTS.append(line)
    print(line)
    assert report.cases > 0, f"{suite} ran no cases"
    assert report.passed, report.counterexample
    assert in_time, f"{suite} took {report.elapsed_s:.1f} s, budget {seconds} s"
