"""Runs the eight acceptance criteria at their stated tolerances.

Each criterion prints one PASS/FAIL line; the lines are repeated in the
terminal summary by ``conftest.py``. Run this file directly for the lines alone.
"""

import pytest

from fluidsym import acceptance

SUMMARY = {}


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number):
    result = acceptance.run_criterion(number)
    SUMMARY[number] = result.summary_line()
    print(result.summary_line())
    for check in result.checks:
        mark = "ok " if check.passed else "BAD"
        print(f"    {mark} {check.name}: {check.value:.3e} {check.relation} {check.bound:.1e}")
    for note in result.notes:
        print(f"    note: {note}")
    failed = [c.name for c in result.checks if not c.passed]
    assert not failed, failed


if __name__ == "__main__":
    for r in acceptance.run_all():
        print(r.summary_line())
