"""Acceptance suite: one test per criterion, printing a pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines, or use
`cubikit verify all` for the same checks through the CLI.
"""

import pytest

from cubikit import acceptance as ac


@pytest.mark.parametrize("index,criterion",
                         [(i, fn) for i, fn in enumerate(ac.CRITERIA, 1)],
                         ids=[fn.__name__ for fn in ac.CRITERIA])
def test_criterion(index, criterion):
    result = criterion(seed=0)
    print(f"{result['status'].upper():4} {result['name']}: {result['witness']}")
    assert result["status"] == "pass", result["witness"]
