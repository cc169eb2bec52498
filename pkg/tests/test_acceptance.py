"""Acceptance suite: one PASS/FAIL line per criterion, printed even under capture."""

import pytest

from sichain import acceptance


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number, capsys):
    res = acceptance.run_one(number)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.detail
