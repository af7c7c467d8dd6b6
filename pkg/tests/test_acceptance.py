"""Acceptance gate: every criterion runs at its stated tolerance and prints
one PASS/FAIL line per measured quantity."""

import pytest

from otfs.acceptance import CRITERIA


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    verdicts = CRITERIA[number]()
    with capsys.disabled():
        print()
        for v in verdicts:
            print(f"  criterion {number}: {v.line()}")
    assert verdicts
    failed = [v.line() for v in verdicts if not v.passed]
    assert not failed, failed
