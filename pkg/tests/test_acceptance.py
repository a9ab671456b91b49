"""One test per acceptance criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines.  Sweeps
are cached across criteria within the session.
"""
import pytest

from fracwave import acceptance


@pytest.mark.parametrize("number", sorted(acceptance.CHECKS))
def test_criterion(number):
    res = acceptance.check(number)
    print("\n" + res.line())
    assert res.passed, res.line()
