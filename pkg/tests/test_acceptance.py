"""Acceptance suite: one test and one printed PASS/FAIL line per criterion.

Sizes, seeds and tolerances are pinned inside ``onlinecode.acceptance``.
Run directly (``python tests/test_acceptance.py``) for the summary only.
"""

import json
import sys

import pytest

from onlinecode import acceptance

CASES = [pytest.param(fn, id=f"criterion_{i}") for i, fn in enumerate(acceptance.CRITERIA, 1)]


def _jsonable(detail):
    return json.dumps(detail, default=float, sort_keys=True)


@pytest.mark.parametrize("criterion", CASES)
def test_criterion(criterion, capsys):
    result = criterion()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, _jsonable(result.detail)


if __name__ == "__main__":
    results = acceptance.run_all()
    sys.exit(0 if all(r.passed for r in results) else 1)
