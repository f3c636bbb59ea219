"""Every acceptance criterion at its stated tolerance.

One test per criterion; the sub-check lines are printed and a one-line
pass/fail verdict per criterion is added to the terminal summary.
"""

from __future__ import annotations

import pytest

from henon_brody.acceptance import CRITERIA, DEFAULT_SEED

VERDICTS: dict[int, str] = {}


def _run(k: int):
    checks = CRITERIA[k](DEFAULT_SEED, False)
    for c in checks:
        print(c.line())
    failed = [c for c in checks if c.passed is False]
    status = "FAIL" if failed else "pass"
    VERDICTS[k] = f"criterion {k}: {status}" + (f" ({'; '.join(c.name for c in failed)})" if failed else "")
    print(VERDICTS[k])
    assert not failed, "; ".join(c.line() for c in failed)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 6, 7])
def test_criterion(k):
    _run(k)


@pytest.mark.slow
def test_criterion_5_pipeline():
    _run(5)


@pytest.mark.slow
def test_criterion_8_determinism():
    _run(8)
