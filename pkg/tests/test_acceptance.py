"""The ten acceptance criteria, one test each.

Every check in ``drudespec.checks`` measures its metrics, compares them
with fixed tolerances and a runtime budget, and reports one line, which
is printed and also collected into an "acceptance criteria" section at
the end of the pytest report.
"""

import pytest

from drudespec.checks import ALL_CHECKS

SLOW = {6, 8, 10}


PARAMS = [
    pytest.param(
        check,
        id=f"criterion_{i:02d}_{check.__name__.removeprefix('check_')}",
        marks=[pytest.mark.slow] if i in SLOW else [],
    )
    for i, check in enumerate(ALL_CHECKS, start=1)
]


@pytest.mark.parametrize("check", PARAMS)
def test_criterion(check, criterion_lines):
    result = check()
    print(result.line())
    criterion_lines[result.criterion] = result.line()
    assert result.passed, f"{result.line()} failed on {result.failures()}"
