"""One test per acceptance criterion; tolerance is exact equality throughout.

Each line "criterion N PASS|FAIL ..." is printed when the test runs and again
in the terminal summary.
"""

import pytest

from zhufusion import selftest


@pytest.mark.parametrize("number", [num for num, _, _ in selftest.CRITERIA])
def test_criterion(number, acceptance_log):
    result = selftest.run_one(number)
    line = selftest.format_line(result)
    # keep the summary sorted numerically
    acceptance_log.append(line.replace("criterion %2d" % number, "criterion %02d" % number))
    print(line)
    assert result.passed, line
