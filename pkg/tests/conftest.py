from fractions import Fraction

import pytest

from checkerboard.lattice import WeightField

H = Fraction(1, 2)


@pytest.fixture
def half():
    return WeightField.constant(H)


@pytest.fixture
def third():
    return WeightField.constant(Fraction(1, 3))


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def record(request):
    """Log one acceptance line; the list is printed in the terminal summary."""
    lines = request.config.stash[ACCEPTANCE_KEY]

    def _record(number, title, passed, detail=""):
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}" + (f"  ({detail})" if detail else "")
        lines.append((number, line))
        print(line)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
