import pytest

from ladderops import BasisSpec, build_grid

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def grids():
    """Cached (basis, grid) pairs keyed by l_max."""
    cache = {}

    def get(l_max):
        if l_max not in cache:
            basis = BasisSpec(l_max)
            cache[l_max] = (basis, build_grid(basis))
        return cache[l_max]

    return get


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
