from functools import lru_cache

import pytest

from aptile.substitution import ab_square_seed, ab_star_seed, inflate_n, penrose_sun_seed


@lru_cache(maxsize=None)
def ab_square(n):
    return inflate_n(ab_square_seed(), n)


@lru_cache(maxsize=None)
def ab_star(n):
    return inflate_n(ab_star_seed(), n)


@lru_cache(maxsize=None)
def penrose_sun(n):
    return inflate_n(penrose_sun_seed(), n)


@pytest.fixture(scope="session")
def square_patches():
    return ab_square


@pytest.fixture(scope="session")
def star_patches():
    return ab_star


@pytest.fixture(scope="session")
def sun_patches():
    return penrose_sun


# One PASS/FAIL line per acceptance criterion, repeated at the end of the run.
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
