import pytest
from hypothesis import settings

from bowenseries.boundary import make_parameters
from bowenseries.geometry import make_polygon

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# acceptance lines collected by test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def poly2():
    return make_polygon(2)


@pytest.fixture(scope="session")
def poly3():
    return make_polygon(3)


@pytest.fixture(scope="session")
def allP2(poly2):
    return make_parameters(poly2, "all-P")


@pytest.fixture(scope="session")
def allQ2(poly2):
    return make_parameters(poly2, "all-Q")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
