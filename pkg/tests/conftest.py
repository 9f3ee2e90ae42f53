import pytest

from ridepool.core import CityMap, ScenarioConfig, TripRequest

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def path_map(n):
    """Zones 0..n-1 in a row, centroids (i, 0)."""
    return CityMap.from_edges({i: (float(i), 0.0) for i in range(n)}, [(i, i + 1) for i in range(n - 1)])


@pytest.fixture
def line3():
    return path_map(3)


@pytest.fixture
def grid5():
    return CityMap.grid(5, 5)


@pytest.fixture
def cfg():
    return ScenarioConfig(fleet_size=1, seed=0)


def req(id, o, d, t=0, F=10.0, p=1200, k=1):
    return TripRequest(t=t, id=id, o=o, d=d, p=p, k=k, F=F)
