import math
from pathlib import Path

import pytest

from trajmine.geo import Coordinate
from trajmine.trajectory import GpsPoint, Trajectory

DATA = Path(__file__).parent / "data"

R = 6_371_000.0
PLANETARIUM = Coordinate(2.272, 102.287)
ZOO = Coordinate(2.2774, 102.299)
# spherical law of cosines at 40 digits (mpmath), frozen
PLANETARIUM_ZOO_M = 1462.2583151143706


def law_of_cosines(a, b, r=R):
    p1, p2 = math.radians(a.lat), math.radians(b.lat)
    dl = math.radians(b.lon - a.lon)
    c = math.sin(p1) * math.sin(p2) + math.cos(p1) * math.cos(p2) * math.cos(dl)
    return r * math.acos(max(-1.0, min(1.0, c)))


def offset(c, north_m, east_m):
    """Coordinate displaced by a small local offset in meters."""
    dlat = math.degrees(north_m / R)
    dlon = math.degrees(east_m / (R * math.cos(math.radians(c.lat))))
    return Coordinate(c.lat + dlat, c.lon + dlon)


def make_traj(coords, times, user="u"):
    return Trajectory(user, tuple(GpsPoint(c, float(t)) for c, t in zip(coords, times)))


@pytest.fixture
def table64_bytes():
    return (DATA / "table64.tsv").read_bytes()


def random_walk(rng, n, origin=Coordinate(2.2, 102.25), user="u"):
    """Random trajectory mixing lingering jitter, walking and jumps."""
    c, t = origin, 0.0
    coords, times = [], []
    mode = 0
    for _ in range(n):
        if rng.random() < 0.1:
            mode = int(rng.integers(0, 3))
        scale = (15.0, 120.0, 600.0)[mode]
        c = offset(c, rng.normal(0, scale), rng.normal(0, scale))
        t += float(rng.uniform(20, 240))
        coords.append(c)
        times.append(t)
    return make_traj(coords, times, user)


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance verdict lines at the end of the run."""
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
