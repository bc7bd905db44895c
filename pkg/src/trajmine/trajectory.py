"""Trajectory types, the speed filter and per-segment speed profiles."""
import math
import statistics
from dataclasses import dataclass

from .geo import DEFAULT_GEO, Coordinate, haversine_distance

DEFAULT_MAX_SPEED_KMH = 300.0


@dataclass(frozen=True, slots=True)
class GpsPoint:
    coord: Coordinate
    timestamp: float  # seconds since epoch, UTC

    def __post_init__(self):
        object.__setattr__(self, "timestamp", float(self.timestamp))
        if not (math.isfinite(self.timestamp) and self.timestamp >= 0):
            raise ValueError(f"invalid timestamp {self.timestamp!r}")

    @property
    def lat(self):
        return self.coord.lat

    @property
    def lon(self):
        return self.coord.lon

    @classmethod
    def at(cls, lat, lon, timestamp):
        return cls(Coordinate(lat, lon), timestamp)


@dataclass(frozen=True)
class Trajectory:
    """One recording session of one user; timestamps strictly increase."""

    user_id: str
    points: tuple

    def __post_init__(self):
        points = tuple(self.points)
        object.__setattr__(self, "points", points)
        if not points:
            raise ValueError("a trajectory needs at least one point")
        for k in range(1, len(points)):
            if not points[k].timestamp > points[k - 1].timestamp:
                raise ValueError(
                    f"timestamps not strictly increasing at index {k} "
                    f"({points[k - 1].timestamp} -> {points[k].timestamp})")

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, k):
        return self.points[k]

    @property
    def start(self):
        return self.points[0].timestamp

    @property
    def end(self):
        return self.points[-1].timestamp


def implied_speed_kmh(p, q, cfg=DEFAULT_GEO):
    dt = q.timestamp - p.timestamp
    return 3.6 * haversine_distance(p.coord, q.coord, cfg) / dt


def clean(t, max_speed_kmh=DEFAULT_MAX_SPEED_KMH, cfg=DEFAULT_GEO):
    """Drop points that could only be reached faster than ``max_speed_kmh``.

    Each point is compared with the last point that was *kept*, so a lone
    spike does not also knock out the sample after it.
    """
    kept = [t.points[0]]
    for q in t.points[1:]:
        if implied_speed_kmh(kept[-1], q, cfg) <= max_speed_kmh:
            kept.append(q)
    if len(kept) == len(t.points):
        return t
    return Trajectory(t.user_id, tuple(kept))


@dataclass(frozen=True)
class SpeedSegment:
    start_index: int
    distance_m: float
    dt_s: float
    speed_kmh: float


@dataclass(frozen=True)
class SpeedProfile:
    segments: tuple

    @property
    def total_distance_m(self):
        return math.fsum(s.distance_m for s in self.segments)

    @property
    def total_time_s(self):
        return math.fsum(s.dt_s for s in self.segments)

    @property
    def mean_kmh(self):
        """Duration-weighted mean, i.e. total distance over total time."""
        return 3.6 * self.total_distance_m / self.total_time_s

    @property
    def median_kmh(self):
        return statistics.median(s.speed_kmh for s in self.segments)

    @property
    def max_kmh(self):
        return max(s.speed_kmh for s in self.segments)


def speed_profile(t, cfg=DEFAULT_GEO):
    if len(t.points) < 2:
        raise ValueError("a speed profile needs at least two points")
    segments = []
    for k in range(len(t.points) - 1):
        p, q = t.points[k], t.points[k + 1]
        d = haversine_distance(p.coord, q.coord, cfg)
        dt = q.timestamp - p.timestamp
        segments.append(SpeedSegment(k, d, dt, 3.6 * d / dt))
    return SpeedProfile(tuple(segments))
