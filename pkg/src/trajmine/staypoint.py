"""Stay-point detection.

A stay point summarises a run of consecutive samples that all lie within
``distance_threshold_m`` of the run's first sample (the anchor) and span
at least ``time_threshold_s``.
"""
from dataclasses import dataclass

from .geo import DEFAULT_GEO, Coordinate, centroid, haversine_distance


@dataclass(frozen=True)
class StayPointParams:
    distance_threshold_m: float = 200.0
    time_threshold_s: float = 1200.0

    def __post_init__(self):
        if not self.distance_threshold_m > 0:
            raise ValueError("distance_threshold_m must be positive")
        if not self.time_threshold_s > 0:
            raise ValueError("time_threshold_s must be positive")


@dataclass(frozen=True)
class StayPoint:
    user_id: str
    centroid: Coordinate
    arrival: float
    departure: float
    member_count: int
    # half-open index range [start, stop) into the source trajectory;
    # not serialised, kept so invariants can be re-checked
    span: tuple = None

    def __post_init__(self):
        if self.member_count < 2:
            raise ValueError(f"stay point with {self.member_count} members")
        if self.departure < self.arrival:
            raise ValueError("stay point departs before it arrives")

    @property
    def duration_s(self):
        return self.departure - self.arrival

    @property
    def lat(self):
        return self.centroid.lat

    @property
    def lon(self):
        return self.centroid.lon


def detect_stay_points(t, p=StayPointParams(), cfg=DEFAULT_GEO):
    pts = t.points
    n = len(pts)
    out = []
    i = 0
    while i < n - 1:
        anchor = pts[i].coord
        j = i + 1
        while j < n and haversine_distance(anchor, pts[j].coord, cfg) <= p.distance_threshold_m:
            j += 1
        # pts[i:j] is the maximal window around the anchor
        if j - 1 > i and pts[j - 1].timestamp - pts[i].timestamp >= p.time_threshold_s:
            out.append(StayPoint(
                user_id=t.user_id,
                centroid=centroid(q.coord for q in pts[i:j]),
                arrival=pts[i].timestamp,
                departure=pts[j - 1].timestamp,
                member_count=j - i,
                span=(i, j),
            ))
            i = j
        else:
            i += 1
    return out


def detect_corpus(trajectories, p=StayPointParams(), cfg=DEFAULT_GEO):
    """Stay points of every trajectory, ordered by user then arrival."""
    out = []
    for t in trajectories:
        out.extend(detect_stay_points(t, p, cfg))
    out.sort(key=lambda s: (str(s.user_id), s.arrival))
    return out
