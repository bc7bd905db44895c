"""Great-circle distance, centroids and travel-time estimates.

All public functions take and return degrees; radians are internal only.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import CoordinateError

EARTH_RADIUS_M = 6_371_000.0


@dataclass(frozen=True, slots=True)
class Coordinate:
    lat: float
    lon: float

    def __post_init__(self):
        # plain floats keep repr() and JSON output free of numpy scalar types
        lat, lon = float(self.lat), float(self.lon)
        object.__setattr__(self, "lat", lat)
        object.__setattr__(self, "lon", lon)
        if not (math.isfinite(lat) and math.isfinite(lon)):
            raise CoordinateError(f"non-finite coordinate ({lat}, {lon})")
        if not -90.0 <= lat <= 90.0:
            raise CoordinateError(f"latitude {lat} outside [-90, 90]")
        if not -180.0 <= lon <= 180.0:
            raise CoordinateError(f"longitude {lon} outside [-180, 180]")

    def __iter__(self):
        yield self.lat
        yield self.lon


@dataclass(frozen=True)
class GeoConfig:
    earth_radius_m: float = EARTH_RADIUS_M
    # typical urban travel speed observed on the reference traces
    default_travel_speed_kmh: float = 20.0

    def __post_init__(self):
        if not self.earth_radius_m > 0:
            raise ValueError("earth_radius_m must be positive")
        if not self.default_travel_speed_kmh > 0:
            raise ValueError("default_travel_speed_kmh must be positive")


DEFAULT_GEO = GeoConfig()


def haversine_distance(a, b, cfg=DEFAULT_GEO):
    """Great-circle distance in meters between two coordinates."""
    phi_a = math.radians(a.lat)
    phi_b = math.radians(b.lat)
    s_lat = math.sin((phi_a - phi_b) / 2.0)
    s_lon = math.sin(math.radians(a.lon - b.lon) / 2.0)
    h = s_lat * s_lat + math.cos(phi_a) * math.cos(phi_b) * s_lon * s_lon
    # rounding can push h a hair above 1 for antipodes
    return 2.0 * cfg.earth_radius_m * math.asin(math.sqrt(min(h, 1.0)))


def haversine_matrix(lats, lons, cfg=DEFAULT_GEO):
    """Pairwise haversine distances (meters) for arrays of degrees."""
    phi = np.radians(np.asarray(lats, dtype=float))
    lam = np.asarray(lons, dtype=float)
    s_lat = np.sin((phi[:, None] - phi[None, :]) / 2.0)
    s_lon = np.sin(np.radians(lam[:, None] - lam[None, :]) / 2.0)
    cos_phi = np.cos(phi)
    h = s_lat * s_lat + np.outer(cos_phi, cos_phi) * s_lon * s_lon
    return 2.0 * cfg.earth_radius_m * np.arcsin(np.sqrt(np.minimum(h, 1.0)))


def centroid(points):
    """Arithmetic mean of latitudes and longitudes.

    Adequate at city scale; it is not a spherical mean and misbehaves
    across the antimeridian or near the poles.
    """
    points = list(points)
    if not points:
        raise ValueError("centroid of an empty point list")
    n = len(points)
    # fsum is exactly rounded, so the result does not depend on input order
    return Coordinate(math.fsum(p.lat for p in points) / n,
                      math.fsum(p.lon for p in points) / n)


def duration_estimate(distance_m, speed_kmh):
    """Whole seconds needed to cover ``distance_m`` at ``speed_kmh``."""
    if not speed_kmh > 0:
        raise ValueError(f"speed must be positive, got {speed_kmh}")
    if distance_m < 0:
        raise ValueError(f"distance must be non-negative, got {distance_m}")
    return int(round(distance_m / (speed_kmh * 1000.0 / 3600.0)))
