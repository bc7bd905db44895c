"""
Distances, travel times and GPS cleaning
========================================

Great-circle distances on a spherical earth, the travel-time estimate
used by the planner, and the speed filter that drops teleporting fixes.
"""

import numpy as np

from trajmine import Coordinate, GpsPoint, Trajectory, clean, duration_estimate, haversine_distance
from trajmine.geo import haversine_matrix

# two landmarks in Melaka, about 1.5 km apart
planetarium = Coordinate(2.2720, 102.2870)
zoo = Coordinate(2.2774, 102.2990)
d = haversine_distance(planetarium, zoo)
print(f"planetarium -> zoo: {d:.2f} m, {duration_estimate(d, 20):.0f} s at 20 km/h")

# the vectorised form gives a full pairwise table
lats = np.array([planetarium.lat, zoo.lat, 2.1896])
lons = np.array([planetarium.lon, zoo.lon, 102.2501])
print(np.round(haversine_matrix(lats, lons)))

# a walk sampled every 30 s with one fix that jumps 20 km away and back
rng = np.random.default_rng(0)
steps = np.cumsum(rng.normal(0, 1e-4, (40, 2)), axis=0) + [2.2, 102.25]
steps[17] += [0.18, 0.0]
walk = Trajectory("demo", tuple(GpsPoint(Coordinate(*xy), 30.0 * k) for k, xy in enumerate(steps)))

kept = clean(walk, max_speed_kmh=300)
print(len(walk.points), "fixes in,", len(kept.points), "kept")
dropped = sorted(set(walk.points) - set(kept.points), key=lambda p: p.timestamp)
print("dropped at t =", [p.timestamp for p in dropped])

# filtering is idempotent
assert clean(kept).points == kept.points
