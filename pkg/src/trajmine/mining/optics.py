"""OPTICS ordering over stay points and eps'-threshold cluster extraction."""
import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from ..geo import DEFAULT_GEO, Coordinate, centroid, haversine_matrix

UNDEFINED = math.inf
NOISE = -1


@dataclass(frozen=True)
class OpticsParams:
    min_pts: int = 5
    eps_m: float = 500.0
    eps_prime_m: float = 250.0

    def __post_init__(self):
        if self.min_pts < 2:
            raise ValueError("min_pts must be at least 2")
        if not self.eps_m > 0:
            raise ValueError("eps_m must be positive")
        if not 0 < self.eps_prime_m <= self.eps_m:
            raise ValueError("eps_prime_m must lie in (0, eps_m]")


@dataclass(frozen=True)
class PoiCluster:
    cluster_id: int
    centroid: Coordinate
    members: tuple
    distinct_users: int
    total_dwell_s: float
    authority: float = 0.0

    def __post_init__(self):
        if not self.members:
            raise ValueError("cluster without members")
        if self.distinct_users < 1:
            raise ValueError("cluster without users")
        if not (math.isfinite(self.authority) and self.authority >= 0):
            raise ValueError(f"invalid authority {self.authority}")

    @property
    def lat(self):
        return self.centroid.lat

    @property
    def lon(self):
        return self.centroid.lon


@dataclass(frozen=True, eq=False)
class OpticsOrdering:
    """Processing order plus per-point reachability and core distances.

    ``reachability`` and ``core_distance`` are indexed by input position,
    not by position in ``order``. Undefined values are ``inf``.
    """

    order: np.ndarray
    reachability: np.ndarray
    core_distance: np.ndarray
    eps_m: float
    min_pts: int
    points: tuple = field(repr=False)

    def entries(self):
        for k in self.order:
            k = int(k)
            yield k, float(self.reachability[k]), float(self.core_distance[k])

    def reachability_plot(self):
        """Reachability values in processing order."""
        return self.reachability[self.order]


def _coords(items):
    return [getattr(x, "centroid", x) for x in items]


def distance_matrix(items, cfg=DEFAULT_GEO):
    cs = _coords(items)
    return haversine_matrix([c.lat for c in cs], [c.lon for c in cs], cfg)


def optics_order(points, p=OpticsParams(), cfg=DEFAULT_GEO, dist=None):
    points = tuple(points)
    n = len(points)
    if n == 0:
        raise ValueError("OPTICS needs at least one point")
    if dist is None:
        dist = distance_matrix(points, cfg)

    core = np.full(n, UNDEFINED)
    neighbours = []
    for k in range(n):
        # the point itself counts towards min_pts
        nb = np.flatnonzero(dist[k] <= p.eps_m)
        neighbours.append(nb)
        if len(nb) >= p.min_pts:
            core[k] = np.partition(dist[k, nb], p.min_pts - 1)[p.min_pts - 1]

    reach = np.full(n, UNDEFINED)
    processed = np.zeros(n, dtype=bool)
    order = []

    def expand(k, seeds):
        if core[k] == UNDEFINED:
            return
        for o in neighbours[k]:
            if processed[o]:
                continue
            r = max(core[k], dist[k, o])
            if r < reach[o]:
                reach[o] = r
                heapq.heappush(seeds, (r, int(o)))

    for start in range(n):
        if processed[start]:
            continue
        processed[start] = True
        order.append(start)
        seeds = []
        expand(start, seeds)
        while seeds:
            r, q = heapq.heappop(seeds)
            if processed[q] or r != reach[q]:
                continue  # stale heap entry
            processed[q] = True
            order.append(q)
            expand(q, seeds)

    return OpticsOrdering(np.array(order, dtype=int), reach, core,
                          float(p.eps_m), int(p.min_pts), points)


def cluster_labels(o, eps_prime_m):
    """DBSCAN-equivalent labels at ``eps_prime_m``; ``NOISE`` for noise.

    Cluster ids are assigned in order of discovery along the ordering.
    """
    if eps_prime_m > o.eps_m:
        raise ValueError(
            f"eps' = {eps_prime_m} exceeds the ordering's eps = {o.eps_m}")
    labels = np.full(len(o.order), NOISE, dtype=int)
    current = NOISE
    next_id = 0
    for k in o.order:
        if o.reachability[k] > eps_prime_m:
            if o.core_distance[k] <= eps_prime_m:
                current = next_id
                next_id += 1
                labels[k] = current
            else:
                current = NOISE
        else:
            labels[k] = current
    return labels


def summarize_clusters(points, labels):
    """Build one PoiCluster per non-noise label (authority left at 0)."""
    groups = {}
    for k, lab in enumerate(labels):
        if lab != NOISE:
            groups.setdefault(int(lab), []).append(k)
    out = []
    for cid in sorted(groups):
        members = tuple(groups[cid])
        items = [points[k] for k in members]
        users = {getattr(s, "user_id", None) for s in items}
        dwell = sum(getattr(s, "duration_s", 0.0) for s in items)
        out.append(PoiCluster(
            cluster_id=cid,
            centroid=centroid(_coords(items)),
            members=members,
            distinct_users=len(users),
            total_dwell_s=float(dwell),
        ))
    return out


def extract_clusters(o, eps_prime_m, min_pts=None):
    if min_pts is not None and min_pts != o.min_pts:
        # core distances were computed for the ordering's min_pts
        raise ValueError(
            f"min_pts={min_pts} differs from the ordering's {o.min_pts}")
    return summarize_clusters(o.points, cluster_labels(o, eps_prime_m))
