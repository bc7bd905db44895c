"""Multiday itinerary planning.

Single-day itineraries are enumerated exhaustively under the time budget,
which turns the multi-route orienteering problem into set packing over
those itineraries. The packing is solved greedily and then improved by a
local swap pass.
"""
import math
from dataclasses import dataclass, field

from .errors import UnknownPoiError
from .geo import DEFAULT_GEO, Coordinate, duration_estimate, haversine_distance


@dataclass(frozen=True)
class Poi:
    id: str
    centroid: Coordinate
    visit_duration_s: float = 3600.0
    score: float = 1.0
    preferred: bool = False

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))
        if not self.visit_duration_s > 0:
            raise ValueError(f"POI {self.id}: visit duration must be positive")
        if not (math.isfinite(self.score) and self.score >= 0):
            raise ValueError(f"POI {self.id}: score must be finite and >= 0")


class PoiCatalog:
    def __init__(self, pois):
        self.pois = tuple(pois)
        self._by_id = {}
        for poi in self.pois:
            if poi.id in self._by_id:
                raise ValueError(f"duplicate POI id {poi.id!r}")
            self._by_id[poi.id] = poi

    def __len__(self):
        return len(self.pois)

    def __iter__(self):
        return iter(self.pois)

    def __contains__(self, poi_id):
        return str(poi_id) in self._by_id

    def __getitem__(self, poi_id):
        try:
            return self._by_id[str(poi_id)]
        except KeyError:
            raise UnknownPoiError(poi_id) from None

    @classmethod
    def from_clusters(cls, clusters, visit_duration_s=3600.0, preferred=()):
        """Catalog scored by cluster authority."""
        preferred = {str(x) for x in preferred}
        return cls(Poi(str(c.cluster_id), c.centroid, visit_duration_s,
                       float(c.authority), str(c.cluster_id) in preferred)
                   for c in clusters)


@dataclass(frozen=True)
class PlanParams:
    days: int = 1
    day_budget_s: float = 28_800.0
    travel_speed_kmh: float = 20.0
    max_pois_per_day: int = 6
    preferred_weight: float = 10.0
    return_to_start: bool = False
    # reserved: no cost data exists in the pipeline
    money_budget: float = None

    def __post_init__(self):
        if self.days < 1:
            raise ValueError("days must be >= 1")
        if not self.day_budget_s > 0:
            raise ValueError("day_budget_s must be positive")
        if not self.travel_speed_kmh > 0:
            raise ValueError("travel_speed_kmh must be positive")
        if self.max_pois_per_day < 1:
            raise ValueError("max_pois_per_day must be >= 1")
        if self.preferred_weight < 1:
            raise ValueError("preferred_weight must be >= 1")

    def effective_score(self, poi):
        return poi.score * (self.preferred_weight if poi.preferred else 1.0)


@dataclass(frozen=True)
class Leg:
    distance_m: float
    duration_s: int


@dataclass(frozen=True)
class DayItinerary:
    pois: tuple
    legs: tuple
    total_time_s: float
    total_score: float
    mask: int = field(default=0, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.pois)) != len(self.pois):
            raise ValueError(f"POI repeated within a day: {self.pois}")


@dataclass(frozen=True)
class MultidayItinerary:
    days: tuple
    score: float
    enumerated: int = 0
    max_pois_per_day: int = 0
    # preferred POIs that displaced a higher-scoring day to get in
    forced: tuple = ()

    def __post_init__(self):
        seen = set()
        for day in self.days:
            dup = seen.intersection(day.pois)
            if dup:
                raise ValueError(f"POI appears on more than one day: {sorted(dup)}")
            seen.update(day.pois)

    @property
    def pois(self):
        return tuple(x for day in self.days for x in day.pois)


class _Legs:
    """Pairwise leg table for a catalog plus the start location."""

    def __init__(self, catalog, start, p, cfg):
        self.pois = list(catalog)
        n = len(self.pois)
        speed = p.travel_speed_kmh
        self.start_dist = [haversine_distance(start, q.centroid, cfg) for q in self.pois]
        self.start_dur = [duration_estimate(d, speed) for d in self.start_dist]
        self.dist = [[haversine_distance(a.centroid, b.centroid, cfg) for b in self.pois]
                     for a in self.pois]
        self.dur = [[duration_estimate(self.dist[i][j], speed) for j in range(n)]
                    for i in range(n)]

    def legs(self, seq, return_to_start):
        out = [Leg(self.start_dist[seq[0]], self.start_dur[seq[0]])]
        out += [Leg(self.dist[a][b], self.dur[a][b]) for a, b in zip(seq, seq[1:])]
        if return_to_start:
            out.append(Leg(self.start_dist[seq[-1]], self.start_dur[seq[-1]]))
        return tuple(out)


def enumerate_single_day(catalog, start, p=PlanParams(), cfg=DEFAULT_GEO):
    """Every budget-feasible ordered visit sequence from ``start``.

    Sorted by effective score (descending), then by the id sequence.
    """
    if len(catalog) == 0:
        raise ValueError("empty POI catalog")
    table = _Legs(catalog, start, p, cfg)
    pois = table.pois
    n = len(pois)
    visit = [q.visit_duration_s for q in pois]
    eff = [p.effective_score(q) for q in pois]
    budget = p.day_budget_s
    found = []

    def walk(seq, mask, t):
        last = seq[-1]
        closing = table.start_dur[last] if p.return_to_start else 0
        if t + closing <= budget:
            found.append((tuple(seq), mask, t + closing))
        if len(seq) == p.max_pois_per_day:
            return
        for k in range(n):
            if mask >> k & 1:
                continue
            t2 = t + table.dur[last][k] + visit[k]
            if t2 <= budget:
                seq.append(k)
                walk(seq, mask | 1 << k, t2)
                seq.pop()

    for k in range(n):
        t0 = table.start_dur[k] + visit[k]
        if t0 <= budget:
            walk([k], 1 << k, t0)

    days = []
    for seq, mask, total in found:
        days.append(DayItinerary(
            pois=tuple(pois[k].id for k in seq),
            legs=table.legs(seq, p.return_to_start),
            total_time_s=total,
            total_score=math.fsum(eff[k] for k in seq),
            mask=mask,
        ))
    days.sort(key=lambda d: (-d.total_score, d.pois))
    return days


def build_itinerary_index(days):
    """Inverted index: POI id -> ids (positions) of itineraries containing it."""
    index = {}
    for k, day in enumerate(days):
        for poi_id in day.pois:
            index.setdefault(poi_id, []).append(k)
    return index


def _total(days):
    return math.fsum(d.total_score for d in days if d is not None)


def _best_fill(pool, blocked, slots):
    """Best-scoring set of at most ``slots`` (1 or 2) disjoint itineraries
    from ``pool`` that avoid ``blocked``; returns (score, picks)."""
    cands = [d for d in pool if not d.mask & blocked]
    if not cands:
        return 0.0, ()
    best, picks = cands[0].total_score, (cands[0],)
    if slots == 1:
        return best, picks
    top = cands[0].total_score
    for x_pos, x in enumerate(cands):
        if x.total_score + top <= best:
            break
        for y in cands[x_pos + 1:]:
            if x.total_score + y.total_score <= best:
                break
            if not x.mask & y.mask:
                best, picks = x.total_score + y.total_score, (x, y)
                break  # sorted by score: first disjoint partner is the best
    return best, picks


def _best_per_set(pool):
    """Highest-ranked itinerary for each distinct POI set, in pool order."""
    seen = set()
    out = []
    for d in pool:
        if d.mask not in seen:
            seen.add(d.mask)
            out.append(d)
    return out


def _adjust(pool, slots, rounds=25):
    """Local search: re-pack any one or two day slots optimally given the rest."""
    n = len(slots)
    eps = 1e-12
    for _ in range(rounds):
        improved = False
        groups = [(i,) for i in range(n)] + [(i, j) for i in range(n) for j in range(i + 1, n)]
        for group in groups:
            rest = [slots[k] for k in range(n) if k not in group]
            blocked = 0
            for d in rest:
                if d is not None:
                    blocked |= d.mask
            current = _total(slots[k] for k in group)
            best, picks = _best_fill(pool, blocked, len(group))
            if best > current + eps:
                fill = list(picks) + [None] * (len(group) - len(picks))
                for k, d in zip(group, fill):
                    slots[k] = d
                improved = True
        if not improved:
            break
    return slots


def _ensure_preferred(pool, slots, catalog):
    """Make room for preferred POIs that the packing left out.

    A missing preferred POI replaces the cheapest slot that holds no other
    preferred POI, using the best itinerary that contains it.
    """
    preferred = sorted((q for q in catalog if q.preferred), key=lambda q: q.id)
    forced = []
    for poi in preferred:
        if any(d is not None and poi.id in d.pois for d in slots):
            continue
        best = None
        for k, slot in enumerate(slots):
            if slot is not None and any(catalog[x].preferred for x in slot.pois):
                continue
            blocked = 0
            for m, d in enumerate(slots):
                if m != k and d is not None:
                    blocked |= d.mask
            for d in pool:
                if poi.id in d.pois and not d.mask & blocked:
                    gain = d.total_score - (slot.total_score if slot is not None else 0.0)
                    if best is None or gain > best[0]:
                        best = (gain, k, d)
                    break  # pool is score-sorted
        if best is not None:
            slots[best[1]] = best[2]
            if best[0] < 0:
                forced.append(poi.id)
    return slots, tuple(forced)


def plan_multiday(catalog, start, p=PlanParams(), cfg=DEFAULT_GEO, pool=None):
    """Greedy set packing of single-day itineraries plus local adjustment."""
    if pool is None:
        pool = enumerate_single_day(catalog, start, p, cfg)
    picked, used = [], 0
    for d in pool:
        if len(picked) == p.days:
            break
        if not d.mask & used:
            picked.append(d)
            used |= d.mask
    slots = picked + [None] * (p.days - len(picked))
    # packing only cares about which POIs a day covers
    by_set = _best_per_set(pool)
    slots = _adjust(by_set, slots)
    slots, forced = _ensure_preferred(by_set, slots, catalog)
    days = [d for d in slots if d is not None]
    # best day first, mirroring the greedy pick order
    days.sort(key=lambda d: (-d.total_score, d.pois))
    return MultidayItinerary(tuple(days), _total(days), len(pool),
                             p.max_pois_per_day, forced)


def _resolve(x, catalog):
    if isinstance(x, Coordinate):
        return x
    return catalog[x].centroid


def distance_duration(a, b, catalog, p=PlanParams(), cfg=DEFAULT_GEO):
    """Great-circle distance (m) and travel time (s) between POIs or points."""
    d = haversine_distance(_resolve(a, catalog), _resolve(b, catalog), cfg)
    return d, duration_estimate(d, p.travel_speed_kmh)


def plan_to_dict(plan, catalog):
    """JSON-ready plan: per-day stops with arrive/depart offsets (seconds)."""
    out_days = []
    for n, day in enumerate(plan.days, start=1):
        t = 0
        stops = []
        for poi_id, leg in zip(day.pois, day.legs):
            poi = catalog[poi_id]
            t += leg.duration_s
            arrive = t
            t += poi.visit_duration_s
            stops.append({
                "poi": poi_id,
                "lat": poi.centroid.lat,
                "lon": poi.centroid.lon,
                "arrive_s": arrive,
                "depart_s": t,
                "leg_distance_m": round(leg.distance_m, 3),
                "leg_duration_s": leg.duration_s,
            })
        day_out = {"day": n, "stops": stops,
                   "total_time_s": day.total_time_s, "total_score": day.total_score}
        if len(day.legs) > len(day.pois):
            back = day.legs[-1]
            day_out["return_leg"] = {"distance_m": round(back.distance_m, 3),
                                     "duration_s": back.duration_s}
        out_days.append(day_out)
    return {
        "days": out_days,
        "score": plan.score,
        "enumerated_itineraries": plan.enumerated,
        "max_pois_per_day": plan.max_pois_per_day,
    }
