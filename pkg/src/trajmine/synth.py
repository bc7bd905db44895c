"""Seeded synthetic GPS corpus with planted dwells.

Each trajectory leaves a random start point, dwells at two or three
regions (one fix per ``sample_s``) and walks away again. The generator
records every planted dwell, every pure-transit stretch and the order in
which regions were visited, so recovery can be checked exactly.
"""
import json
import math
from dataclasses import asdict, dataclass, field
from datetime import date, datetime, timezone
from pathlib import Path

import numpy as np

from .formats import export_csv
from .geo import EARTH_RADIUS_M, Coordinate
from .trajectory import GpsPoint, Trajectory

_M_PER_DEG = EARTH_RADIUS_M * math.pi / 180


def _shift(c, north_m, east_m):
    """Move ``c`` by a local east/north offset (small-distance approximation)."""
    lat = c[0] + north_m / _M_PER_DEG
    lon = c[1] + east_m / (_M_PER_DEG * math.cos(math.radians(c[0])))
    return lat, lon


@dataclass(frozen=True)
class Region:
    id: int
    lat: float
    lon: float
    radius_m: float = 100.0


@dataclass(frozen=True)
class SynthSpec:
    users: int = 10
    trajectories_per_user: int = 10
    regions: tuple = ()  # explicit Region list; random layout when empty
    n_regions: int = 8
    origin: tuple = (2.1970, 102.2480)
    area_m: float = 8000.0
    min_separation_m: float = 1500.0
    region_radius_m: float = 100.0
    dwells_per_trajectory: tuple = (2, 3)
    dwell_s: tuple = (1500, 1920)
    noise_m: float = 15.0
    sample_s: int = 60
    transit_kmh: tuple = (20.0, 40.0)
    spike_rate: float = 0.0
    spike_m: tuple = (5000.0, 20000.0)
    start_date: str = "2024-03-01"
    seed: int = 0

    def __post_init__(self):
        if self.users < 1 or self.trajectories_per_user < 1:
            raise ValueError("need at least one user and one trajectory")
        if not self.regions and self.n_regions < 1:
            raise ValueError("at least one dwell region is required")
        if self.sample_s <= 0 or self.noise_m < 0:
            raise ValueError("sample_s must be positive and noise_m non-negative")
        lo, hi = self.dwells_per_trajectory
        if not 1 <= lo <= hi:
            raise ValueError("dwells_per_trajectory must be 1 <= lo <= hi")


@dataclass
class SyntheticCorpus:
    trajectories: list
    truth: dict = field(default_factory=dict)

    def by_user(self):
        out = {}
        for t in self.trajectories:
            out.setdefault(t.user_id, []).append(t)
        return out


def _layout(spec, rng):
    if spec.regions:
        return [r if isinstance(r, Region) else Region(**r) for r in spec.regions]
    regions = []
    for _ in range(10_000):
        if len(regions) == spec.n_regions:
            break
        n, e = rng.uniform(-spec.area_m / 2, spec.area_m / 2, size=2)
        lat, lon = _shift(spec.origin, n, e)
        ok = all(math.hypot((lat - r.lat) * _M_PER_DEG,
                            (lon - r.lon) * _M_PER_DEG * math.cos(math.radians(lat)))
                 >= spec.min_separation_m for r in regions)
        if ok:
            regions.append(Region(len(regions), round(lat, 6), round(lon, 6),
                                  spec.region_radius_m))
    else:
        raise ValueError("could not place regions; enlarge area_m or lower min_separation_m")
    if len(regions) < spec.n_regions:
        raise ValueError("could not place regions; enlarge area_m or lower min_separation_m")
    return regions


def _spot(region, rng):
    # uniform over the disc
    r = region.radius_m * math.sqrt(rng.uniform())
    a = rng.uniform(0, 2 * math.pi)
    return _shift((region.lat, region.lon), r * math.sin(a), r * math.cos(a))


def _leg(a, b, speed_ms, dt):
    """Intermediate fixes strictly between ``a`` and ``b``.

    Fixes are at least one full step apart, so a transit never moves less
    than ``speed_ms * dt`` between samples.
    """
    north = (b[0] - a[0]) * _M_PER_DEG
    east = (b[1] - a[1]) * _M_PER_DEG * math.cos(math.radians(a[0]))
    dist = math.hypot(north, east)
    steps = max(1, math.floor(dist / (speed_ms * dt)))
    return [_shift(a, north * k / steps, east * k / steps) for k in range(1, steps)]


def generate_synthetic(spec=SynthSpec()):
    """Build the corpus in memory; identical specs give identical corpora."""
    rng = np.random.default_rng(spec.seed)
    regions = _layout(spec, rng)
    # users favour a few regions, which gives HITS something to rank
    weights = rng.dirichlet(np.full(len(regions), 0.7), size=spec.users)
    day0 = datetime.combine(date.fromisoformat(spec.start_date), datetime.min.time(),
                            tzinfo=timezone.utc).timestamp()
    dt = spec.sample_s

    trajectories, dwells, transits, sequences = [], [], [], []
    spikes = 0
    for u in range(spec.users):
        user = f"user{u:02d}"
        for s in range(spec.trajectories_per_user):
            lo, hi = spec.dwells_per_trajectory
            n_dwell = int(rng.integers(lo, hi + 1))
            n_dwell = min(n_dwell, len(regions))
            if len(regions) == 1:
                visit = [0] * n_dwell
            else:
                visit = []
                for _ in range(n_dwell):
                    p = weights[u].copy()
                    if visit:
                        p[visit[-1]] = 0.0  # move on to a different region
                    visit.append(int(rng.choice(len(regions), p=p / p.sum())))

            t = day0 + 86_400 * s + float(rng.integers(7 * 3600, 10 * 3600))
            first = regions[visit[0]]
            here = _shift((first.lat, first.lon), *rng.uniform(-3000, 3000, size=2))
            rows = []  # (lat, lon, t, kind); t is always the time of the next fix

            def fix(pos, kind):
                nonlocal t
                rows.append((pos[0], pos[1], t, kind))
                t += dt

            def transit(dest, begin):
                """Walk towards ``dest``; log the stretch starting at ``begin``."""
                speed = rng.uniform(*spec.transit_kmh) / 3.6
                for pos in _leg(here, dest, speed, dt):
                    fix(pos, "transit")
                if t - dt >= begin:
                    transits.append({"user": user, "session": s,
                                     "start": begin, "end": t - dt})

            begin = t
            fix(here, "transit")
            for rid in visit:
                spot = _spot(regions[rid], rng)
                transit(spot, begin)
                arrival = t
                n = int(round(rng.uniform(*spec.dwell_s) / dt)) + 1
                for _ in range(n):
                    fix(spot, "dwell")
                dwells.append({"user": user, "session": s, "region": rid,
                               "lat": round(float(spot[0]), 6), "lon": round(float(spot[1]), 6),
                               "arrival": arrival, "departure": t - dt})
                here = spot
                begin = t
            end = _shift(here, *rng.uniform(-3000, 3000, size=2))
            speed = rng.uniform(*spec.transit_kmh) / 3.6
            for pos in _leg(here, end, speed, dt) + [end]:
                fix(pos, "transit")
            transits.append({"user": user, "session": s, "start": begin, "end": t - dt})
            sequences.append({"user": user, "session": s, "regions": visit})

            points = []
            for lat, lon, ts, kind in rows:
                if spec.noise_m > 0:
                    lat, lon = _shift((lat, lon), *rng.normal(0, spec.noise_m, size=2))
                if kind == "transit" and spec.spike_rate > 0 and rng.uniform() < spec.spike_rate:
                    d = rng.uniform(*spec.spike_m)
                    a = rng.uniform(0, 2 * math.pi)
                    lat, lon = _shift((lat, lon), d * math.sin(a), d * math.cos(a))
                    spikes += 1
                points.append(GpsPoint(Coordinate(round(lat, 6), round(lon, 6)), float(ts)))
            trajectories.append(Trajectory(user, tuple(points)))

    truth = {
        "spec": _spec_dict(spec),
        "regions": [asdict(r) for r in regions],
        "dwells": dwells,
        "transits": transits,
        "sequences": sequences,
        "spikes": spikes,
    }
    return SyntheticCorpus(trajectories, truth)


def _spec_dict(spec):
    d = asdict(spec)
    d["regions"] = [asdict(r) if isinstance(r, Region) else dict(r) for r in spec.regions]
    return d


def spec_from_dict(d):
    d = dict(d)
    for key in ("regions", "dwells_per_trajectory", "dwell_s", "transit_kmh",
                "spike_m", "origin"):
        if key in d:
            d[key] = tuple(Region(**r) if key == "regions" else r for r in d[key])
    return SynthSpec(**d)


def write_synthetic(out_dir, spec=SynthSpec()):
    """Write one CSV per user plus ``ground_truth.json``; returns the corpus."""
    corpus = generate_synthetic(spec)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for user, trajs in sorted(corpus.by_user().items()):
        (out / f"{user}.csv").write_bytes(export_csv(trajs))
    (out / "ground_truth.json").write_text(
        json.dumps(corpus.truth, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return corpus
