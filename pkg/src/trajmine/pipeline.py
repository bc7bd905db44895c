"""Stage-by-stage pipeline over an artifact store.

ingest -> clean -> staypoints -> cluster -> rank -> sequences

Each stage reads upstream artifacts from the store and writes its own.
A stage whose parameters and input bytes are unchanged since it last ran
is skipped, so a rerun rewrites nothing.
"""
import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .errors import EmptyInputError, ParseError, PipelineError
from .formats import (
    parse_csv,
    parse_gpx,
    read_staypoints_csv,
    read_track_table,
    write_staypoints_csv,
    write_track_table,
)
from .geo import Coordinate, centroid
from .mining.hits import HitsScores, hits_scores, rank_pois, visit_matrix
from .mining.optics import PoiCluster, summarize_clusters
from .mining.sequences import mine_sequences
from .mining.tbhg import TbhgLevel, build_tbhg, transition_graph
from .planner import PoiCatalog, distance_duration, plan_multiday
from .staypoint import detect_corpus
from .store import MissingArtifactError, Store, input_hash
from .trajectory import clean, speed_profile

STAGES = ("ingest", "clean", "staypoints", "cluster", "rank", "sequences")
ARTIFACTS = {
    "ingest": "trajectories.csv",
    "clean": "cleaned.csv",
    "staypoints": "staypoints.csv",
    "cluster": "clusters.json",
    "rank": "scores.json",
    "sequences": "sequences.json",
}
UPSTREAM = {
    "ingest": (),
    "clean": ("ingest",),
    "staypoints": ("clean",),
    "cluster": ("staypoints",),
    "rank": ("staypoints", "cluster"),
    "sequences": ("staypoints", "cluster", "rank"),
}
LOG_SUFFIXES = {".csv", ".tsv", ".txt", ".gpx"}


def _json(doc):
    return (json.dumps(doc, indent=1, allow_nan=False) + "\n").encode("utf-8")


def _finite(x):
    return None if x is None or math.isinf(x) else float(x)


# -- stage parameters -------------------------------------------------------

def stage_params(cfg, stage):
    geo = asdict(cfg.geo)
    if stage == "ingest":
        return {"base_date": cfg.input.base_date}
    if stage == "clean":
        return {"geo": geo, **asdict(cfg.clean)}
    if stage == "staypoints":
        return {"geo": geo, **asdict(cfg.staypoint)}
    if stage == "cluster":
        return {"geo": geo, **asdict(cfg.optics), "level_eps_m": list(cfg.tbhg.level_eps_m)}
    if stage == "rank":
        return asdict(cfg.hits)
    if stage == "sequences":
        return asdict(cfg.sequences)
    raise ValueError(f"unknown stage {stage!r}")


def _log_files(cfg):
    if not cfg.input.dir:
        raise EmptyInputError("no input directory configured (input.dir)")
    root = Path(cfg.input.dir)
    if not root.is_dir():
        raise EmptyInputError(f"input directory {root} does not exist")
    files = sorted(p for p in root.iterdir() if p.is_file() and p.suffix.lower() in LOG_SUFFIXES)
    if not files:
        raise EmptyInputError(f"no GPS log files (.csv/.tsv/.txt/.gpx) in {root}")
    return files


def _stage_inputs(store, cfg, stage):
    if stage == "ingest":
        return {p.name: p.read_bytes() for p in _log_files(cfg)}
    return {up: store.entry(up)["output_hash"] if store.has(up) else _missing(up)
            for up in UPSTREAM[stage]}


def _missing(stage):
    raise MissingArtifactError(stage)


# -- stage bodies -----------------------------------------------------------

def _ingest(store, cfg, inputs):
    base = date.fromisoformat(cfg.input.base_date)
    trajectories = []
    for name, data in inputs.items():
        stem = Path(name).stem
        try:
            if name.lower().endswith(".gpx"):
                trajectories += parse_gpx(data)
            else:
                trajectories += parse_csv(data, user_id=stem, base_date=base)
        except ParseError as e:
            raise type(e)(f"{name}: {e}") from e
    trajectories.sort(key=lambda t: (str(t.user_id), t.start))
    return write_track_table(trajectories)


def _clean(store, cfg, inputs):
    trajs = read_track_table(store.read("ingest"))
    return write_track_table([clean(t, cfg.clean.max_speed_kmh, cfg.geo) for t in trajs])


def _staypoints(store, cfg, inputs):
    trajs = read_track_table(store.read("clean"))
    return write_staypoints_csv(detect_corpus(trajs, cfg.staypoint, cfg.geo))


def _cluster_doc(c):
    return {"cluster_id": c.cluster_id, "lat": c.lat, "lon": c.lon,
            "members": list(c.members), "distinct_users": c.distinct_users,
            "total_dwell_s": c.total_dwell_s}


def _cluster(store, cfg, inputs):
    sps = read_staypoints_csv(store.read("staypoints"))
    tbhg = build_tbhg(sps, cfg.tbhg.level_eps_m, cfg.optics, cfg.geo)
    levels = []
    for lv in tbhg.levels:
        levels.append({
            "eps_prime_m": lv.eps_prime_m,
            "labels": list(lv.labels),
            "parents": {str(k): v for k, v in lv.parents.items()},
            "clusters": [_cluster_doc(c) for c in lv.clusters],
            "edges": [{"source": e.source, "target": e.target, "support": e.support,
                       "users": sorted(e.users)} for e in lv.edges.values()],
        })
    ordering = []
    if tbhg.ordering is not None:
        o = tbhg.ordering
        ordering = [{"index": int(k), "reachability": _finite(o.reachability[k]),
                     "core_distance": _finite(o.core_distance[k])} for k in o.order]
    return _json({"min_pts": cfg.optics.min_pts, "eps_m": cfg.optics.eps_m,
                  "levels": levels, "ordering": ordering})


def _rank(store, cfg, inputs):
    sps = read_staypoints_csv(store.read("staypoints"))
    level = load_levels(store, sps)[-1] if sps else None
    doc = {"users": [], "hub": [], "cluster_ids": [], "authority": [],
           "iterations": 0, "residual": None, "ranking": []}
    if level is None or not level.clusters:
        return _json(doc)
    ids = [c.cluster_id for c in level.clusters]
    M, users, ids = visit_matrix(sps, level.labels, ids, binary=cfg.hits.binary)
    scores = hits_scores(M, users, ids, tol=cfg.hits.tol, max_iter=cfg.hits.max_iter)
    ranked = rank_pois(level.clusters, scores)
    doc.update({
        "users": list(users), "hub": [float(x) for x in scores.hub],
        "cluster_ids": list(ids), "authority": [float(x) for x in scores.authority],
        "iterations": scores.iterations, "residual": scores.residual,
        "ranking": [{"rank": n, "cluster_id": c.cluster_id, "authority": c.authority,
                     "distinct_users": c.distinct_users, "stay_points": len(c.members),
                     "total_dwell_s": c.total_dwell_s, "lat": c.lat, "lon": c.lon}
                    for n, c in enumerate(ranked, start=1)],
    })
    return _json(doc)


def _sequences(store, cfg, inputs):
    sps = read_staypoints_csv(store.read("staypoints"))
    scores = load_scores(store)
    if not sps or scores is None:
        return _json([])
    level = load_levels(store, sps)[-1]
    found = mine_sequences(level, scores, cfg.sequences.max_len, cfg.sequences.k)
    return _json([{"clusters": list(s.clusters), "score": s.score,
                   "support": s.support, "users": list(s.users)} for s in found])


BODIES = {
    "ingest": _ingest,
    "clean": _clean,
    "staypoints": _staypoints,
    "cluster": _cluster,
    "rank": _rank,
    "sequences": _sequences,
}


# -- running ----------------------------------------------------------------

def run_stage(store, cfg, stage, force=False):
    """Run one stage unless it is fresh; returns "ran" or "cached"."""
    try:
        inputs = _stage_inputs(store, cfg, stage)
        params = stage_params(cfg, stage)
        h = input_hash(params, inputs)
        if not force and store.is_fresh(stage, h):
            return "cached"
        data = BODIES[stage](store, cfg, inputs)
        store.write(stage, ARTIFACTS[stage], data, h, params)
    except PipelineError:
        raise
    except Exception as e:
        raise PipelineError(stage, e) from e
    return "ran"


def run_pipeline(cfg, store, stages=STAGES, force=False):
    """Run ``stages`` in order under the store lock.

    Returns ``(store, {stage: "ran" | "cached"})``. A failing stage raises
    PipelineError; artifacts of the stages before it stay valid.
    """
    if not isinstance(store, Store):
        store = Store(store)
    status = {}
    with store.lock():
        for stage in stages:
            status[stage] = run_stage(store, cfg, stage, force)
    return store, status


# -- loading artifacts ------------------------------------------------------

def load_trajectories(store, stage="clean"):
    return read_track_table(store.read(stage))


def load_stay_points(store):
    return read_staypoints_csv(store.read("staypoints"))


def load_levels(store, stay_points=None):
    """TBHG levels rebuilt from stored labels, re-checked against stored clusters."""
    sps = tuple(stay_points if stay_points is not None else load_stay_points(store))
    doc = json.loads(store.read("cluster"))
    levels = []
    for lv in doc["levels"]:
        labels = tuple(int(x) for x in lv["labels"])
        if len(labels) != len(sps):
            raise ValueError("cluster labels do not match the stored stay points")
        clusters = tuple(summarize_clusters(sps, labels))
        stored = [(c["cluster_id"], tuple(c["members"])) for c in lv["clusters"]]
        if stored != [(c.cluster_id, c.members) for c in clusters]:
            raise ValueError(f"stored clusters at eps' {lv['eps_prime_m']} are inconsistent")
        edges, runs = transition_graph(sps, labels)
        parents = {int(k): int(v) for k, v in lv["parents"].items()}
        levels.append(TbhgLevel(float(lv["eps_prime_m"]), labels, clusters, edges, parents, runs))
    return levels


def load_scores(store):
    doc = json.loads(store.read("rank"))
    if not doc["cluster_ids"]:
        return None
    hub = np.array(doc["hub"], dtype=float)
    auth = np.array(doc["authority"], dtype=float)
    if len(hub) != len(doc["users"]) or len(auth) != len(doc["cluster_ids"]):
        raise ValueError("score vectors do not match their labels")
    if not (np.isfinite(hub).all() and np.isfinite(auth).all()):
        raise ValueError("non-finite scores")
    return HitsScores(hub, auth, doc["iterations"], doc["residual"] or 0.0,
                      tuple(doc["users"]), tuple(doc["cluster_ids"]))


def load_ranking(store):
    """Ranked POI clusters (best first) with their authority scores."""
    doc = json.loads(store.read("rank"))
    cluster_doc = json.loads(store.read("cluster"))
    members = {c["cluster_id"]: c["members"] for c in cluster_doc["levels"][-1]["clusters"]} \
        if cluster_doc["levels"] else {}
    return [PoiCluster(r["cluster_id"], Coordinate(r["lat"], r["lon"]),
                       tuple(members.get(r["cluster_id"], ())), r["distinct_users"],
                       r["total_dwell_s"], r["authority"])
            for r in doc["ranking"]]


def load_sequences(store):
    return json.loads(store.read("sequences"))


# -- queries ----------------------------------------------------------------

def catalog_from_store(store, cfg):
    ranked = load_ranking(store)[:max(cfg.catalog.top_pois, 0)]
    if not ranked:
        raise EmptyInputError("no POIs ranked in this store")
    return PoiCatalog.from_clusters(ranked, cfg.catalog.visit_duration_s, cfg.catalog.preferred)


def plan_from_store(store, cfg, start=None):
    """Multiday plan over the top-ranked POIs; starts at their centroid by default."""
    catalog = catalog_from_store(store, cfg)
    if start is None:
        start = centroid([q.centroid for q in catalog])
    return plan_multiday(catalog, start, cfg.plan, cfg.geo), catalog, start


def distance_from_store(store, cfg, a, b):
    """Distance and travel time between two POI ids and/or coordinates."""
    ranked = load_ranking(store) if store.has("rank") else []
    catalog = PoiCatalog.from_clusters(ranked)
    return distance_duration(a, b, catalog, cfg.plan, cfg.geo)


@dataclass(frozen=True)
class TrafficRow:
    user_id: str
    trajectories: int
    segments: int
    distance_km: float
    hours: float
    mean_kmh: float
    median_kmh: float
    max_kmh: float


def traffic_summary(store, cfg=PipelineConfig()):
    """Per-user segment-speed statistics over the cleaned trajectories."""
    by_user = {}
    for t in load_trajectories(store, "clean"):
        if len(t.points) >= 2:
            by_user.setdefault(str(t.user_id), []).append(speed_profile(t, cfg.geo))
    rows = []
    for user, profiles in sorted(by_user.items()):
        segs = [s for p in profiles for s in p.segments]
        dist = math.fsum(s.distance_m for s in segs)
        secs = math.fsum(s.dt_s for s in segs)
        speeds = sorted(s.speed_kmh for s in segs)
        rows.append(TrafficRow(user, len(profiles), len(segs), dist / 1000, secs / 3600,
                               3.6 * dist / secs, float(np.median(speeds)), speeds[-1]))
    return rows


# -- summary report ---------------------------------------------------------

REPORT_COLUMNS = ("user_id", "paths", "coordinates", "selected", "stay_points")


@dataclass(frozen=True)
class ReportRow:
    user_id: str
    paths: int
    coordinates: int
    selected: int
    stay_points: int


@dataclass(frozen=True)
class SummaryReport:
    """Per-user counts: sessions (paths), raw points, points kept by clean,
    and stay points; ``poi_count`` is None until clustering has run."""
    rows: tuple
    totals: ReportRow
    poi_count: int = None

    def __post_init__(self):
        for col in REPORT_COLUMNS[1:]:
            if getattr(self.totals, col) != sum(getattr(r, col) for r in self.rows):
                raise ValueError(f"totals do not match column {col}")

    @property
    def poi_text(self):
        return "not computed" if self.poi_count is None else str(self.poi_count)

    def records(self):
        return [asdict(r) for r in self.rows] + [asdict(self.totals)]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in self.records():
            w.writerow([r[c] for c in REPORT_COLUMNS])
        w.writerow(["poi_count", self.poi_text, "", "", ""])
        return buf.getvalue().encode("utf-8")

    def render(self):
        head = ("User", "Paths", "Coordinates", "Selected", "Stay points")
        body = [[str(r[c]) for c in REPORT_COLUMNS] for r in self.records()]
        widths = [max(len(h), *(len(b[k]) for b in body)) for k, h in enumerate(head)]
        fmt = "  ".join(f"{{:<{w}}}" if k == 0 else f"{{:>{w}}}" for k, w in enumerate(widths))
        lines = [fmt.format(*head), "  ".join("-" * w for w in widths)]
        lines += [fmt.format(*b) for b in body[:-1]]
        lines += ["  ".join("-" * w for w in widths), fmt.format(*body[-1])]
        lines.append(f"POIs: {self.poi_text}")
        return "\n".join(lines) + "\n"


def report(store, write=True):
    """Build the per-user summary; writes ``report.csv`` into the store."""
    for stage in ("ingest", "clean", "staypoints"):
        if not store.has(stage):
            raise MissingArtifactError(stage)
    raw = load_trajectories(store, "ingest")
    kept = load_trajectories(store, "clean")
    sps = load_stay_points(store)
    users = sorted({str(t.user_id) for t in raw})
    rows = []
    for u in users:
        rows.append(ReportRow(
            u,
            sum(1 for t in raw if str(t.user_id) == u),
            sum(len(t.points) for t in raw if str(t.user_id) == u),
            sum(len(t.points) for t in kept if str(t.user_id) == u),
            sum(1 for s in sps if str(s.user_id) == u),
        ))
    totals = ReportRow("Total", *(sum(getattr(r, c) for r in rows) for c in REPORT_COLUMNS[1:]))
    poi_count = None
    if store.has("cluster"):
        levels = json.loads(store.read("cluster"))["levels"]
        poi_count = len(levels[-1]["clusters"]) if levels else 0
    rep = SummaryReport(tuple(rows), totals, poi_count)
    if write:
        (store.root / "report.csv").write_bytes(rep.to_csv())
    return rep

