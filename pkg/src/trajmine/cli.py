"""Command-line front end.

Every subcommand works against one store directory (``--store``, or the
TRAJMINE_STORE environment variable). Settings come from the defaults,
then ``--config FILE``, then ``--<section>.<field> VALUE`` flags.

Exit codes: 0 success, 2 usage error, 3 data error, 4 internal error.
"""
import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, fields
from pathlib import Path

from . import __version__
from .config import SECTIONS, PipelineConfig, parse_value
from .errors import PipelineError, TrajMineError
from .formats import export_geojson, export_gpx, export_route_gpx
from .geo import Coordinate
from .pipeline import (
    STAGES,
    load_ranking,
    load_sequences,
    load_stay_points,
    load_trajectories,
    distance_from_store,
    plan_from_store,
    report,
    run_pipeline,
    traffic_summary,
)
from .planner import plan_to_dict
from .store import Store
from .synth import SynthSpec, write_synthetic

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4
STORE_ENV = "TRAJMINE_STORE"
DEFAULT_STORE = "trajmine-store"


class UsageError(Exception):
    pass


# -- output -----------------------------------------------------------------

def emit(records, columns, fmt, out):
    """Write a list of dicts as an aligned table, CSV or JSON."""
    if fmt == "json":
        out.write(json.dumps(records, indent=1) + "\n")
        return
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(columns)
        for r in records:
            w.writerow([r[c] for c in columns])
        return
    cells = [[_cell(r[c]) for c in columns] for r in records]
    widths = [max([len(c)] + [len(row[k]) for row in cells]) for k, c in enumerate(columns)]
    out.write("  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip() + "\n")
    for row in cells:
        out.write("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() + "\n")


def _cell(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    return str(v)


def _status(statuses, out):
    for stage, s in statuses.items():
        out.write(f"{stage}: {s}\n")


# -- argument parsing -------------------------------------------------------

def _config_flags(p):
    g = p.add_argument_group("settings (override config file values)")
    for section, cls in SECTIONS.items():
        for f in fields(cls):
            g.add_argument(f"--{section}.{f.name}", dest=f"set:{section}.{f.name}",
                           metavar="VALUE", default=None)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--store", default=None,
                        help=f"store directory (default ${STORE_ENV} or ./{DEFAULT_STORE})")
    common.add_argument("--config", default=None, help="JSON config file")
    common.add_argument("--format", choices=("table", "csv", "json"), default="table")
    common.add_argument("--force", action="store_true", help="rerun stages even if cached")
    _config_flags(common)

    parser = argparse.ArgumentParser(prog="trajmine", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"trajmine {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("ingest", parents=[common], help="parse GPS logs into the store")
    p.add_argument("input_dir", nargs="?", help="directory of .csv/.tsv/.gpx logs")
    p = sub.add_parser("run", parents=[common], help="run every stage (cached stages are skipped)")
    p.add_argument("input_dir", nargs="?")
    for stage, text in (("clean", "drop speed spikes"),
                        ("staypoints", "detect stay points"),
                        ("cluster", "OPTICS clustering and the hierarchical graph"),
                        ("rank", "HITS ranking of POIs"),
                        ("sequences", "mine classical travel sequences")):
        p = sub.add_parser(stage, parents=[common], help=text)
        if stage in ("rank", "sequences"):
            p.add_argument("--top", type=int, default=None, help="show only the first N rows")

    p = sub.add_parser("plan", parents=[common], help="multiday itinerary over ranked POIs")
    p.add_argument("--start", default=None, metavar="LAT,LON",
                   help="daily start point (default: centroid of the catalog)")
    p.add_argument("--gpx", default=None, metavar="FILE", help="also write the plan as GPX routes")

    p = sub.add_parser("distance", parents=[common], help="distance and travel time")
    p.add_argument("a", help="POI id or LAT,LON")
    p.add_argument("b", help="POI id or LAT,LON")

    sub.add_parser("traffic-summary", parents=[common], help="per-user segment speeds")

    p = sub.add_parser("synth", parents=[common], help="write a seeded synthetic corpus")
    p.add_argument("out_dir")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--users", type=int, default=10)
    p.add_argument("--trajectories", type=int, default=10, help="trajectories per user")
    p.add_argument("--regions", type=int, default=8)
    p.add_argument("--noise", type=float, default=15.0, help="GPS noise sigma in metres")
    p.add_argument("--spike-rate", type=float, default=0.0,
                   help="probability that a transit fix teleports")

    sub.add_parser("report", parents=[common], help="per-user summary table")

    p = sub.add_parser("export", parents=[common], help="export store contents")
    p.add_argument("kind", choices=("geojson", "gpx"))
    p.add_argument("--what", choices=("pois", "staypoints", "trajectories", "plan"),
                   default=None, help="geojson default: pois; gpx default: trajectories")
    p.add_argument("-o", "--output", default=None, help="output file (default stdout)")
    p.add_argument("--start", default=None, metavar="LAT,LON")
    return parser


def _coordinate(text):
    try:
        lat, lon = (float(x) for x in text.split(","))
        return Coordinate(lat, lon)
    except ValueError as e:
        raise UsageError(f"expected LAT,LON, got {text!r}") from e


def load_config(args):
    try:
        cfg = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    except (OSError, TypeError, ValueError) as e:
        raise UsageError(f"config {args.config}: {e}") from e
    overrides = {}
    for key, raw in vars(args).items():
        if key.startswith("set:") and raw is not None:
            name = key[4:]
            section, field_name = name.split(".", 1)
            # the built-in default fixes the value's type
            default = getattr(getattr(PipelineConfig(), section), field_name)
            try:
                overrides[name] = parse_value(raw, default)
            except ValueError as e:
                raise UsageError(f"--{name}: {e}") from e
    if getattr(args, "input_dir", None):
        overrides["input.dir"] = args.input_dir
    try:
        return cfg.with_overrides(overrides)
    except (TypeError, ValueError) as e:
        raise UsageError(f"invalid settings: {e}") from e


def _store(args):
    return Store(args.store or os.environ.get(STORE_ENV) or DEFAULT_STORE)


# -- commands ---------------------------------------------------------------

def _cmd_stages(args, cfg, out):
    store = _store(args)
    if args.command == "run":
        stages = STAGES
    else:
        stages = (args.command,)
    _, statuses = run_pipeline(cfg, store, stages, force=args.force)
    if args.format == "table":
        _status(statuses, out)
    if args.command == "rank":
        rows = [_ranking_row(c, n) for n, c in enumerate(load_ranking(store), start=1)]
        emit(rows[:args.top] if args.top else rows,
             ["rank", "cluster_id", "authority", "distinct_users", "stay_points",
              "total_dwell_s", "lat", "lon"], args.format, out)
    elif args.command == "sequences":
        rows = load_sequences(store)
        emit(rows[:args.top] if args.top else rows,
             ["clusters", "score", "support", "users"], args.format, out)
    elif args.format != "table":
        emit([{"stage": k, "status": v} for k, v in statuses.items()],
             ["stage", "status"], args.format, out)


def _ranking_row(c, rank):
    return {"rank": rank, "cluster_id": c.cluster_id, "authority": c.authority,
            "distinct_users": c.distinct_users, "stay_points": len(c.members),
            "total_dwell_s": c.total_dwell_s, "lat": c.lat, "lon": c.lon}


def _cmd_plan(args, cfg, out):
    store = _store(args)
    start = _coordinate(args.start) if args.start else None
    plan, catalog, start = plan_from_store(store, cfg, start)
    if args.gpx:
        Path(args.gpx).write_bytes(export_route_gpx(plan, catalog, start))
    doc = plan_to_dict(plan, catalog)
    doc["start"] = {"lat": start.lat, "lon": start.lon}
    if args.format == "json":
        out.write(json.dumps(doc, indent=1) + "\n")
        return
    rows = [{"day": d["day"], **s} for d in doc["days"] for s in d["stops"]]
    emit(rows, ["day", "poi", "lat", "lon", "arrive_s", "depart_s",
                "leg_distance_m", "leg_duration_s"], args.format, out)
    if args.format == "table":
        out.write(f"score {doc['score']:.6g} over {len(doc['days'])} day(s); "
                  f"{doc['enumerated_itineraries']} single-day itineraries enumerated\n")


def _cmd_distance(args, cfg, out):
    store = _store(args)
    a = _coordinate(args.a) if "," in args.a else args.a
    b = _coordinate(args.b) if "," in args.b else args.b
    d, t = distance_from_store(store, cfg, a, b)
    emit([{"from": args.a, "to": args.b, "distance_m": d, "duration_s": t}],
         ["from", "to", "distance_m", "duration_s"], args.format, out)


def _cmd_traffic(args, cfg, out):
    rows = [asdict(r) for r in traffic_summary(_store(args), cfg)]
    emit(rows, ["user_id", "trajectories", "segments", "distance_km", "hours",
                "mean_kmh", "median_kmh", "max_kmh"], args.format, out)


def _cmd_synth(args, cfg, out):
    try:
        spec = SynthSpec(users=args.users, trajectories_per_user=args.trajectories,
                         n_regions=args.regions, noise_m=args.noise,
                         spike_rate=args.spike_rate, seed=args.seed)
    except ValueError as e:
        raise UsageError(str(e)) from e
    corpus = write_synthetic(args.out_dir, spec)
    out.write(f"wrote {len(corpus.trajectories)} trajectories for {spec.users} users "
              f"and {len(corpus.truth['dwells'])} planted dwells to {args.out_dir}\n")


def _cmd_report(args, cfg, out):
    rep = report(_store(args))
    if args.format == "table":
        out.write(rep.render())
    elif args.format == "csv":
        out.write(rep.to_csv().decode("utf-8"))
    else:
        out.write(json.dumps({"rows": rep.records(), "poi_count": rep.poi_count}, indent=1) + "\n")


def _cmd_export(args, cfg, out):
    store = _store(args)
    what = args.what or ("pois" if args.kind == "geojson" else "trajectories")
    start = _coordinate(args.start) if args.start else None
    if what == "plan":
        plan, catalog, start = plan_from_store(store, cfg, start)
        if args.kind != "gpx":
            raise UsageError("plans export as gpx only")
        data = export_route_gpx(plan, catalog, start)
    else:
        items = {"pois": lambda: load_ranking(store),
                 "staypoints": lambda: load_stay_points(store),
                 "trajectories": lambda: load_trajectories(store, "clean")}[what]()
        if args.kind == "geojson":
            data = export_geojson(items)
        elif what == "trajectories":
            data = export_gpx(items)
        else:
            raise UsageError(f"{what} export as geojson only")
    if args.output:
        Path(args.output).write_bytes(data)
    else:
        out.write(data.decode("utf-8"))


COMMANDS = {
    "plan": _cmd_plan,
    "distance": _cmd_distance,
    "traffic-summary": _cmd_traffic,
    "synth": _cmd_synth,
    "report": _cmd_report,
    "export": _cmd_export,
}


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        cfg = load_config(args)
        COMMANDS.get(args.command, _cmd_stages)(args, cfg, out)
    except UsageError as e:
        print(f"trajmine: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except PipelineError as e:
        print(f"trajmine: {e}", file=sys.stderr)
        data = isinstance(e.cause, (TrajMineError, ValueError, OSError))
        return EXIT_DATA if data else EXIT_INTERNAL
    except (TrajMineError, ValueError, OSError, KeyError) as e:
        print(f"trajmine: {e}", file=sys.stderr)
        return EXIT_DATA
    except Exception as e:  # noqa: BLE001 - last-resort exit code
        print(f"trajmine: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
