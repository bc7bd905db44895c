"""Reading GPS logs and writing CSV, GPX and GeoJSON.

CSV logs follow the logger export layout::

    Latitude,Longitude,Time[,User][,Date][,Session]

comma- or tab-separated, with ``Time`` as ``HH:MM:SS`` on the day given by
``Date`` (``YYYY-MM-DD``) or by the ``base_date`` argument.
"""
import csv
import io
import json
import math
import re
import xml.etree.ElementTree as ET
from datetime import date, datetime, time, timedelta, timezone

from .errors import (
    CoordinateError,
    EmptyInputError,
    GpxMissingFieldError,
    GpxSyntaxError,
    GpxTimestampError,
    ParseError,
)
from .geo import Coordinate
from .mining.optics import PoiCluster
from .staypoint import StayPoint
from .trajectory import GpsPoint, Trajectory

EPOCH_DAY = date(1970, 1, 1)
GPX_NS = "http://www.topografix.com/GPX/1/1"

_TIME_RE = re.compile(r"^(\d{1,2}):(\d{2}):(\d{2}(?:\.\d+)?)$")


def _text(data):
    if isinstance(data, (bytes, bytearray)):
        return bytes(data).decode("utf-8-sig")
    return data


def _day_start(d):
    return datetime.combine(d, time(0), tzinfo=timezone.utc).timestamp()


def _parse_time_of_day(s):
    m = _TIME_RE.match(s)
    if not m:
        return None
    h, mi, sec = int(m.group(1)), int(m.group(2)), float(m.group(3))
    if h > 23 or mi > 59 or sec >= 60:
        return None
    return h * 3600 + mi * 60 + sec


def parse_iso_time(s):
    """ISO-8601 timestamp to epoch seconds; naive times are taken as UTC."""
    s = s.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    # Python 3.10 only accepts 3 or 6 fractional digits
    m = re.match(r"^(.*T\d{2}:\d{2}:\d{2})\.(\d+)(.*)$", s)
    if m:
        s = f"{m.group(1)}.{m.group(2)[:6].ljust(6, '0')}{m.group(3)}"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def split_sessions(user_id, points, breaks=()):
    """Cut a point list wherever time fails to increase (or at ``breaks``)."""
    out, cur = [], []
    breaks = set(breaks)
    for k, p in enumerate(points):
        if cur and (k in breaks or p.timestamp <= cur[-1].timestamp):
            out.append(Trajectory(user_id, tuple(cur)))
            cur = []
        cur.append(p)
    if cur:
        out.append(Trajectory(user_id, tuple(cur)))
    return out


def parse_csv(data, user_id="user", base_date=EPOCH_DAY):
    """Parse a CSV/TSV log into trajectories, one per user session."""
    lines = [(n, ln) for n, ln in enumerate(_text(data).splitlines(), start=1)
             if ln.strip()]
    if not lines:
        raise EmptyInputError("empty log file")
    header_no, header_line = lines[0]
    delim = "\t" if "\t" in header_line else ","
    header = [h.strip().lower() for h in next(csv.reader([header_line], delimiter=delim))]
    for required in ("latitude", "longitude", "time"):
        if required not in header:
            raise ParseError(f"missing column {required.title()!r}", line=header_no)
    col = {name: k for k, name in enumerate(header)}
    if len(lines) == 1:
        raise EmptyInputError("log file has a header but no rows")

    by_user = {}
    for n, ln in lines[1:]:
        row = [f.strip() for f in next(csv.reader([ln], delimiter=delim))]
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", line=n)
        try:
            lat = float(row[col["latitude"]])
        except ValueError:
            raise ParseError("not a number", line=n, field="Latitude") from None
        try:
            lon = float(row[col["longitude"]])
        except ValueError:
            raise ParseError("not a number", line=n, field="Longitude") from None
        try:
            coord = Coordinate(lat, lon)
        except CoordinateError as e:
            raise ParseError(str(e), line=n,
                             field="Latitude" if "latitude" in str(e) else "Longitude") from None

        day = base_date
        if "date" in col:
            try:
                day = date.fromisoformat(row[col["date"]])
            except ValueError:
                raise ParseError("bad date", line=n, field="Date") from None
        raw_time = row[col["time"]]
        tod = _parse_time_of_day(raw_time)
        if tod is not None:
            ts = _day_start(day) + tod
        else:
            try:
                ts = parse_iso_time(raw_time)
            except ValueError:
                raise ParseError(f"bad time {raw_time!r}", line=n, field="Time") from None
        try:
            point = GpsPoint(coord, ts)
        except ValueError as e:
            raise ParseError(str(e), line=n, field="Time") from None

        user = row[col["user"]] if "user" in col else str(user_id)
        session = row[col["session"]] if "session" in col else None
        by_user.setdefault(user, []).append((point, session))

    out = []
    for user, rows in by_user.items():
        points = [p for p, _ in rows]
        breaks = [k for k in range(1, len(rows)) if rows[k][1] != rows[k - 1][1]]
        out.extend(split_sessions(user, points, breaks))
    return out


def _local(tag):
    return tag.rsplit("}", 1)[-1]


def _children(el, name):
    return [c for c in el if _local(c.tag) == name]


def parse_gpx(data, user_id=None):
    """Track segments of a GPX 1.1 document as trajectories.

    Waypoints and routes are ignored. The track ``<name>`` becomes the user
    id unless ``user_id`` is given.
    """
    try:
        root = ET.fromstring(_text(data).encode("utf-8") if isinstance(data, str) else data)
    except ET.ParseError as e:
        raise GpxSyntaxError(f"malformed GPX: {e}") from None
    if _local(root.tag) != "gpx":
        raise GpxSyntaxError(f"root element is <{_local(root.tag)}>, not <gpx>")

    out = []
    for t_no, trk in enumerate(_children(root, "trk"), start=1):
        names = _children(trk, "name")
        user = user_id if user_id is not None else (
            (names[0].text or "").strip() if names else "") or "user"
        for s_no, seg in enumerate(_children(trk, "trkseg"), start=1):
            points = []
            for p_no, pt in enumerate(_children(seg, "trkpt"), start=1):
                where = f"trk[{t_no}]/trkseg[{s_no}]/trkpt[{p_no}]"
                for attr in ("lat", "lon"):
                    if pt.get(attr) is None:
                        raise GpxMissingFieldError(f"<{where}> has no {attr} attribute",
                                                   field=attr)
                times = _children(pt, "time")
                if not times or not (times[0].text or "").strip():
                    raise GpxMissingFieldError(f"<{where}> has no <time>", field="time")
                try:
                    coord = Coordinate(float(pt.get("lat")), float(pt.get("lon")))
                except ValueError as e:
                    raise ParseError(f"<{where}>: {e}", field="lat/lon") from None
                try:
                    ts = parse_iso_time(times[0].text)
                except ValueError:
                    raise GpxTimestampError(
                        f"<{where}> has unparseable time {times[0].text!r}",
                        field="time") from None
                points.append(GpsPoint(coord, ts))
            if points:
                out.extend(split_sessions(str(user), points))
    if not out:
        raise EmptyInputError("GPX document has no track points")
    return out


def format_iso_time(ts):
    dt = datetime.fromtimestamp(ts, tz=timezone.utc)
    if ts == math.floor(ts):
        return dt.strftime("%Y-%m-%dT%H:%M:%SZ")
    return dt.strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def _gpx_root():
    ET.register_namespace("", GPX_NS)
    return ET.Element(f"{{{GPX_NS}}}gpx", {"version": "1.1", "creator": "trajmine"})


def _gpx_bytes(root):
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"


def export_gpx(trajectories):
    """One ``<trk>`` per user, one ``<trkseg>`` per trajectory."""
    root = _gpx_root()
    tracks = {}
    for t in trajectories:
        if t.user_id not in tracks:
            trk = ET.SubElement(root, f"{{{GPX_NS}}}trk")
            ET.SubElement(trk, f"{{{GPX_NS}}}name").text = str(t.user_id)
            tracks[t.user_id] = trk
        seg = ET.SubElement(tracks[t.user_id], f"{{{GPX_NS}}}trkseg")
        for p in t.points:
            pt = ET.SubElement(seg, f"{{{GPX_NS}}}trkpt",
                               {"lat": repr(p.lat), "lon": repr(p.lon)})
            ET.SubElement(pt, f"{{{GPX_NS}}}time").text = format_iso_time(p.timestamp)
    return _gpx_bytes(root)


def export_route_gpx(plan, catalog, start=None):
    """A plan as GPX routes, one ``<rte>`` per day."""
    root = _gpx_root()
    for n, day in enumerate(plan.days, start=1):
        rte = ET.SubElement(root, f"{{{GPX_NS}}}rte")
        ET.SubElement(rte, f"{{{GPX_NS}}}name").text = f"day {n}"
        stops = [("start", start)] if start is not None else []
        stops += [(poi_id, catalog[poi_id].centroid) for poi_id in day.pois]
        for name, c in stops:
            pt = ET.SubElement(rte, f"{{{GPX_NS}}}rtept",
                               {"lat": repr(c.lat), "lon": repr(c.lon)})
            ET.SubElement(pt, f"{{{GPX_NS}}}name").text = str(name)
    return _gpx_bytes(root)


def export_csv(trajectories):
    """Logger-layout CSV with 6-decimal coordinates and whole seconds."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Latitude", "Longitude", "Time", "User", "Date", "Session"])
    sessions = {}
    for t in trajectories:
        s = sessions.get(t.user_id, 0)
        sessions[t.user_id] = s + 1
        for p in t.points:
            dt = datetime.fromtimestamp(round(p.timestamp), tz=timezone.utc)
            w.writerow([f"{p.lat:.6f}", f"{p.lon:.6f}", dt.strftime("%H:%M:%S"),
                        t.user_id, dt.date().isoformat(), s])
    return buf.getvalue().encode("utf-8")


def _r6(x):
    return round(float(x), 6)


def _feature(item):
    if isinstance(item, Trajectory):
        coords = [[_r6(p.lon), _r6(p.lat)] for p in item.points]
        geometry = ({"type": "LineString", "coordinates": coords} if len(coords) > 1
                    else {"type": "Point", "coordinates": coords[0]})
        props = {"kind": "trajectory", "user_id": str(item.user_id),
                 "start": item.start, "end": item.end, "points": len(item.points)}
    elif isinstance(item, StayPoint):
        geometry = {"type": "Point", "coordinates": [_r6(item.lon), _r6(item.lat)]}
        props = {"kind": "stay_point", "user_id": str(item.user_id),
                 "arrival": item.arrival, "departure": item.departure,
                 "dwell_s": item.duration_s, "member_count": item.member_count}
    elif isinstance(item, PoiCluster):
        geometry = {"type": "Point", "coordinates": [_r6(item.lon), _r6(item.lat)]}
        props = {"kind": "poi", "cluster_id": item.cluster_id, "score": item.authority,
                 "dwell_s": item.total_dwell_s, "distinct_users": item.distinct_users,
                 "stay_points": len(item.members)}
    else:
        raise TypeError(f"cannot export {type(item).__name__} as GeoJSON")
    return {"type": "Feature", "geometry": geometry, "properties": props}


def export_geojson(features):
    """FeatureCollection for trajectories, stay points and POI clusters."""
    doc = {"type": "FeatureCollection", "features": [_feature(f) for f in features]}
    return (json.dumps(doc, indent=1) + "\n").encode("utf-8")


STAYPOINT_COLUMNS = ["user_id", "lat", "lon", "arrival", "departure", "member_count"]


def write_staypoints_csv(stay_points):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STAYPOINT_COLUMNS)
    for s in stay_points:
        w.writerow([s.user_id, repr(s.lat), repr(s.lon), repr(s.arrival),
                    repr(s.departure), s.member_count])
    return buf.getvalue().encode("utf-8")


def read_staypoints_csv(data):
    rows = list(csv.DictReader(io.StringIO(_text(data))))
    return [StayPoint(r["user_id"], Coordinate(float(r["lat"]), float(r["lon"])),
                      float(r["arrival"]), float(r["departure"]), int(r["member_count"]))
            for r in rows]


def write_track_table(trajectories):
    """Full-precision trajectory table used inside the artifact store."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["user_id", "session", "lat", "lon", "timestamp"])
    for k, t in enumerate(trajectories):
        for p in t.points:
            w.writerow([t.user_id, k, repr(p.lat), repr(p.lon), repr(p.timestamp)])
    return buf.getvalue().encode("utf-8")


def read_track_table(data):
    groups = {}
    for r in csv.DictReader(io.StringIO(_text(data))):
        key = int(r["session"])
        user, pts = groups.setdefault(key, (r["user_id"], []))
        pts.append(GpsPoint(Coordinate(float(r["lat"]), float(r["lon"])),
                            float(r["timestamp"])))
    return [Trajectory(user, tuple(pts)) for _, (user, pts) in sorted(groups.items())]
