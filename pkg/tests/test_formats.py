import json

import pytest

from trajmine.errors import (
    EmptyInputError,
    GpxMissingFieldError,
    GpxSyntaxError,
    GpxTimestampError,
    ParseError,
)
from trajmine.formats import (
    export_csv,
    export_geojson,
    export_gpx,
    parse_csv,
    parse_gpx,
    read_staypoints_csv,
    read_track_table,
    write_staypoints_csv,
    write_track_table,
)
from trajmine.geo import Coordinate
from trajmine.mining import PoiCluster
from trajmine.staypoint import StayPoint

from conftest import make_traj

TABLE_HEAD = "Latitude,Longitude,Time\n2.19711,102.2487,4:09:22\n2.19705,102.2487,4:09:27\n"

GPX_TEN = """<?xml version="1.0" encoding="UTF-8"?>
<gpx version="1.1" creator="hand" xmlns="http://www.topografix.com/GPX/1/1">
  <wpt lat="2.0" lon="102.0"><name>ignored</name></wpt>
  <trk><name>alice</name><trkseg>
    <trkpt lat="2.19711" lon="102.2487"><time>2014-03-01T04:09:22Z</time></trkpt>
    <trkpt lat="2.19705" lon="102.2487"><time>2014-03-01T04:09:27Z</time></trkpt>
    <trkpt lat="2.19698" lon="102.2487"><time>2014-03-01T04:09:32Z</time></trkpt>
    <trkpt lat="2.19696" lon="102.2486"><time>2014-03-01T04:09:37Z</time></trkpt>
    <trkpt lat="2.1969" lon="102.2486"><time>2014-03-01T04:09:42Z</time></trkpt>
  </trkseg><trkseg>
    <trkpt lat="2.19684" lon="102.2485"><ele>3.0</ele><time>2014-03-01T05:09:45Z</time></trkpt>
    <trkpt lat="2.19681" lon="102.2485"><time>2014-03-01T05:09:47.5Z</time></trkpt>
    <trkpt lat="2.19673" lon="102.2485"><time>2014-03-01T05:09:52Z</time></trkpt>
    <trkpt lat="2.19663" lon="102.2484"><time>2014-03-01T05:09:57+00:00</time></trkpt>
    <trkpt lat="2.19656" lon="102.2483"><time>2014-03-01T13:10:02+08:00</time></trkpt>
  </trkseg></trk>
</gpx>
"""


def _points(ts):
    return [[(p.lat, p.lon, p.timestamp) for p in t.points] for t in ts]


def test_csv_two_rows():
    (t,) = parse_csv(TABLE_HEAD.encode())
    assert len(t.points) == 2
    assert t.points[1].timestamp - t.points[0].timestamp == 5
    assert t.points[0].timestamp == 4 * 3600 + 9 * 60 + 22


def test_csv_table_file(table64_bytes):
    ts = parse_csv(table64_bytes, user_id="000")
    assert len(ts) == 1 and len(ts[0].points) == 104
    assert ts[0].user_id == "000"


def test_csv_header_only():
    with pytest.raises(EmptyInputError):
        parse_csv(b"Latitude,Longitude,Time\n")
    with pytest.raises(EmptyInputError):
        parse_csv(b"")


def test_csv_time_regression_splits():
    ts = parse_csv(b"Latitude,Longitude,Time\n2.1,102.2,4:09:22\n2.1,102.2,4:09:20\n")
    assert [len(t.points) for t in ts] == [1, 1]


def test_csv_base_date_and_date_column():
    from datetime import date
    (t,) = parse_csv(TABLE_HEAD.encode(), base_date=date(2014, 3, 1))
    assert t.points[0].timestamp == 1393646962
    (t,) = parse_csv(b"Latitude,Longitude,Time,Date\n2.1,102.2,4:09:22,2014-03-01\n")
    assert t.points[0].timestamp == 1393646962


def test_csv_users_and_sessions():
    data = ("Latitude,Longitude,Time,User,Session\n"
            "2.1,102.2,1:00:00,a,0\n2.1,102.2,1:00:05,b,0\n"
            "2.1,102.2,1:00:10,a,0\n2.1,102.2,1:00:15,a,1\n").encode()
    ts = parse_csv(data)
    assert [(t.user_id, len(t.points)) for t in ts] == [("a", 2), ("a", 1), ("b", 1)]


@pytest.mark.parametrize("body,line,field", [
    ("2.1,102.2,4:09:22\nabc,102.2,4:09:27\n", 3, "Latitude"),
    ("2.1,102.2,4:09:22\n2.1,102.2\n", 3, None),
    ("2.1,102.2,4:09:22\n2.1,102.2,25:99:00\n", 3, "Time"),
    ("95.0,102.2,4:09:22\n", 2, "Latitude"),
    ("2.1,190,4:09:22\n", 2, "Longitude"),
])
def test_csv_errors_locate_problem(body, line, field):
    with pytest.raises(ParseError) as exc:
        parse_csv(("Latitude,Longitude,Time\n" + body).encode())
    assert exc.value.line == line
    assert exc.value.field == field


def test_csv_missing_column():
    with pytest.raises(ParseError):
        parse_csv(b"Latitude,Time\n2.1,4:00:00\n")


def test_csv_export_roundtrip_6_decimals(table64_bytes):
    ts = parse_csv(table64_bytes)
    again = parse_csv(export_csv(ts))
    assert len(again) == len(ts)
    for a, b in zip(ts, again):
        for p, q in zip(a.points, b.points):
            assert round(p.lat, 6) == q.lat and round(p.lon, 6) == q.lon
            assert abs(p.timestamp - q.timestamp) <= 1


def test_gpx_single_segment():
    doc = GPX_TEN.replace("</trkseg><trkseg>", "")
    (t,) = parse_gpx(doc.encode())
    assert len(t.points) == 10 and t.user_id == "alice"


def test_gpx_two_segments():
    ts = parse_gpx(GPX_TEN.encode())
    assert [len(t.points) for t in ts] == [5, 5]
    assert ts[1].points[1].timestamp == ts[1].points[0].timestamp + 2.5
    # +08:00 offset resolves to the same UTC instant sequence
    assert ts[1].points[4].timestamp - ts[1].points[3].timestamp == 5


def test_gpx_roundtrip():
    ts = parse_gpx(GPX_TEN.encode())
    assert _points(parse_gpx(export_gpx(ts))) == _points(ts)
    assert [t.user_id for t in parse_gpx(export_gpx(ts))] == ["alice", "alice"]


def test_gpx_error_kinds():
    with pytest.raises(GpxSyntaxError):
        parse_gpx(b"<gpx><trk>")
    with pytest.raises(GpxMissingFieldError) as exc:
        parse_gpx(GPX_TEN.replace('lat="2.19698" ', "").encode())
    assert "trkpt[3]" in str(exc.value)
    with pytest.raises(GpxMissingFieldError):
        parse_gpx(GPX_TEN.replace("<time>2014-03-01T04:09:32Z</time>", "").encode())
    with pytest.raises(GpxTimestampError) as exc:
        parse_gpx(GPX_TEN.replace("2014-03-01T04:09:32Z", "yesterday").encode())
    assert "yesterday" in str(exc.value)


def _poi():
    return PoiCluster(3, Coordinate(2.272, 102.287), (0, 1, 2), 2, 3600.0, 0.5)


def test_geojson_empty():
    doc = json.loads(export_geojson([]))
    assert doc == {"type": "FeatureCollection", "features": []}


def test_geojson_poi():
    (f,) = json.loads(export_geojson([_poi()]))["features"]
    assert f["geometry"] == {"type": "Point", "coordinates": [102.287, 2.272]}
    assert f["properties"]["score"] == 0.5
    assert f["properties"]["cluster_id"] == 3
    assert f["properties"]["dwell_s"] == 3600.0


def test_geojson_mixed_and_deterministic():
    t = make_traj([Coordinate(2.1234567891, 102.0), Coordinate(2.2, 102.1)], [0, 60])
    s = StayPoint("u", Coordinate(2.1, 102.0), 0.0, 1500.0, 5)
    first = export_geojson([t, s, _poi()])
    assert first == export_geojson([t, s, _poi()])
    feats = json.loads(first)["features"]
    assert feats[0]["geometry"]["type"] == "LineString"
    assert feats[0]["geometry"]["coordinates"][0] == [102.0, 2.123457]
    assert feats[1]["properties"]["dwell_s"] == 1500.0


def test_staypoint_csv_roundtrip():
    sps = [StayPoint("u1", Coordinate(2.123456789, 102.1), 10.0, 1300.5, 7),
           StayPoint("u2", Coordinate(-1.5, 3.25), 0.0, 1200.0, 2)]
    data = write_staypoints_csv(sps)
    assert data.splitlines()[0] == b"user_id,lat,lon,arrival,departure,member_count"
    assert read_staypoints_csv(data) == sps


def test_track_table_roundtrip(table64_bytes):
    ts = parse_csv(table64_bytes) + parse_gpx(GPX_TEN.encode())
    assert read_track_table(write_track_table(ts)) == ts
