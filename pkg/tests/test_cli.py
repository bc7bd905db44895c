import csv
import io
import json

import pytest

from trajmine.cli import main
from trajmine.synth import SynthSpec, write_synthetic

from conftest import PLANETARIUM_ZOO_M


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture
def store(tmp_path, monkeypatch):
    write_synthetic(tmp_path / "corpus", SynthSpec(users=3, trajectories_per_user=4, seed=11))
    monkeypatch.setenv("TRAJMINE_STORE", str(tmp_path / "store"))
    code, _ = run("run", str(tmp_path / "corpus"))
    assert code == 0
    return tmp_path / "store"


def test_synth_then_stages(tmp_path):
    assert run("synth", str(tmp_path / "c"), "--users", "2", "--trajectories", "3")[0] == 0
    s = str(tmp_path / "s")
    code, out = run("ingest", str(tmp_path / "c"), "--store", s)
    assert (code, out) == (0, "ingest: ran\n")
    for stage in ("clean", "staypoints", "cluster", "rank", "sequences"):
        code, out = run(stage, "--store", s)
        assert code == 0 and out.startswith(f"{stage}: ran\n")
    code, out = run("run", str(tmp_path / "c"), "--store", s, "--format", "json")
    assert code == 0
    assert {r["status"] for r in json.loads(out)} == {"cached"}


def test_rank_formats(store):
    code, out = run("rank", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["rank"]) for r in rows] == list(range(1, len(rows) + 1))
    auth = [float(r["authority"]) for r in rows]
    assert auth == sorted(auth, reverse=True)
    code, out = run("rank", "--format", "json", "--top", "2")
    assert len(json.loads(out)) == min(2, len(rows))


def test_distance_between_coordinates(store):
    code, out = run("distance", "2.272,102.287", "2.2774,102.299", "--format", "json")
    assert code == 0
    (row,) = json.loads(out)
    assert row["distance_m"] == pytest.approx(PLANETARIUM_ZOO_M, abs=1e-6)
    assert row["duration_s"] == 263


def test_distance_unknown_poi_is_data_error(store):
    assert run("distance", "0", "9999")[0] == 3


def test_plan_outputs(store, tmp_path):
    code, out = run("plan", "--plan.days", "2", "--format", "json",
                    "--gpx", str(tmp_path / "plan.gpx"))
    assert code == 0
    doc = json.loads(out)
    assert 1 <= len(doc["days"]) <= 2
    for day in doc["days"]:
        assert day["total_time_s"] <= 28_800
    assert (tmp_path / "plan.gpx").read_bytes().startswith(b"<?xml")
    code, out = run("plan", "--start", "2.19,102.24")
    assert code == 0 and "score" in out


def test_config_file_and_flag_precedence(store, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"plan": {"days": 3}, "catalog": {"top_pois": 4}}))
    code, out = run("plan", "--config", str(cfg), "--format", "json")
    doc = json.loads(out)
    assert code == 0 and len({s["poi"] for d in doc["days"] for s in d["stops"]}) <= 4
    code, out = run("plan", "--config", str(cfg), "--catalog.top_pois", "1", "--format", "json")
    assert sum(len(d["stops"]) for d in json.loads(out)["days"]) == 1


def test_report_and_traffic(store):
    code, out = run("report", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["user_id", "paths", "coordinates", "selected", "stay_points"]
    body, total = rows[1:-2], rows[-2]
    assert total[0] == "Total"
    for k in range(1, 5):
        assert int(total[k]) == sum(int(r[k]) for r in body)
    code, out = run("report")
    assert "POIs:" in out
    code, out = run("traffic-summary", "--format", "json")
    assert code == 0 and len(json.loads(out)) == 3


def test_exports(store, tmp_path):
    code, out = run("export", "geojson")
    assert code == 0 and json.loads(out)["type"] == "FeatureCollection"
    code, _ = run("export", "geojson", "--what", "staypoints", "-o", str(tmp_path / "s.geojson"))
    kinds = {f["properties"]["kind"] for f in json.loads((tmp_path / "s.geojson").read_text())["features"]}
    assert code == 0 and kinds == {"stay_point"}
    code, out = run("export", "gpx")
    assert code == 0 and "<trkseg>" in out
    assert run("export", "gpx", "--what", "staypoints")[0] == 2


def test_usage_errors(store, tmp_path):
    assert run()[0] == 2
    assert run("nosuch")[0] == 2
    assert run("plan", "--plan.days", "0")[0] == 2
    assert run("plan", "--plan.days", "two")[0] == 2
    assert run("plan", "--start", "north")[0] == 2
    assert run("rank", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_data_errors(tmp_path):
    (tmp_path / "empty").mkdir()
    s = str(tmp_path / "s")
    assert run("ingest", str(tmp_path / "empty"), "--store", s)[0] == 3
    assert run("clean", "--store", s)[0] == 3
    assert run("report", "--store", s)[0] == 3
    (tmp_path / "bad").mkdir()
    (tmp_path / "bad" / "u.csv").write_text("Latitude,Longitude,Time\n2.2,abc,08:00:00\n")
    assert run("ingest", str(tmp_path / "bad"), "--store", s)[0] == 3
