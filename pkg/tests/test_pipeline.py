import hashlib
import json

import pytest

from trajmine.config import PipelineConfig, parse_value
from trajmine.errors import PipelineError
from trajmine.pipeline import (
    ARTIFACTS,
    STAGES,
    load_levels,
    load_ranking,
    load_scores,
    load_stay_points,
    plan_from_store,
    report,
    run_pipeline,
    traffic_summary,
)
from trajmine.store import MissingArtifactError, Store, StoreLockedError
from trajmine.synth import SynthSpec, write_synthetic

SMALL = SynthSpec(users=4, trajectories_per_user=4, spike_rate=0.02, seed=7)


def digests(store):
    return {name: hashlib.sha256((store.root / name).read_bytes()).hexdigest()
            for name in ARTIFACTS.values()}


@pytest.fixture
def corpus(tmp_path):
    write_synthetic(tmp_path / "corpus", SMALL)
    return tmp_path / "corpus"


def config(corpus, **over):
    return PipelineConfig().with_overrides({"input.dir": str(corpus), **over})


def test_config_round_trip(tmp_path):
    cfg = PipelineConfig().with_overrides({
        "input.dir": "logs", "staypoint.distance_threshold_m": 150.0,
        "tbhg.level_eps_m": (400.0, 200.0, 100.0), "catalog.preferred": ("3",),
        "plan.money_budget": 12.5, "hits.binary": True})
    assert PipelineConfig.from_json(cfg.to_json()) == cfg
    cfg.save(tmp_path / "c.json")
    assert PipelineConfig.load(tmp_path / "c.json") == cfg
    assert PipelineConfig.from_json(PipelineConfig().to_json()) == PipelineConfig()


def test_config_rejects_unknown_and_invalid():
    with pytest.raises(ValueError, match="unknown"):
        PipelineConfig.from_dict({"staypoint": {"radius": 3}})
    with pytest.raises(ValueError, match="unknown"):
        PipelineConfig.from_dict({"nope": {}})
    with pytest.raises(ValueError):
        PipelineConfig().with_overrides({"staypoint.time_threshold_s": -5})
    with pytest.raises(ValueError):
        PipelineConfig().with_overrides({"days": 2})


def test_parse_value_types():
    assert parse_value("500,250", (500.0, 250.0)) == (500.0, 250.0)
    assert parse_value("3,7", ()) == ("3", "7")
    assert parse_value("[1, 2]", ()) == (1, 2)
    assert parse_value("yes", False) is True
    assert parse_value("4", 1) == 4
    assert parse_value("none", None) is None
    with pytest.raises(ValueError):
        parse_value("maybe", True)


def test_empty_input_directory(tmp_path):
    (tmp_path / "logs").mkdir()
    with pytest.raises(PipelineError) as err:
        run_pipeline(config(tmp_path / "logs"), tmp_path / "store")
    assert err.value.stage == "ingest"
    assert "logs" in str(err.value)


def test_rerun_is_cached_and_identical(corpus, tmp_path):
    store, status = run_pipeline(config(corpus), tmp_path / "store")
    assert set(status.values()) == {"ran"}
    first = digests(store)
    _, status = run_pipeline(config(corpus), tmp_path / "store")
    assert status == {s: "cached" for s in STAGES}
    assert digests(store) == first
    # a fresh store from the same inputs is byte-identical too
    other, _ = run_pipeline(config(corpus), tmp_path / "store2")
    assert digests(other) == first


def test_invalidation_is_downstream_only(corpus, tmp_path):
    store, _ = run_pipeline(config(corpus), tmp_path / "store")
    # every planted dwell lasts >= 25 min, so this changes parameters but not output
    _, status = run_pipeline(config(corpus, **{"staypoint.time_threshold_s": 1400.0}), store)
    assert status == {**{s: "cached" for s in STAGES}, "staypoints": "ran"}
    _, status = run_pipeline(config(corpus, **{"staypoint.time_threshold_s": 1800.0}), store)
    assert status == {"ingest": "cached", "clean": "cached", "staypoints": "ran",
                      "cluster": "ran", "rank": "ran", "sequences": "ran"}
    _, status = run_pipeline(config(corpus, **{"staypoint.time_threshold_s": 1800.0,
                                               "sequences.k": 3}), store)
    assert status == {**{s: "cached" for s in STAGES}, "sequences": "ran"}


def test_input_byte_change_reruns_ingest(corpus, tmp_path):
    cfg = config(corpus)
    store, _ = run_pipeline(cfg, tmp_path / "store")
    path = corpus / "user01.csv"
    lines = path.read_text().splitlines(keepends=True)
    lat = lines[5].split(",")[0]
    lines[5] = lines[5].replace(lat, f"{float(lat) + 0.000001:.6f}", 1)
    path.write_text("".join(lines))
    _, status = run_pipeline(cfg, store)
    assert status["ingest"] == "ran" and status["clean"] == "ran"


def test_tampered_artifact_is_rebuilt(corpus, tmp_path):
    cfg = config(corpus)
    store, _ = run_pipeline(cfg, tmp_path / "store")
    good = (store.root / "staypoints.csv").read_bytes()
    (store.root / "staypoints.csv").write_bytes(good.replace(b"user00", b"user99", 1))
    _, status = run_pipeline(cfg, store)
    assert status["staypoints"] == "ran"
    assert (store.root / "staypoints.csv").read_bytes() == good


def test_failed_stage_keeps_earlier_artifacts(corpus, tmp_path):
    bad = config(corpus, **{"tbhg.level_eps_m": (100.0, 300.0)})
    with pytest.raises(PipelineError) as err:
        run_pipeline(bad, tmp_path / "store")
    assert err.value.stage == "cluster"
    store = Store(tmp_path / "store")
    assert store.has("staypoints") and not store.has("cluster")
    assert not (store.root / ".lock").exists()
    _, status = run_pipeline(config(corpus), store)
    assert status["staypoints"] == "cached" and status["cluster"] == "ran"


def test_lock_is_exclusive(corpus, tmp_path):
    store = Store(tmp_path / "store")
    with store.lock():
        with pytest.raises(StoreLockedError):
            run_pipeline(config(corpus), store)
    run_pipeline(config(corpus), store)


def test_artifacts_reload_and_validate(corpus, tmp_path):
    store, _ = run_pipeline(config(corpus), tmp_path / "store")
    sps = load_stay_points(store)
    levels = load_levels(store, sps)
    assert [lv.eps_prime_m for lv in levels] == [500.0, 250.0]
    fine = levels[-1]
    assert set(fine.parents) == {c.cluster_id for c in fine.clusters}
    scores = load_scores(store)
    ranked = load_ranking(store)
    assert [c.cluster_id for c in ranked] == [r["cluster_id"]
                                             for r in json.loads(store.read("rank"))["ranking"]]
    assert {c.cluster_id for c in ranked} == set(scores.cluster_ids)

    doc = json.loads(store.read("cluster"))
    doc["levels"][-1]["labels"][0] = 99
    (store.root / "clusters.json").write_text(json.dumps(doc))
    with pytest.raises(ValueError):
        load_levels(store, sps)


def test_report_shape_and_totals(corpus, tmp_path):
    store, _ = run_pipeline(config(corpus), tmp_path / "store", stages=STAGES[:3])
    rep = report(store)
    assert rep.poi_count is None
    assert "not computed" in rep.render()
    assert len(rep.rows) == SMALL.users
    # independent rescan of the stored tables
    raw = (store.root / "trajectories.csv").read_text().splitlines()[1:]
    kept = (store.root / "cleaned.csv").read_text().splitlines()[1:]
    stays = (store.root / "staypoints.csv").read_text().splitlines()[1:]
    assert rep.totals.coordinates == len(raw)
    assert rep.totals.selected == len(kept)
    assert rep.totals.stay_points == len(stays)
    assert rep.totals.paths == len({ln.split(",")[1] for ln in raw})
    assert (store.root / "report.csv").read_bytes() == rep.to_csv()

    run_pipeline(config(corpus), store)
    assert report(store).poi_count == len(load_levels(store)[-1].clusters)


def test_report_needs_staypoints(corpus, tmp_path):
    store, _ = run_pipeline(config(corpus), tmp_path / "store", stages=STAGES[:2])
    with pytest.raises(MissingArtifactError, match="staypoints"):
        report(store)


def test_single_user_report(tmp_path):
    write_synthetic(tmp_path / "one", SynthSpec(users=1, trajectories_per_user=2, seed=2))
    store, _ = run_pipeline(config(tmp_path / "one"), tmp_path / "store", stages=STAGES[:3])
    rep = report(store)
    (row,) = rep.rows
    assert (row.paths, row.coordinates, row.selected, row.stay_points) == \
        (rep.totals.paths, rep.totals.coordinates, rep.totals.selected, rep.totals.stay_points)


def test_traffic_and_plan(corpus, tmp_path):
    cfg = config(corpus, **{"plan.days": 2})
    store, _ = run_pipeline(cfg, tmp_path / "store")
    rows = traffic_summary(store, cfg)
    assert [r.user_id for r in rows] == [f"user{k:02d}" for k in range(SMALL.users)]
    for r in rows:
        assert r.max_kmh <= cfg.clean.max_speed_kmh
        assert r.median_kmh <= r.max_kmh
    plan, catalog, _ = plan_from_store(store, cfg)
    assert 1 <= len(plan.days) <= 2
    assert set(plan.pois) <= {q.id for q in catalog}
