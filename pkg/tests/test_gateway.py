import json

import pytest
from fastapi.testclient import TestClient

from minerec import xes
from minerec.quality import MEASURES
from minerec.service import create_app
from minerec.store import Store, content_log_id

from conftest import make_xes

WEIGHTS = {"fitness": 60, "precision": 20, "generalization": 10, "simplicity": 10}


@pytest.fixture()
def client(tmp_path, bundle_file):
    app = create_app(data_dir=tmp_path / "data", bundle_path=bundle_file, upload_cap=64 * 1024)
    with TestClient(app) as c:
        yield c


def upload(client, doc=None):
    doc = doc if doc is not None else make_xes([("a", "b", "c"), ("a", "c")])
    response = client.post("/logs", content=doc)
    assert response.status_code == 201
    return response.json()["log_id"]


def test_upload_returns_content_hash_id(client):
    doc = make_xes([("a", "b")])
    assert upload(client, doc) == content_log_id(doc)


def test_upload_is_idempotent(client):
    doc = make_xes([("a", "b")])
    first = upload(client, doc)
    second = upload(client, doc)
    assert first == second
    assert len(client.get("/logs").json()["logs"]) == 1


def test_upload_malformed_gives_400_with_code(client):
    response = client.post("/logs", content=b"<log><trace>")
    assert response.status_code == 400
    assert response.json()["error"]["code"] == "MalformedXml"


def test_upload_missing_activity_code(client):
    doc = (b'<log><trace><event>'
           b'<date key="time:timestamp" value="2024-01-01T00:00:00+00:00"/>'
           b'</event></trace></log>')
    response = client.post("/logs", content=doc)
    assert response.status_code == 400
    assert response.json()["error"]["code"] == "MissingActivity"


def test_upload_over_cap_gives_413(client):
    big = make_xes([tuple(f"a{i}" for i in range(40))] * 200)
    assert len(big) > 64 * 1024
    response = client.post("/logs", content=big)
    assert response.status_code == 413
    assert response.json()["error"]["code"] == "PayloadTooLarge"


def test_recommendation_flow_and_ranking_order(client):
    log_id = upload(client)
    response = client.post(
        "/recommendations",
        json={"log_id": log_id, "weights": {"fitness": 100, "precision": 0,
                                            "generalization": 0, "simplicity": 0}},
    )
    assert response.status_code == 201
    rec = response.json()["recommendation"]
    results = rec["results"]
    fitness_sorted = sorted(
        results, key=lambda r: (-r["predicted"]["fitness"], r["algorithm"])
    )
    assert results == fitness_sorted


def test_recommendation_unknown_log_404(client):
    response = client.post(
        "/recommendations", json={"log_id": "deadbeef", "weights": WEIGHTS}
    )
    assert response.status_code == 404
    assert response.json()["error"]["code"] == "UnknownLog"


def test_recommendation_all_zero_weights_422(client):
    log_id = upload(client)
    response = client.post(
        "/recommendations",
        json={"log_id": log_id, "weights": {m: 0 for m in MEASURES}},
    )
    assert response.status_code == 422
    assert response.json()["error"]["code"] == "AllZeroWeights"


def test_recommendation_out_of_range_weights_422(client):
    log_id = upload(client)
    response = client.post(
        "/recommendations",
        json={"log_id": log_id, "weights": dict(WEIGHTS, fitness=150)},
    )
    assert response.status_code == 422
    assert response.json()["error"]["code"] == "InvalidWeights"


def test_recommendation_persisted_and_fetchable(client):
    log_id = upload(client)
    created = client.post(
        "/recommendations", json={"log_id": log_id, "weights": WEIGHTS}
    ).json()
    fetched = client.get(f"/recommendations/{created['rec_id']}")
    assert fetched.status_code == 200
    assert fetched.json()["recommendation"] == created["recommendation"]


def test_discover_returns_workflow_net_and_dot(client):
    log_id = upload(client)
    response = client.post("/discover", json={"log_id": log_id, "algorithm": "inductive"})
    assert response.status_code == 200
    doc = response.json()
    net = doc["net"]
    targets = {a["to"] for a in net["arcs"]}
    sources = {a["from"] for a in net["arcs"]}
    place_set = set(net["places"])
    assert len(place_set - targets) == 1  # one source place
    assert len(place_set - sources) == 1  # one sink place
    assert doc["dot"].startswith("digraph")


def test_discover_is_repeatable(client):
    log_id = upload(client)
    body = {"log_id": log_id, "algorithm": "alpha"}
    one = client.post("/discover", json=body).json()
    two = client.post("/discover", json=body).json()
    assert one == two


def test_discover_unknown_algorithm_422(client):
    log_id = upload(client)
    response = client.post("/discover", json={"log_id": log_id, "algorithm": "split_miner"})
    assert response.status_code == 422
    assert response.json()["error"]["code"] == "UnsupportedAlgorithm"


def test_discover_bad_params_422(client):
    log_id = upload(client)
    response = client.post(
        "/discover",
        json={"log_id": log_id, "algorithm": "heuristics",
              "params": {"dependency_threshold": 2.0}},
    )
    assert response.status_code == 422
    assert response.json()["error"]["code"] == "DiscoveryFailure"


def test_explanations_expose_local_accuracy(client, mini_bundle):
    log_id = upload(client)
    rec_id = client.post(
        "/recommendations", json={"log_id": log_id, "weights": WEIGHTS}
    ).json()["rec_id"]
    response = client.get(f"/recommendations/{rec_id}/explanations/alpha/fitness")
    assert response.status_code == 200
    payload = response.json()
    total = payload["base"] + sum(i["contribution"] for i in payload["items"])
    assert abs(total - payload["prediction"]) < 1e-9
    assert len(payload["items"]) == len(mini_bundle.feature_schema)


def test_explanations_invalid_pair_422(client):
    log_id = upload(client)
    rec_id = client.post(
        "/recommendations", json={"log_id": log_id, "weights": WEIGHTS}
    ).json()["rec_id"]
    bad_measure = client.get(f"/recommendations/{rec_id}/explanations/alpha/speed")
    assert bad_measure.status_code == 422
    assert bad_measure.json()["error"]["code"] == "InvalidMeasure"
    bad_alg = client.get(f"/recommendations/{rec_id}/explanations/split_miner/fitness")
    assert bad_alg.status_code == 422
    assert bad_alg.json()["error"]["code"] == "UnsupportedAlgorithm"


def test_explanations_unknown_recommendation_404(client):
    response = client.get("/recommendations/ffff/explanations/alpha/fitness")
    assert response.status_code == 404


def test_features_endpoint(client):
    log_id = upload(client)
    response = client.get(f"/features/{log_id}")
    assert response.status_code == 200
    assert len(response.json()["features"]) == 48
    missing = client.get("/features/0000")
    assert missing.status_code == 404


def test_catalog_endpoint_has_featurer_fields(client):
    response = client.get("/catalog/features")
    assert response.status_code == 200
    rows = response.json()["features"]
    assert len(rows) == 48
    for row in rows:
        assert {"description", "source", "used_in_count", "most_important_for",
                "rank", "score"} <= set(row)


def test_store_survives_restart(tmp_path, bundle_file):
    doc = make_xes([("a", "b")])
    app = create_app(data_dir=tmp_path / "data", bundle_path=bundle_file)
    with TestClient(app) as client:
        log_id = upload(client, doc)
        rec_id = client.post(
            "/recommendations", json={"log_id": log_id, "weights": WEIGHTS}
        ).json()["rec_id"]
    fresh_app = create_app(data_dir=tmp_path / "data", bundle_path=bundle_file)
    with TestClient(fresh_app) as fresh:
        assert fresh.get(f"/features/{log_id}").status_code == 200
        assert fresh.get(f"/recommendations/{rec_id}").status_code == 200
        assert len(fresh.get("/logs").json()["logs"]) == 1


def test_store_feature_cache_matches_direct_extraction(tmp_path):
    from minerec import features

    store = Store(tmp_path)
    doc = make_xes([("a", "b", "c")])
    stored, vector = store.put_log(doc)
    log = xes.parse_xes(doc)
    assert vector.values == features.extract(log).values
    assert store.get_features(stored.log_id).values == vector.values
