import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor

import pytest
from fastapi.testclient import TestClient

from domainsat.ingest import write_features_csv, write_predictions_csv
from domainsat.model_head import ScenarioConfig, generate_scenario
from domainsat.pipeline import run_shift_analysis
from domainsat.registry import build_configs
from domainsat.service.app import create_app


def scenario_bytes(kind="id", n=240, d=5, magnitude=0.0, seed=3, tmp_path=None):
    config = ScenarioConfig(
        kind=kind, n=n, d=d, shift_magnitude=magnitude, seed=seed
    )
    features, predictions, _ = generate_scenario(config)
    f_path = tmp_path / f"{kind}_{seed}_f.csv"
    p_path = tmp_path / f"{kind}_{seed}_p.csv"
    write_features_csv(features, f_path)
    write_predictions_csv(predictions, p_path)
    return f_path.read_bytes(), p_path.read_bytes()


def upload(client, data: bytes, kind: str, name: str):
    return client.post(
        "/api/datasets",
        files={"file": (f"{name}.csv", data, "text/csv")},
        data={"kind": kind, "name": name},
    )


def wait_job(client, job_id, timeout=60.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        response = client.get(f"/api/jobs/{job_id}")
        assert response.status_code == 200
        record = response.json()
        if record["status"] in ("done", "error"):
            return record
        time.sleep(0.02)
    raise AssertionError(f"job {job_id} did not finish in {timeout}s")


@pytest.fixture()
def client(tmp_path):
    app = create_app(data_dir=tmp_path / "data", workers=2)
    return TestClient(app)


@pytest.fixture()
def loaded(tmp_path, client):
    """Client plus uploaded id/harmful feature and prediction datasets."""
    id_f, id_p = scenario_bytes("id", tmp_path=tmp_path)
    harm_f, harm_p = scenario_bytes(
        "harmful_shift", magnitude=2.5, tmp_path=tmp_path
    )
    ids = {}
    for name, kind, data in (
        ("id_features", "features", id_f),
        ("id_preds", "predictions", id_p),
        ("harm_features", "features", harm_f),
        ("harm_preds", "predictions", harm_p),
    ):
        response = upload(client, data, kind, name)
        assert response.status_code == 201, response.text
        ids[name] = response.json()["id"]
    return client, ids


def test_health(client):
    response = client.get("/api/health")
    assert response.status_code == 200
    assert response.json()["status"] == "ok"


def test_upload_echoes_shape(client, tmp_path):
    data, _ = scenario_bytes(tmp_path=tmp_path)
    response = upload(client, data, "features", "ref")
    assert response.status_code == 201
    record = response.json()
    assert record["n"] == 240 and record["d"] == 5
    assert record["kind"] == "features"
    assert record["columns"] == [f"f{j}" for j in range(5)]
    assert record["has_labels"] is True
    assert "path" not in record


def test_upload_nan_cell_names_location(client):
    response = upload(client, b"f0,f1\n1.0,2.0\n3.0,nan\n", "features", "bad")
    assert response.status_code == 400
    body = response.json()
    assert body["error"]["code"] == "parse_error"
    assert body["error"]["detail"]["line"] == 3
    assert body["error"]["detail"]["column"] == "f1"


def test_upload_same_name_gets_distinct_id(client):
    data = b"f0\n1\n2\n"
    first = upload(client, data, "features", "twin").json()
    second = upload(client, data, "features", "twin").json()
    assert first["id"] != second["id"]
    listed = client.get("/api/datasets").json()["datasets"]
    assert len([d for d in listed if d["name"] == "twin"]) == 2


def test_upload_invalid_kind(client):
    response = upload(client, b"f0\n1\n", "pictures", "x")
    assert response.status_code == 422
    assert response.json()["error"]["code"] == "invalid_kind"


def test_upload_over_limit_is_413(tmp_path):
    app = create_app(data_dir=tmp_path / "small", max_upload_bytes=64)
    client = TestClient(app)
    response = upload(client, b"f0\n" + b"1.0\n" * 200, "features", "big")
    assert response.status_code == 413
    assert response.json()["error"]["code"] == "too_large"


def test_upload_prediction_out_of_range_is_400(client):
    response = upload(client, b"p_tumor\n0.5\n1.7\n", "predictions", "p")
    assert response.status_code == 400


def test_dataset_crud(client):
    record = upload(client, b"f0\n1\n", "features", "tiny").json()
    dataset_id = record["id"]
    assert client.get(f"/api/datasets/{dataset_id}").status_code == 200
    assert client.delete(f"/api/datasets/{dataset_id}").status_code == 204
    assert client.get(f"/api/datasets/{dataset_id}").status_code == 404
    assert client.delete(f"/api/datasets/{dataset_id}").status_code == 404


def test_error_envelope_shape(client):
    body = client.get("/api/datasets/nope").json()
    assert set(body) == {"error"}
    assert set(body["error"]) == {"code", "message", "detail"}
    assert body["error"]["code"] == "not_found"


def test_algorithm_catalog(client):
    body = client.get("/api/algorithms").json()
    catalog = body["algorithms"]
    ids = [a["id"] for a in catalog]
    assert len(ids) == 15 and len(set(ids)) == 15
    by_category = {}
    for a in catalog:
        by_category.setdefault(a["category"], []).append(a["id"])
    assert len(by_category["distance"]) == 5
    assert len(by_category["statistic"]) == 4
    assert len(by_category["ml"]) == 4
    assert len(by_category["output"]) == 2
    for algo in catalog:
        for param in algo["params"]:
            assert {"name", "type", "default", "description"} <= set(param)
    assert body["defaults"]["detect"]


def test_catalog_defaults_round_trip(loaded):
    client, ids = loaded
    catalog = client.get("/api/algorithms").json()["algorithms"]
    defaults = {}
    for algo in catalog:
        for param in algo["params"]:
            defaults[param["name"]] = param["default"]
    response = client.post(
        "/api/jobs",
        json={
            "kind": "detect",
            "reference_id": ids["id_features"],
            "target_id": ids["id_features"],
            "algorithms": ["mmd", "ks"],
            "config": defaults,
        },
    )
    assert response.status_code == 202, response.text
    record = wait_job(client, response.json()["id"])
    assert record["status"] == "done"


def test_detect_job_self_comparison(loaded):
    client, ids = loaded
    response = client.post(
        "/api/jobs",
        json={
            "kind": "detect",
            "reference_id": ids["id_features"],
            "target_id": ids["id_features"],
            "algorithms": ["mmd", "ks"],
            "seed": 7,
        },
    )
    assert response.status_code == 202
    posted = response.json()
    assert posted["status"] == "pending"
    record = wait_job(client, posted["id"])
    assert record["status"] == "done"
    result = client.get(f"/api/jobs/{posted['id']}/result").json()
    assert result["kind"] == "shift"
    assert result["results"]["alarm"] is False
    assert abs(result["results"]["scores"][0]["raw_value"]) < 1e-6


def test_job_result_matches_direct_pipeline(loaded, tmp_path):
    client, ids = loaded
    response = client.post(
        "/api/jobs",
        json={
            "kind": "detect",
            "reference_id": ids["id_features"],
            "target_id": ids["harm_features"],
            "algorithms": ["mmd", "wasserstein", "ks", "c2st_logistic"],
            "seed": 21,
        },
    )
    job_id = response.json()["id"]
    assert wait_job(client, job_id)["status"] == "done"
    via_service = client.get(f"/api/jobs/{job_id}/result").json()

    f_id, _ = scenario_bytes("id", tmp_path=tmp_path)
    config = ScenarioConfig(kind="id", n=240, d=5, shift_magnitude=0.0, seed=3)
    ref, _, _ = generate_scenario(config)
    harm = generate_scenario(
        ScenarioConfig(kind="harmful_shift", n=240, d=5, shift_magnitude=2.5, seed=3)
    )[0]
    direct = run_shift_analysis(
        ref,
        harm,
        metric_ids=("mmd", "wasserstein"),
        test_ids=("ks",),
        detector_ids=("c2st_logistic",),
        bundle=build_configs(seed=21),
        seed=21,
    )
    assert json.dumps(via_service, sort_keys=True) == json.dumps(
        direct.to_dict(), sort_keys=True
    )


def test_cdi_job_and_alarm(loaded):
    client, ids = loaded
    response = client.post(
        "/api/jobs",
        json={
            "kind": "cdi",
            "reference_id": ids["id_preds"],
            "target_id": ids["harm_preds"],
        },
    )
    assert response.status_code == 202
    record = wait_job(client, response.json()["id"])
    assert record["status"] == "done"
    result = record["result"]
    assert result["kind"] == "cdi"
    assert result["results"]["delta_cdi_m"] < -0.02
    assert result["results"]["alarm"] is True


def test_cdi_job_on_features_dataset_is_409(loaded):
    client, ids = loaded
    response = client.post(
        "/api/jobs",
        json={
            "kind": "cdi",
            "reference_id": ids["id_features"],
            "target_id": ids["id_preds"],
        },
    )
    assert response.status_code == 409
    assert response.json()["error"]["code"] == "kind_mismatch"


def test_job_unknown_dataset_is_404(loaded):
    client, ids = loaded
    response = client.post(
        "/api/jobs",
        json={"kind": "detect", "reference_id": ids["id_features"], "target_id": "zzz"},
    )
    assert response.status_code == 404


def test_job_invalid_config_is_422(loaded):
    client, ids = loaded
    for config in ({"not_a_param": 1}, {"alpha": 2.0}):
        response = client.post(
            "/api/jobs",
            json={
                "kind": "detect",
                "reference_id": ids["id_features"],
                "target_id": ids["id_features"],
                "config": config,
            },
        )
        assert response.status_code == 422, config
        assert response.json()["error"]["code"] == "invalid_config"


def test_job_unknown_algorithm_is_422(loaded):
    client, ids = loaded
    response = client.post(
        "/api/jobs",
        json={
            "kind": "detect",
            "reference_id": ids["id_features"],
            "target_id": ids["id_features"],
            "algorithms": ["energy_distance"],
        },
    )
    assert response.status_code == 422
    assert "valid ids" in response.json()["error"]["message"]


def test_job_missing_kind_field_is_422(loaded):
    client, ids = loaded
    response = client.post(
        "/api/jobs", json={"kind": "detect", "reference_id": ids["id_features"]}
    )
    assert response.status_code == 422
    body = response.json()
    assert body["error"]["code"] == "invalid_config"
    assert "target_id" in body["error"]["message"]


def test_validation_error_envelope(loaded):
    client, _ = loaded
    response = client.post("/api/jobs", json={"kind": "mystery"})
    assert response.status_code == 422
    assert response.json()["error"]["code"] == "validation_error"


def test_study_job(loaded):
    client, ids = loaded
    response = client.post(
        "/api/jobs",
        json={
            "kind": "study",
            "reference_id": ids["id_features"],
            "target_id": ids["harm_features"],
            "reference_predictions_id": ids["id_preds"],
            "target_predictions_id": ids["harm_preds"],
            "algorithms": ["mmd"],
            "n_batches": 4,
            "batch_size": 80,
            "seed": 5,
        },
    )
    assert response.status_code == 202
    record = wait_job(client, response.json()["id"])
    assert record["status"] == "done", record["error"]
    result = record["result"]
    assert result["kind"] == "study"
    assert len(result["results"]["records"]) == 4
    assert all(r["delta_cdi_m"] < 0 for r in result["results"]["records"])


def test_baseline_job(loaded):
    client, ids = loaded
    response = client.post(
        "/api/jobs",
        json={
            "kind": "baseline",
            "reference_id": ids["id_features"],
            "algorithms": ["mmd", "wasserstein"],
            "n_batches": 4,
            "batch_size": 60,
        },
    )
    assert response.status_code == 202
    record = wait_job(client, response.json()["id"])
    assert record["status"] == "done"
    assert set(record["result"]["values"]) == {"mmd", "wasserstein"}
    assert record["result"]["n_batches"] == 4


def test_result_of_pending_job_is_409(tmp_path):
    app = create_app(data_dir=tmp_path / "slow", workers=1)
    client = TestClient(app)
    f, p = scenario_bytes(n=2000, d=8, tmp_path=tmp_path)
    fid = upload(client, f, "features", "f").json()["id"]
    pid = upload(client, p, "predictions", "p").json()["id"]
    body = {
        "kind": "study",
        "reference_id": fid,
        "target_id": fid,
        "reference_predictions_id": pid,
        "target_predictions_id": pid,
        "n_batches": 10,
        "batch_size": 500,
    }
    first = client.post("/api/jobs", json=body).json()["id"]
    second = client.post("/api/jobs", json=body).json()["id"]
    response = client.get(f"/api/jobs/{second}/result")
    assert response.status_code == 409
    assert response.json()["error"]["code"] in ("not_done",)
    wait_job(client, first)
    record = wait_job(client, second)
    assert record["status"] == "done"
    assert client.get(f"/api/jobs/{second}/result").status_code == 200


def test_failed_job_result_is_409(loaded):
    client, ids = loaded
    response = client.post(
        "/api/jobs",
        json={
            "kind": "detect",
            "reference_id": ids["id_features"],
            "target_id": ids["id_features"],
        },
    )
    job_id = response.json()["id"]
    wait_job(client, job_id)
    client.delete(f"/api/datasets/{ids['id_features']}")
    rerun = client.post(
        "/api/jobs",
        json={
            "kind": "detect",
            "reference_id": ids["id_features"],
            "target_id": ids["id_features"],
        },
    )
    assert rerun.status_code == 404


def test_job_status_never_regresses(loaded):
    client, ids = loaded
    order = {"pending": 0, "running": 1, "done": 2, "error": 2}
    response = client.post(
        "/api/jobs",
        json={
            "kind": "detect",
            "reference_id": ids["id_features"],
            "target_id": ids["harm_features"],
            "algorithms": ["c2st_random_forest"],
        },
    )
    job_id = response.json()["id"]
    seen = []
    for _ in range(2000):
        status = client.get(f"/api/jobs/{job_id}").json()["status"]
        seen.append(status)
        if status in ("done", "error"):
            break
        time.sleep(0.005)
    ranks = [order[s] for s in seen]
    assert ranks == sorted(ranks)
    assert seen[-1] == "done"


def test_histograms(loaded):
    client, ids = loaded
    fid = ids["id_features"]
    response = client.get(
        f"/api/datasets/{fid}/histogram",
        params={"selector": "f0", "compare_with": fid},
    )
    assert response.status_code == 200
    body = response.json()
    assert len(body["bin_edges"]) == 51  # default bin count
    counts = list(body["counts_per_group"].values())
    assert len(counts) == 2 and counts[0] == counts[1]

    split = client.get(
        f"/api/datasets/{ids['id_preds']}/histogram",
        params={"selector": "p_positive split by label", "bins": 20},
    ).json()
    names = list(split["counts_per_group"])
    assert any("true normal" in n for n in names)
    assert any("true tumor" in n for n in names)

    assert (
        client.get(
            f"/api/datasets/{fid}/histogram", params={"selector": "missing"}
        ).status_code
        == 422
    )
    assert (
        client.get(
            "/api/datasets/none/histogram", params={"selector": "f0"}
        ).status_code
        == 404
    )
    assert (
        client.get(
            f"/api/datasets/{fid}/histogram",
            params={"selector": "f0", "compare_with": "none"},
        ).status_code
        == 404
    )


def test_restart_preserves_datasets_and_interrupts_jobs(tmp_path):
    data_dir = tmp_path / "persist"
    app = create_app(data_dir=data_dir, workers=1)
    client = TestClient(app)
    record = upload(client, b"f0\n1\n2\n", "features", "keep").json()
    stuck = app.state.jobs.create("detect", {"reference_id": record["id"]})
    app.state.jobs.update(stuck["id"], status="running")

    fresh = TestClient(create_app(data_dir=data_dir, workers=1))
    datasets = fresh.get("/api/datasets").json()["datasets"]
    assert [d["id"] for d in datasets] == [record["id"]]
    job = fresh.get(f"/api/jobs/{stuck['id']}").json()
    assert job["status"] == "error"
    assert job["error"] == "interrupted"


def test_concurrent_uploads_and_jobs(tmp_path):
    app = create_app(data_dir=tmp_path / "stress", workers=4)
    client = TestClient(app)
    base, _ = scenario_bytes(n=120, d=4, tmp_path=tmp_path)
    ref_id = upload(client, base, "features", "ref").json()["id"]

    def one_upload(i):
        response = upload(client, base, "features", f"up{i}")
        assert response.status_code == 201
        return response.json()["id"]

    def one_job(i):
        response = client.post(
            "/api/jobs",
            json={
                "kind": "detect",
                "reference_id": ref_id,
                "target_id": ref_id,
                "algorithms": ["mmd"],
                "seed": i,
            },
        )
        assert response.status_code == 202
        return response.json()["id"]

    with ThreadPoolExecutor(max_workers=10) as pool:
        upload_ids = list(pool.map(one_upload, range(20)))
        job_ids = list(pool.map(one_job, range(10)))

    assert len(set(upload_ids)) == 20
    listed = client.get("/api/datasets").json()["datasets"]
    assert len(listed) == 21
    for job_id in job_ids:
        assert wait_job(client, job_id)["status"] == "done"

    reloaded = TestClient(create_app(data_dir=tmp_path / "stress"))
    assert len(reloaded.get("/api/datasets").json()["datasets"]) == 21


def test_worker_pool_size_does_not_change_results(tmp_path):
    results = []
    for workers, label in ((1, "one"), (8, "eight")):
        app = create_app(data_dir=tmp_path / label, workers=workers)
        client = TestClient(app)
        f, p = scenario_bytes(n=200, d=4, tmp_path=tmp_path)
        fid = upload(client, f, "features", "f").json()["id"]
        pid = upload(client, p, "predictions", "p").json()["id"]
        job_ids = []
        for seed in range(4):
            response = client.post(
                "/api/jobs",
                json={
                    "kind": "study",
                    "reference_id": fid,
                    "target_id": fid,
                    "reference_predictions_id": pid,
                    "target_predictions_id": pid,
                    "algorithms": ["mmd", "wasserstein"],
                    "n_batches": 3,
                    "batch_size": 50,
                    "seed": seed,
                },
            )
            job_ids.append(response.json()["id"])
        pool_results = []
        for job_id in job_ids:
            record = wait_job(client, job_id)
            assert record["status"] == "done"
            pool_results.append(json.dumps(record["result"], sort_keys=True))
        results.append(pool_results)
    assert results[0] == results[1]


def test_static_ui_served_when_present(tmp_path):
    static = tmp_path / "dist"
    static.mkdir()
    (static / "index.html").write_text("<!doctype html><title>ui</title>ok")
    app = create_app(data_dir=tmp_path / "data", static_dir=static)
    client = TestClient(app)
    assert client.get("/api/health").status_code == 200
    page = client.get("/")
    assert page.status_code == 200
    assert "ui" in page.text


def test_root_without_static_reports_api(client):
    body = client.get("/").json()
    assert body["api"] == "/api"
