"""HTTP service contract: status codes, payload shapes, validation, binding."""
import json
import socket
import threading

import pytest
from fastapi.testclient import TestClient

from vulntriage.errors import BindError
from vulntriage.service import (
    MAX_DESCRIPTION_CHARS,
    classify_text,
    create_app,
    parse_bind,
    start,
)


@pytest.fixture(scope="module")
def client(saved_model_dir):
    app = create_app(model_dir=saved_model_dir)
    with TestClient(app) as client:
        yield client


class TestHealth:
    def test_ok_when_loaded(self, client, mini_model):
        response = client.get("/api/v1/health")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "ok"
        assert body["model_version"] == mini_model.version

    def test_unavailable_without_model(self):
        app = create_app()
        with TestClient(app) as bare:
            for path in ("/api/v1/health", "/api/v1/labels"):
                response = bare.get(path)
                assert response.status_code == 503
                assert response.json() == {"error": "model not ready"}
            response = bare.post("/api/v1/classify", json={"description": "x"})
            assert response.status_code == 503


class TestLabels:
    def test_shapes_and_order(self, client, mini_model):
        body = client.get("/api/v1/labels").json()
        assert body["severities"] == ["Low", "Medium", "High", "Critical"]
        assert body["types"] == list(mini_model.taxonomy.names)
        assert len(body["types"]) == 10


class TestClassify:
    def test_happy_path(self, client):
        response = client.post(
            "/api/v1/classify",
            json={"description": "SQL injection in the login form allows code execution"},
        )
        assert response.status_code == 200
        body = response.json()
        assert body["severity_label"] in ("Low", "Medium", "High", "Critical")
        assert body["severity_index"] in range(4)
        assert sum(body["severity_probs"]) == pytest.approx(1.0, abs=1e-6)
        assert len(body["types"]) == 10
        for entry in body["types"]:
            assert set(entry) == {"name", "probability", "predicted"}
            assert 0.0 <= entry["probability"] <= 1.0
        assert body["latency_ms"] >= 0.0
        assert body["model_version"]

    def test_predicted_flag_matches_threshold(self, client):
        for threshold in (0.1, 0.5, 0.9):
            body = client.post(
                "/api/v1/classify",
                json={"description": "buffer overflow", "threshold": threshold},
            ).json()
            for entry in body["types"]:
                assert entry["predicted"] == (entry["probability"] >= threshold)

    def test_deterministic_for_same_input(self, client):
        payload = {"description": "cross site scripting in the admin panel"}
        a = client.post("/api/v1/classify", json=payload).json()
        b = client.post("/api/v1/classify", json=payload).json()
        a.pop("latency_ms")
        b.pop("latency_ms")
        assert a == b

    @pytest.mark.parametrize(
        "body",
        [
            {},
            {"description": ""},
            {"description": "   "},
            {"description": 42},
            {"description": None},
        ],
    )
    def test_bad_description_variants(self, client, body):
        response = client.post("/api/v1/classify", json=body)
        assert response.status_code == 400
        assert "error" in response.json()

    def test_malformed_json(self, client):
        response = client.post(
            "/api/v1/classify",
            content=b"{not json",
            headers={"content-type": "application/json"},
        )
        assert response.status_code == 400
        assert "malformed" in response.json()["error"]

    def test_non_object_body(self, client):
        response = client.post("/api/v1/classify", json=["description"])
        assert response.status_code == 400

    def test_oversize_description(self, client):
        response = client.post(
            "/api/v1/classify", json={"description": "x" * (MAX_DESCRIPTION_CHARS + 1)}
        )
        assert response.status_code == 400
        assert str(MAX_DESCRIPTION_CHARS) in response.json()["error"]

    def test_boundary_length_accepted(self, client):
        text = "overflow " * (MAX_DESCRIPTION_CHARS // 9)
        assert len(text) <= MAX_DESCRIPTION_CHARS
        response = client.post("/api/v1/classify", json={"description": text})
        assert response.status_code == 200

    @pytest.mark.parametrize("threshold", [0.0, 1.0, -0.1, "0.5", True, [0.5]])
    def test_bad_threshold_rejected(self, client, threshold):
        response = client.post(
            "/api/v1/classify", json={"description": "dos", "threshold": threshold}
        )
        assert response.status_code == 400
        assert "threshold" in response.json()["error"]

    def test_extra_fields_ignored(self, client):
        response = client.post(
            "/api/v1/classify", json={"description": "rce", "reporter": "alice"}
        )
        assert response.status_code == 200


class TestCors:
    def test_preflight_allows_any_origin_by_default(self, client):
        response = client.options(
            "/api/v1/classify",
            headers={
                "origin": "http://localhost:5173",
                "access-control-request-method": "POST",
            },
        )
        assert response.status_code == 200
        assert response.headers["access-control-allow-origin"] == "*"

    def test_explicit_origin_list(self, saved_model_dir):
        app = create_app(model_dir=saved_model_dir, allowed_origins=["http://ui.example"])
        with TestClient(app) as client:
            response = client.get(
                "/api/v1/health", headers={"origin": "http://ui.example"}
            )
            assert response.headers["access-control-allow-origin"] == "http://ui.example"


class TestClassifyText:
    def test_direct_call_matches_endpoint(self, client, mini_model):
        direct = classify_text(mini_model, "directory traversal in tar extraction")
        via_http = client.post(
            "/api/v1/classify",
            json={"description": "directory traversal in tar extraction"},
        ).json()
        direct.pop("latency_ms")
        via_http.pop("latency_ms")
        assert via_http == json.loads(json.dumps(direct))

    def test_app_level_threshold_default(self, saved_model_dir):
        app = create_app(model_dir=saved_model_dir, threshold=0.05)
        with TestClient(app) as client:
            body = client.post(
                "/api/v1/classify", json={"description": "use after free"}
            ).json()
            for entry in body["types"]:
                assert entry["predicted"] == (entry["probability"] >= 0.05)


class TestBind:
    def test_parse_bind(self):
        assert parse_bind("0.0.0.0:9000") == ("0.0.0.0", 9000)
        with pytest.raises(ValueError):
            parse_bind("no-port")
        with pytest.raises(ValueError):
            parse_bind(":8000")
        with pytest.raises(ValueError):
            parse_bind("host:abc")

    def test_port_in_use(self, saved_model_dir):
        blocker = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        blocker.bind(("127.0.0.1", 0))
        blocker.listen(1)
        port = blocker.getsockname()[1]
        try:
            with pytest.raises(BindError):
                start(saved_model_dir, bind=f"127.0.0.1:{port}")
        finally:
            blocker.close()


class TestConcurrency:
    def test_identical_requests_identical_bodies(self, client):
        payload = {"description": "privilege escalation through a setuid helper"}
        results = []
        lock = threading.Lock()

        def call():
            body = client.post("/api/v1/classify", json=payload).json()
            body.pop("latency_ms")
            with lock:
                results.append(body)

        threads = [threading.Thread(target=call) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(results) == 8
        assert all(body == results[0] for body in results)
