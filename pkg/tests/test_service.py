"""HTTP service contract, exercised through the in-process test client."""

import json

import pytest
from fastapi.testclient import TestClient

from moldialog.chat import RetrievalBackend, session_to_jsonl
from moldialog.config import Config
from moldialog.service import create_app


@pytest.fixture()
def client(toy_pairs):
    backend = RetrievalBackend(toy_pairs)
    app = create_app(Config(), backends={"retrieval": backend})
    with TestClient(app) as client:
        yield client


def test_create_session(client):
    response = client.post("/sessions", json={})
    assert response.status_code == 201
    body = response.json()
    assert body["id"] == "s0001"
    assert body["backend"] == "retrieval"
    assert "created_at" in body

    second = client.post("/sessions", json={}).json()
    assert second["id"] == "s0002"


def test_create_session_unknown_backend(client):
    response = client.post("/sessions", json={"backend": "oracle"})
    assert response.status_code == 400
    assert "unknown backend" in response.json()["error"]["detail"]


def test_text_turn_returns_candidate_set(client):
    sid = client.post("/sessions", json={}).json()["id"]
    response = client.post(f"/sessions/{sid}/turns",
                           json={"kind": "text", "content": "a small alcohol"})
    assert response.status_code == 200
    body = response.json()
    assert set(body) == {"candidates", "chosen"}
    assert len(body["candidates"]) == 3
    for candidate in body["candidates"]:
        assert set(candidate) == {"smiles", "valid", "sim_to_prev", "padded"}
        assert candidate["valid"] is True
        assert candidate["sim_to_prev"] is None


def test_molecule_turn_returns_description(client, toy_pairs):
    sid = client.post("/sessions", json={}).json()["id"]
    response = client.post(f"/sessions/{sid}/turns",
                           json={"kind": "molecule", "content": "CCO"})
    assert response.status_code == 200
    row = next(p for p in toy_pairs if p["smiles"] == "CCO")
    assert response.json() == {"description": row["description"]}


def test_turn_on_unknown_session_is_404(client):
    response = client.post("/sessions/s9999/turns",
                           json={"kind": "text", "content": "anything"})
    assert response.status_code == 404
    assert "error" in response.json()


def test_bad_turn_payload_is_422(client):
    sid = client.post("/sessions", json={}).json()["id"]
    for payload in ({"kind": "poem", "content": "x"},
                    {"kind": "text"},
                    {"kind": "text", "content": 7}):
        response = client.post(f"/sessions/{sid}/turns", json=payload)
        assert response.status_code == 422


def test_invalid_molecule_turn_gets_error_envelope(client):
    sid = client.post("/sessions", json={}).json()["id"]
    response = client.post(f"/sessions/{sid}/turns",
                           json={"kind": "molecule", "content": "C1CC"})
    assert response.status_code == 422
    error = response.json()["error"]
    assert error["kind"] == "unclosed_ring_bond"
    assert error["position"] == 4
    assert error["detail"]


def test_refine_from_flows_through(client):
    sid = client.post("/sessions", json={}).json()["id"]
    first = client.post(f"/sessions/{sid}/turns",
                        json={"kind": "text", "content": "a small alcohol"}).json()
    response = client.post(f"/sessions/{sid}/turns",
                           json={"kind": "text", "content": "make it bigger",
                                 "refine_from": 1})
    assert response.status_code == 200

    log = client.get(f"/sessions/{sid}").text
    chosen = [json.loads(l) for l in log.splitlines()
              if '"user_choice"' in l]
    assert len(chosen) == 1
    assert chosen[0]["content"] == first["candidates"][1]["smiles"]

    bad = client.post(f"/sessions/{sid}/turns",
                      json={"kind": "text", "content": "x", "refine_from": 99})
    assert bad.status_code == 422


def test_session_export_matches_serializer(client):
    sid = client.post("/sessions", json={}).json()["id"]
    client.post(f"/sessions/{sid}/turns",
                json={"kind": "text", "content": "a carboxylic acid"})
    client.post(f"/sessions/{sid}/turns",
                json={"kind": "molecule", "content": "CC(=O)O"})

    response = client.get(f"/sessions/{sid}")
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("application/x-ndjson")

    session = client.app.state.store.get(sid)
    assert response.text == session_to_jsonl(session)


def test_session_export_unknown_id(client):
    assert client.get("/sessions/s9999").status_code == 404


def test_parse_endpoint(client):
    response = client.get("/molecules/parse", params={"smiles": "c1ccccc1"})
    assert response.status_code == 200
    body = response.json()
    assert set(body) == {"atoms", "bonds", "rings"}
    assert len(body["atoms"]) == 6
    assert all(atom["aromatic"] for atom in body["atoms"])
    assert len(body["bonds"]) == 6
    # ring atoms come back in cycle order so a client can draw the ring
    assert len(body["rings"]) == 1
    assert sorted(body["rings"][0]) == list(range(6))

    bad = client.get("/molecules/parse", params={"smiles": "C("})
    assert bad.status_code == 422
    error = bad.json()["error"]
    assert error["kind"] == "unbalanced_paren"
    assert error["position"] == 2


def test_similarity_endpoint(client):
    response = client.post("/similarity", json={"a": "CCO", "b": "CCO"})
    assert response.status_code == 200
    body = response.json()
    assert set(body) == {"fts_rdk", "fts_maccs", "fts_morgan"}
    assert all(value == 1.0 for value in body.values())

    different = client.post("/similarity", json={"a": "CCO", "b": "c1ccccc1"}).json()
    assert all(0.0 <= different[key] < 1.0 for key in different)


def test_similarity_error_names_the_side(client):
    response = client.post("/similarity", json={"a": "CCO", "b": "C1CC"})
    assert response.status_code == 422
    error = response.json()["error"]
    assert error["which"] == "b"
    assert error["kind"] == "unclosed_ring_bond"

    missing = client.post("/similarity", json={"a": "CCO"})
    assert missing.status_code == 422


def test_cross_origin_requests_are_allowed(client):
    response = client.get("/molecules/parse", params={"smiles": "CCO"},
                          headers={"Origin": "http://localhost:5173"})
    assert response.status_code == 200
    assert response.headers["access-control-allow-origin"] == "*"

    preflight = client.options(
        "/sessions",
        headers={"Origin": "http://localhost:5173",
                 "Access-Control-Request-Method": "POST",
                 "Access-Control-Request-Headers": "content-type"})
    assert preflight.status_code == 200
    assert preflight.headers["access-control-allow-origin"] == "*"


def test_evaluate_endpoint_inline_records(client):
    predictions = [{"id": "r1", "candidates": ["CCO", "CCC"]}]
    references = [{"id": "r1", "candidates": ["CCO"]}]
    response = client.post("/evaluate", json={"task": "generation",
                                              "predictions": predictions,
                                              "references": references})
    assert response.status_code == 200
    body = response.json()
    assert body["task"] == "generation"
    assert body["gen_metrics"]["em"] == 1.0
    assert body["gen_metrics"]["validity"] == 1.0

    bad_task = client.post("/evaluate", json={"task": "translation",
                                              "predictions": [], "references": []})
    assert bad_task.status_code == 422

    misaligned = client.post("/evaluate", json={
        "task": "generation",
        "predictions": predictions,
        "references": [{"id": "r2", "candidates": ["CCO"]}]})
    assert misaligned.status_code == 400


def test_evaluate_understanding_inline(client):
    predictions = [{"id": "u1", "text": "a colorless liquid"}]
    references = [{"id": "u1", "text": "a colorless liquid"}]
    response = client.post("/evaluate", json={"task": "understanding",
                                              "predictions": predictions,
                                              "references": references})
    assert response.status_code == 200
    metrics = response.json()["text_metrics"]
    assert metrics["bleu4"] == pytest.approx(1.0)
    assert metrics["rougeL"] == pytest.approx(1.0)


def test_shutdown_flushes_logs(tmp_path, toy_pairs):
    backend = RetrievalBackend(toy_pairs)
    config = Config(log_dir=str(tmp_path / "logs"))
    app = create_app(config, backends={"retrieval": backend})
    with TestClient(app) as client:
        sid = client.post("/sessions", json={}).json()["id"]
        client.post(f"/sessions/{sid}/turns",
                    json={"kind": "text", "content": "an alcohol"})
        expected = session_to_jsonl(client.app.state.store.get(sid))
    # exiting the client context fires the shutdown hook
    log_path = tmp_path / "logs" / f"{sid}.jsonl"
    assert log_path.read_text(encoding="utf-8") == expected
