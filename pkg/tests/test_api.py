import pytest
from fastapi.testclient import TestClient

from app.config import settings
from app.main import app
from app.models.nrlgt import NRLGT
from app.schemas.generation import Topology
from app.schemas.model import ModelManifest

STAR = {"n": 5, "directed": True, "edges": [[0, 1], [0, 2], [0, 3], [0, 4]]}


@pytest.fixture
def client(monkeypatch):
    monkeypatch.setattr(settings, "MODEL_CHECKPOINT", None)
    return TestClient(app)


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "healthy", "model_configured": False}


def test_curve(client):
    response = client.post("/api/oracle/curve", json={"graph": STAR, "strategy": {"kind": "TDA"}})
    assert response.status_code == 200
    body = response.json()
    assert body["kind"] == "controllability"
    assert body["values"] == [1.0, 1.0, 1.0, 1.0]
    assert body["rc"] == 1.0
    assert body["order"] == [0, 1, 2, 3]


def test_connectivity_batch_curve(client):
    payload = {"graph": STAR, "kind": "connectivity", "batch_fraction": 0.4, "strategy": {"kind": "TDA"}}
    response = client.post("/api/oracle/curve", json=payload)
    assert response.status_code == 200
    body = response.json()
    assert body["values"] == pytest.approx([1 / 3, 1.0])
    assert body["order"] == []


def test_curve_validation(client):
    response = client.post("/api/oracle/curve", json={"graph": STAR, "batch_fraction": 1.0})
    assert response.status_code == 422
    response = client.post("/api/oracle/curve", json={"graph": {"n": 1, "edges": []}})
    assert response.status_code == 400


@pytest.mark.parametrize(
    "graph",
    [
        {"n": 3, "edges": [[0, 0]]},
        {"n": 3, "edges": [[0, 3]]},
        {"n": 3, "edges": [[0, 1], [0, 1]]},
        {"n": 3, "edges": [[0, 1]], "weights": [1.0, 2.0]},
        {"n": 3, "edges": [[0, 1]], "weights": [-1.0]},
    ],
)
def test_malformed_graphs_are_rejected(client, graph):
    response = client.post("/api/oracle/attack", json={"graph": graph})
    assert response.status_code == 400


def test_graph_size_limit(client, monkeypatch):
    monkeypatch.setattr(settings, "MAX_API_NODES", 4)
    response = client.post("/api/oracle/attack", json={"graph": STAR})
    assert response.status_code == 400
    assert "limit" in response.json()["detail"]


def test_attack(client):
    response = client.post("/api/oracle/attack", json={"graph": STAR, "strategy": {"kind": "RA", "seed": 3}})
    assert response.status_code == 200
    body = response.json()
    assert body["kind"] == "RA"
    assert len(body["order"]) == 4
    assert len(set(body["order"])) == 4
    assert set(body["order"]) <= set(range(5))


def test_spectral(client):
    complete = {"n": 4, "directed": False, "edges": [[u, v] for u in range(4) for v in range(u + 1, 4)]}
    response = client.post("/api/oracle/spectral", json=complete)
    assert response.status_code == 200
    body = response.json()
    assert body["SR"] == pytest.approx(3.0)
    assert body["AC"] == pytest.approx(4.0)


def test_predict_without_model(client):
    response = client.post("/api/model/predict", json={"graph": STAR})
    assert response.status_code == 503


def test_predict_with_unreadable_checkpoint(client, monkeypatch, tmp_path):
    path = tmp_path / "broken.ckpt"
    path.write_bytes(b"garbage")
    monkeypatch.setattr(settings, "MODEL_CHECKPOINT", str(path))
    response = client.post("/api/model/predict", json={"graph": STAR})
    assert response.status_code == 503


def test_predict(client, monkeypatch, tmp_path):
    path = tmp_path / "model.ckpt"
    NRLGT(ModelManifest(d=4, layers=1, inner_heads=2, outer_heads=2, curve_size=5, max_degree=8)).save(path)
    monkeypatch.setattr(settings, "MODEL_CHECKPOINT", str(path))
    response = client.post("/api/model/predict", json={"graph": STAR})
    assert response.status_code == 200
    body = response.json()
    assert body["label"] in [t.value for t in Topology]
    assert len(body["probabilities"]) == 5
    assert sum(body["probabilities"]) == pytest.approx(1.0)
    assert len(body["curve"]) == 4
    assert 0.0 < body["rc"] < 1.0
