"""HTTP + WebSocket API contracts."""

import json

import jsonschema
import pytest
from fastapi.testclient import TestClient

from hapticmap.agent import FALLBACK_TEXT, ProviderConfig
from hapticmap.service import SessionRegistry, create_app
from hapticmap.session import FEEDBACK_EVENT_SCHEMA


@pytest.fixture()
def client():
    app = create_app(registry=SessionRegistry(), provider_config=ProviderConfig())
    return TestClient(app)


@pytest.fixture()
def dataset_id(client):
    resp = client.post("/places", json={"fixture": "seattle_center"})
    assert resp.status_code == 200, resp.text
    return resp.json()["dataset_id"]


@pytest.fixture()
def session_id(client, dataset_id):
    resp = client.post("/sessions", json={"dataset_id": dataset_id})
    assert resp.status_code == 200, resp.text
    return resp.json()["session_id"]


class TestPlaces:
    def test_fixture_place_contains_space_needle(self, client):
        resp = client.post("/places", json={"fixture": "seattle_center"})
        body = resp.json()
        assert resp.status_code == 200
        assert body["source"] == "fixture"
        assert body["zone_count"] == 14
        sess = client.post("/sessions", json={"dataset_id": body["dataset_id"]}).json()
        names = {z["name"] for z in sess["zones"]}
        assert "Space Needle" in names

    def test_same_fixture_reuses_dataset_id(self, client):
        a = client.post("/places", json={"fixture": "seattle_center"}).json()["dataset_id"]
        b = client.post("/places", json={"fixture": "seattle_center"}).json()["dataset_id"]
        assert a == b

    def test_fixture_with_query_geocodes_offline(self, client):
        resp = client.post(
            "/places", json={"fixture": "seattle_center", "query": "Space Needle"}
        )
        assert resp.status_code == 200

    def test_unknown_geocode_404(self, client):
        resp = client.post("/places", json={"fixture": "seattle_center", "query": "Atlantis"})
        assert resp.status_code == 404

    def test_malformed_body_422(self, client):
        assert client.post("/places", json={"radius_m": "wide"}).status_code == 422
        assert client.post("/places", json={}).status_code == 422


class TestSessions:
    def test_create_returns_canvas_metadata_and_zone_summaries(self, client, dataset_id):
        body = client.post("/sessions", json={"dataset_id": dataset_id}).json()
        assert body["canvas"] == {
            "width_px": 800,
            "height_px": 800,
            "meters_per_pixel": 1.0,
            "center": list(body["canvas"]["center"]),
        }
        assert body["passive_audio_enabled"] is True
        assert len(body["zones"]) == 14
        zone = body["zones"][0]
        assert set(zone) == {"zone_id", "name", "category", "area_m2", "canvas_centroid"}

    def test_unknown_dataset_404(self, client):
        assert client.post("/sessions", json={"dataset_id": "nope"}).status_code == 404

    def test_missing_dataset_id_422(self, client):
        assert client.post("/sessions", json={}).status_code == 422

    def test_screenshot_is_jpeg(self, client, session_id):
        resp = client.get(f"/sessions/{session_id}/screenshot")
        assert resp.status_code == 200
        assert resp.headers["content-type"] == "image/jpeg"
        assert resp.content[:2] == b"\xff\xd8"

    def test_audio_toggle(self, client, session_id):
        resp = client.post(f"/sessions/{session_id}/audio", json={"enabled": False})
        assert resp.json() == {"passive_audio_enabled": False}

    def test_delete_then_404_everywhere(self, client, session_id):
        assert client.delete(f"/sessions/{session_id}").status_code == 200
        assert client.get(f"/sessions/{session_id}/screenshot").status_code == 404
        assert client.post(f"/sessions/{session_id}/ask", json={"question": "hi"}).status_code == 404
        assert client.post(f"/sessions/{session_id}/audio", json={"enabled": True}).status_code == 404
        assert client.delete(f"/sessions/{session_id}").status_code == 404


class TestAsk:
    def test_mock_ask_grounded_answer(self, client, session_id):
        with client.websocket_connect(f"/sessions/{session_id}/stream") as ws:
            ws.send_text(json.dumps({"x": 485.0, "y": 295.0}))  # into MoPOP
            ws.receive_text()
            ws.receive_text()
        resp = client.post(f"/sessions/{session_id}/ask", json={"question": "Where am I?"})
        body = resp.json()
        assert resp.status_code == 200
        assert body["speaker"] == "agent"
        assert body["is_error"] is False
        assert "Museum of Pop Culture" in body["text"]

    def test_ask_in_flight_409(self, client, session_id):
        app_registry = client.app.state.registry
        sess = app_registry.session(session_id)
        sess._ask_in_flight = True
        resp = client.post(f"/sessions/{session_id}/ask", json={"question": "hi"})
        assert resp.status_code == 409
        sess._ask_in_flight = False

    def test_missing_question_422(self, client, session_id):
        assert client.post(f"/sessions/{session_id}/ask", json={}).status_code == 422

    def test_empty_question_422(self, client, session_id):
        resp = client.post(f"/sessions/{session_id}/ask", json={"question": "  "})
        assert resp.status_code == 422

    def test_provider_failure_502_with_fallback_body(self, dataset_id):
        config = ProviderConfig(
            provider_kind="remote_text_mediated",
            endpoint="http://127.0.0.1:9/unreachable",
            api_key="k",
            timeout_ms=300,
        )
        app = create_app(registry=SessionRegistry(), provider_config=config)
        client = TestClient(app)
        ds = client.post("/places", json={"fixture": "seattle_center"}).json()["dataset_id"]
        sid = client.post("/sessions", json={"dataset_id": ds}).json()["session_id"]
        import hapticmap.agent as agent_mod

        original = agent_mod._RETRY_BACKOFF_S
        agent_mod._RETRY_BACKOFF_S = 0.0
        try:
            resp = client.post(f"/sessions/{sid}/ask", json={"question": "Where am I?"})
        finally:
            agent_mod._RETRY_BACKOFF_S = original
        assert resp.status_code == 502
        body = resp.json()
        assert body["is_error"] is True
        assert body["text"] == FALLBACK_TEXT


class TestStream:
    def test_zone_enter_frame_with_haptic_and_speech(self, client, session_id):
        with client.websocket_connect(f"/sessions/{session_id}/stream") as ws:
            ws.send_text(json.dumps({"x": 485.0, "y": 295.0}))
            enter = json.loads(ws.receive_text())
            label = json.loads(ws.receive_text())
        assert enter["kind"] == "zone_enter"
        assert enter["zone_name"] == "Museum of Pop Culture"
        assert enter["haptic"]["pattern_id"] == "building_rapid"
        assert label["kind"] == "audio_label"
        assert label["speech_text"] == "Museum of Pop Culture"

    def test_every_frame_validates_against_schema(self, client, session_id):
        path = [
            (485.0, 295.0),   # MoPOP: enter + label
            (300.0, 300.0),   # empty: exit
            (220.0, 400.0),   # Fountain Lawn (park): enter + label
            (240.0, 340.0),   # International Fountain (water): exit + enter + label
            (810.0, 400.0),   # off right edge: exit + boundary_exit
            (700.0, 400.0),   # back on canvas: boundary_reenter
        ]
        frames = []
        with client.websocket_connect(f"/sessions/{session_id}/stream") as ws:
            for x, y in path:
                ws.send_text(json.dumps({"x": x, "y": y}))
            for _ in range(11):
                frames.append(json.loads(ws.receive_text()))
        for frame in frames:
            jsonschema.validate(frame, FEEDBACK_EVENT_SCHEMA)
        kinds = [f["kind"] for f in frames]
        assert "boundary_exit" in kinds
        assert "boundary_reenter" in kinds

    def test_bad_frame_reports_error(self, client, session_id):
        with client.websocket_connect(f"/sessions/{session_id}/stream") as ws:
            ws.send_text("not json")
            err = json.loads(ws.receive_text())
        assert "error" in err

    def test_unknown_session_closes_ws(self, client):
        import starlette.websockets

        with pytest.raises(starlette.websockets.WebSocketDisconnect) as exc:
            with client.websocket_connect("/sessions/ghost/stream") as ws:
                ws.receive_text()
        assert exc.value.code == 4404
