"""HTTP + WebSocket service exposing the exploration engine.

Plain request/response for lifecycle and asks; a WebSocket per session for
cursor frames (input-device rates) with feedback events pushed back as JSON
frames. Asks run in worker threads so a pending provider call never blocks
cursor streaming. Datasets and indexes are shared read-only across sessions.
"""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from . import agent
from .errors import (
    AskInFlight,
    EmptyQuestion,
    GeocodeFailure,
    HapticMapError,
    NetworkFailure,
    SessionClosed,
)
from .geo import CanvasPoint, CanvasProjection
from .index import SpatialIndex
from .osm import (
    BUNDLED_FIXTURES,
    DEFAULT_RADIUS_M,
    FixtureGeocoder,
    OverpassClient,
    PlaceQuery,
    ZoneDataset,
    build_dataset,
    default_fixture_center,
    load_fixture_features,
    resolve_place,
)
from .session import ExplorationSession

logger = logging.getLogger(__name__)

DEFAULT_PORT = 8787


class PlaceRequest(BaseModel):
    query: str | None = None
    lat: float | None = None
    lon: float | None = None
    radius_m: float = DEFAULT_RADIUS_M
    fixture: str | None = None
    refresh: bool = False


class SessionRequest(BaseModel):
    dataset_id: str


class AskRequest(BaseModel):
    question: str


class AudioRequest(BaseModel):
    enabled: bool


class SessionRegistry:
    """Datasets, their indexes, and live sessions, by unguessable ids."""

    def __init__(self, cache_dir: str | Path | None = None):
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.datasets: dict[str, tuple[ZoneDataset, SpatialIndex]] = {}
        self.sessions: dict[str, ExplorationSession] = {}

    def add_dataset(self, dataset: ZoneDataset) -> str:
        payload = dataset.to_json_bytes()
        dataset_id = hashlib.sha1(payload).hexdigest()[:12]
        if dataset_id not in self.datasets:
            self.datasets[dataset_id] = (dataset, SpatialIndex(dataset))
            if self.cache_dir is not None:
                self.cache_dir.mkdir(parents=True, exist_ok=True)
                lat, lon = round(dataset.center[0], 4), round(dataset.center[1], 4)
                name = f"dataset_{lat:.4f}_{lon:.4f}_{dataset.radius_m:g}.json"
                (self.cache_dir / name).write_bytes(payload)
        return dataset_id

    def dataset(self, dataset_id: str) -> tuple[ZoneDataset, SpatialIndex]:
        entry = self.datasets.get(dataset_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown dataset {dataset_id}")
        return entry

    def session(self, session_id: str) -> ExplorationSession:
        sess = self.sessions.get(session_id)
        if sess is None or sess.closed:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return sess

    def open_session(self, dataset_id: str) -> ExplorationSession:
        _, index = self.dataset(dataset_id)
        sess = ExplorationSession(index)
        self.sessions[sess.session_id] = sess
        return sess

    def close_session(self, session_id: str) -> None:
        sess = self.session(session_id)
        sess.close()
        del self.sessions[session_id]


def create_app(
    *,
    registry: SessionRegistry | None = None,
    provider_config: agent.ProviderConfig | None = None,
    overpass: OverpassClient | None = None,
    cors_origins: list[str] | None = None,
) -> FastAPI:
    registry = registry if registry is not None else SessionRegistry()
    provider_config = provider_config or agent.provider_config_from_env()
    app = FastAPI(title="hapticmap", version="0.1.0")
    app.state.registry = registry
    app.state.provider_config = provider_config
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def _overpass() -> OverpassClient:
        return overpass or OverpassClient(cache_dir=registry.cache_dir)

    @app.post("/places")
    def create_place(req: PlaceRequest):
        try:
            if req.fixture:
                if req.lat is not None and req.lon is not None:
                    center = (req.lat, req.lon)
                elif req.query:
                    center = resolve_place(PlaceQuery(query_text=req.query), FixtureGeocoder())
                elif req.fixture in BUNDLED_FIXTURES:
                    center = default_fixture_center(req.fixture)
                else:
                    raise HTTPException(422, "fixture request needs lat/lon or query")
                features = load_fixture_features(req.fixture, center, req.radius_m)
                dataset = build_dataset(features, center, req.radius_m, source="fixture")
            else:
                if req.lat is not None and req.lon is not None:
                    center = (req.lat, req.lon)
                elif req.query:
                    center = resolve_place(PlaceQuery(query_text=req.query))
                else:
                    raise HTTPException(422, "request needs lat/lon, query, or fixture")
                features = _overpass().fetch_raw(center, req.radius_m, refresh=req.refresh)
                dataset = build_dataset(features, center, req.radius_m, source="overpass")
        except HTTPException:
            raise
        except FileNotFoundError as exc:
            raise HTTPException(404, str(exc)) from exc
        except GeocodeFailure as exc:
            raise HTTPException(404, str(exc)) from exc
        except NetworkFailure as exc:
            raise HTTPException(502, str(exc)) from exc
        except (HapticMapError, ValueError) as exc:
            raise HTTPException(422, str(exc)) from exc
        dataset_id = registry.add_dataset(dataset)
        return {
            "dataset_id": dataset_id,
            "center": list(dataset.center),
            "radius_m": dataset.radius_m,
            "source": dataset.source,
            "zone_count": len(dataset.zones),
        }

    @app.post("/sessions")
    def create_session(req: SessionRequest):
        sess = registry.open_session(req.dataset_id)
        proj = sess.projection
        return {
            "session_id": sess.session_id,
            "canvas": {
                "width_px": proj.width_px,
                "height_px": proj.height_px,
                "meters_per_pixel": proj.meters_per_pixel,
                "center": list(proj.center_geo),
            },
            "passive_audio_enabled": sess.passive_audio_enabled,
            "zones": [
                {
                    "zone_id": z.zone_id,
                    "name": z.name,
                    "category": z.category.value,
                    "area_m2": z.area_m2,
                    "canvas_centroid": [pz.canvas_centroid.x, pz.canvas_centroid.y],
                }
                for z, pz in zip(sess.dataset.zones, sess.index.projected)
            ],
        }

    @app.get("/sessions/{session_id}/screenshot")
    def screenshot(session_id: str):
        sess = registry.session(session_id)
        from .render import screenshot_jpeg

        data = screenshot_jpeg(sess.dataset, sess.projection, sess.cursor)
        return Response(content=data, media_type="image/jpeg")

    @app.post("/sessions/{session_id}/ask")
    def ask_question(session_id: str, req: AskRequest):
        sess = registry.session(session_id)
        try:
            turn = agent.ask(sess, req.question, config=provider_config)
        except AskInFlight as exc:
            raise HTTPException(409, str(exc)) from exc
        except (EmptyQuestion, SessionClosed) as exc:
            raise HTTPException(422, str(exc)) from exc
        body = turn.to_json_obj()
        if turn.is_error:
            return JSONResponse(status_code=502, content=body)
        return body

    @app.post("/sessions/{session_id}/audio")
    def set_audio(session_id: str, req: AudioRequest):
        sess = registry.session(session_id)
        sess.set_passive_audio(req.enabled)
        return {"passive_audio_enabled": sess.passive_audio_enabled}

    @app.delete("/sessions/{session_id}")
    def close_session(session_id: str):
        registry.close_session(session_id)
        return {"closed": True}

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(ws: WebSocket, session_id: str):
        await ws.accept()
        sess = registry.sessions.get(session_id)
        if sess is None or sess.closed:
            await ws.close(code=4404, reason="unknown session")
            return
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    frame = json.loads(raw)
                    p = CanvasPoint(float(frame["x"]), float(frame["y"]))
                except (ValueError, KeyError, TypeError) as exc:
                    await ws.send_text(json.dumps({"error": f"bad cursor frame: {exc}"}))
                    continue
                try:
                    events = sess.move_cursor(p)
                except SessionClosed:
                    await ws.close(code=4404, reason="session closed")
                    return
                for ev in events:
                    await ws.send_text(json.dumps(ev.to_json_obj()))
        except WebSocketDisconnect:
            pass

    return app
