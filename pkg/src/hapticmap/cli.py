"""Command-line interface: fetch, render, replay, serve.

Replay drives a session from a JSON-Lines trace and prints a deterministic
event + Q/A transcript (timestamps come from the trace, not the wall clock),
which is what the golden tests pin.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from pathlib import Path

from . import agent
from .errors import HapticMapError
from .geo import CanvasPoint, CanvasProjection
from .index import SpatialIndex
from .osm import (
    DEFAULT_RADIUS_M,
    FixtureGeocoder,
    OverpassClient,
    PlaceQuery,
    ZoneDataset,
    build_dataset,
    load_fixture_features,
    resolve_place,
)
from .session import ExplorationSession, TraceStep, load_trace


def _parse_latlon(text: str) -> tuple[float, float] | None:
    m = re.fullmatch(r"\s*(-?\d+(?:\.\d+)?)\s*,\s*(-?\d+(?:\.\d+)?)\s*", text)
    if not m:
        return None
    return (float(m.group(1)), float(m.group(2)))


def _slug(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", text.lower()).strip("_") or "dataset"


def cmd_fetch(args) -> int:
    center = _parse_latlon(args.place)
    if args.offline_fixture:
        if center is None:
            center = resolve_place(PlaceQuery(query_text=args.place), FixtureGeocoder())
        features = load_fixture_features(args.offline_fixture, center, args.radius)
        dataset = build_dataset(features, center, args.radius, source="fixture")
    else:
        if center is None:
            center = resolve_place(PlaceQuery(query_text=args.place))
        client = OverpassClient(cache_dir=args.cache_dir)
        features = client.fetch_raw(center, args.radius, refresh=args.refresh)
        dataset = build_dataset(features, center, args.radius, source="overpass")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / f"{_slug(args.place)}.json"
    dataset.save(out_path)
    print(f"wrote {out_path} ({len(dataset.zones)} zones, source={dataset.source})")
    return 0


def cmd_render(args) -> int:
    from .render import DEFAULT_STYLE, RenderStyle, render_canvas, encode_jpeg

    dataset = ZoneDataset.load(args.dataset)
    projection = CanvasProjection(center_geo=dataset.center)
    if args.cursor:
        xy = _parse_latlon(args.cursor)  # same "a,b" syntax, canvas coords
        if xy is None:
            raise HapticMapError(f"bad --cursor {args.cursor!r}, expected x,y")
        cursor = CanvasPoint(xy[0], xy[1])
    else:
        cursor = CanvasPoint(projection.width_px / 2, projection.height_px / 2)
    style = DEFAULT_STYLE
    if args.labels:
        style = RenderStyle(label_rendering="on")
    image = render_canvas(dataset, projection, cursor, style)
    data = encode_jpeg(image, quality=args.quality)
    Path(args.output).write_bytes(data)
    print(f"wrote {args.output} ({len(data)} bytes)")
    return 0


def format_transcript(entries: list[tuple[int, str, str]]) -> str:
    """Entries are (t_ms, kind, detail) rows; one line per row."""
    return "\n".join(f"t={t}ms {kind} {detail}" for t, kind, detail in entries) + "\n"


def replay_trace(
    index: SpatialIndex,
    steps: list[TraceStep],
    provider_config: agent.ProviderConfig | None = None,
) -> tuple[str, ExplorationSession]:
    """Run a trace through a fresh session; returns (transcript, session)."""
    session = ExplorationSession(index)
    config = provider_config or agent.ProviderConfig()
    entries: list[tuple[int, str, str]] = []
    for step in steps:
        if step.ask is not None:
            entries.append((step.t_ms, "ask", json.dumps(step.ask, ensure_ascii=False)))
            turn = agent.ask(session, step.ask, config=config)
            entries.append((step.t_ms, "answer", json.dumps(turn.text, ensure_ascii=False)))
            continue
        events = session.move_cursor(CanvasPoint(step.x, step.y), at=step.t_ms / 1000.0)
        for ev in events:
            if ev.kind == "zone_enter":
                entries.append(
                    (step.t_ms, "zone_enter",
                     f"{json.dumps(ev.zone_name, ensure_ascii=False)} haptic={ev.haptic.pattern_id}")
                )
            elif ev.kind == "zone_exit":
                entries.append((step.t_ms, "zone_exit", json.dumps(ev.zone_name, ensure_ascii=False)))
            elif ev.kind == "audio_label":
                entries.append((step.t_ms, "audio_label", json.dumps(ev.speech_text, ensure_ascii=False)))
            else:  # boundary events
                entries.append(
                    (step.t_ms, ev.kind,
                     f"speech={json.dumps(ev.speech_text, ensure_ascii=False)}")
                )
    return format_transcript(entries), session


def cmd_replay(args) -> int:
    dataset = ZoneDataset.load(args.dataset)
    index = SpatialIndex(dataset)
    steps = load_trace(args.trace)
    config = agent.ProviderConfig(provider_kind=args.provider)
    transcript, _ = replay_trace(index, steps, config)
    sys.stdout.write(transcript)
    if args.golden:
        Path(args.golden).write_text(transcript, encoding="utf-8")
        print(f"wrote {args.golden}", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import SessionRegistry, create_app

    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            for key, value in json.load(fh).items():
                os.environ[key] = str(value)
    app = create_app(registry=SessionRegistry(cache_dir=args.cache_dir))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hapticmap",
        description="Audio-haptic map engine: fetch zones, render canvases, replay traces, serve the exploration API.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="fetch a place and build a zone dataset")
    p.add_argument("place", help="place name or 'lat,lon'")
    p.add_argument("--radius", type=float, default=DEFAULT_RADIUS_M, help="radius in meters")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--offline-fixture", default=None,
                   help="bundled fixture name or Overpass-JSON path; no network")
    p.add_argument("--refresh", action="store_true", help="bypass the Overpass disk cache")
    p.add_argument("--cache-dir", default=None)
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("render", help="render a dataset to a JPEG")
    p.add_argument("dataset")
    p.add_argument("--cursor", default=None, help="canvas cursor as 'x,y'")
    p.add_argument("-o", "--output", default="canvas.jpg")
    p.add_argument("--labels", action="store_true", help="draw zone-name labels")
    p.add_argument("--quality", type=int, default=80)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("replay", help="replay a cursor/ask trace deterministically")
    p.add_argument("dataset")
    p.add_argument("trace")
    p.add_argument("--provider", default="mock_grounded")
    p.add_argument("--golden", default=None, help="also write the transcript here")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="run the HTTP/WebSocket service")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--config", default=None, help="JSON config file (same keys as env vars)")
    p.add_argument("--cache-dir", default=None, help="directory for on-disk dataset caching")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (HapticMapError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
