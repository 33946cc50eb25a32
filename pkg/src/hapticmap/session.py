"""Live exploration sessions: cursor movement to feedback events.

Each session serializes its own writes (one cursor/toggle writer at a time);
many sessions can share the same immutable dataset and index. Replaying the
same cursor trace over the same dataset yields an identical event sequence
(timestamps aside).
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from dataclasses import dataclass, field

from .errors import SessionClosed
from .geo import CanvasPoint
from .index import SpatialIndex
from .osm import ZoneCategory

BOUNDARY_SPEECH = "move {direction} to return to the map zone"
REENTER_SPEECH = "You are back on the map."


@dataclass(frozen=True)
class HapticPattern:
    """One vibrotactile pattern; continuous patterns may have pulse_ms = 0."""

    pattern_id: str
    pulse_ms: int
    gap_ms: int
    intensity: float
    continuous: bool = False

    def __post_init__(self):
        if not self.continuous and self.pulse_ms <= 0:
            raise ValueError("pulse_ms must be > 0 for pulsed patterns")
        if not 0.0 <= self.intensity <= 1.0:
            raise ValueError("intensity must be within [0, 1]")

    def to_json_obj(self) -> dict:
        return {
            "pattern_id": self.pattern_id,
            "pulse_ms": self.pulse_ms,
            "gap_ms": self.gap_ms,
            "intensity": self.intensity,
            "continuous": self.continuous,
        }


# Qualitative ordering from the category taxonomy: buildings pulse rapidly,
# parks pulse slower, water is a soft continuous pattern. Numbers are
# configurable defaults that satisfy that ordering.
DEFAULT_PATTERNS: dict[ZoneCategory, HapticPattern] = {
    ZoneCategory.BUILDING: HapticPattern("building_rapid", 30, 50, 0.9),
    ZoneCategory.PARK: HapticPattern("park_slow", 40, 150, 0.7),
    ZoneCategory.WATER: HapticPattern("water_soft", 0, 0, 0.3, continuous=True),
    ZoneCategory.OTHER_AREA: HapticPattern("area_default", 35, 100, 0.6),
}
BOUNDARY_BURST = HapticPattern("boundary_burst", 120, 0, 1.0)
REENTER_CONFIRM = HapticPattern("reenter_confirm", 20, 40, 0.5)


class HapticConfig:
    """category -> pattern mapping, overridable per deployment."""

    def __init__(self, patterns: dict[ZoneCategory, HapticPattern] | None = None):
        self.patterns = dict(DEFAULT_PATTERNS)
        if patterns:
            self.patterns.update(patterns)

    def haptic_for(self, category: ZoneCategory) -> HapticPattern:
        return self.patterns[category]


def haptic_for(category: ZoneCategory) -> HapticPattern:
    return DEFAULT_PATTERNS[category]


@dataclass(frozen=True)
class FeedbackEvent:
    kind: str  # zone_enter | zone_exit | boundary_exit | boundary_reenter | audio_label
    cursor: CanvasPoint
    at: float
    zone_id: str | None = None
    zone_name: str | None = None
    haptic: HapticPattern | None = None
    speech_text: str | None = None

    def to_json_obj(self) -> dict:
        return {
            "kind": self.kind,
            "cursor": {"x": self.cursor.x, "y": self.cursor.y},
            "at": self.at,
            "zone_id": self.zone_id,
            "zone_name": self.zone_name,
            "haptic": self.haptic.to_json_obj() if self.haptic else None,
            "speech_text": self.speech_text,
        }


FEEDBACK_EVENT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["kind", "cursor", "at", "zone_id", "zone_name", "haptic", "speech_text"],
    "additionalProperties": False,
    "properties": {
        "kind": {
            "enum": ["zone_enter", "zone_exit", "boundary_exit", "boundary_reenter", "audio_label"]
        },
        "cursor": {
            "type": "object",
            "required": ["x", "y"],
            "additionalProperties": False,
            "properties": {"x": {"type": "number"}, "y": {"type": "number"}},
        },
        "at": {"type": "number"},
        "zone_id": {"type": ["string", "null"]},
        "zone_name": {"type": ["string", "null"]},
        "haptic": {
            "type": ["object", "null"],
            "required": ["pattern_id", "pulse_ms", "gap_ms", "intensity", "continuous"],
            "additionalProperties": False,
            "properties": {
                "pattern_id": {"type": "string"},
                "pulse_ms": {"type": "integer", "minimum": 0},
                "gap_ms": {"type": "integer", "minimum": 0},
                "intensity": {"type": "number", "minimum": 0, "maximum": 1},
                "continuous": {"type": "boolean"},
            },
        },
        "speech_text": {"type": ["string", "null"]},
    },
}


def _return_direction(p: CanvasPoint, width: float, height: float) -> str:
    """Direction word pointing back toward the canvas; ties go horizontal."""
    over_x = max(-p.x, p.x - width, 0.0)
    over_y = max(-p.y, p.y - height, 0.0)
    if over_x >= over_y:
        return "right" if p.x < 0 else "left"
    return "down" if p.y < 0 else "up"


class ExplorationSession:
    """Cursor state, visited log, chat history, and the feedback stream."""

    def __init__(
        self,
        index: SpatialIndex,
        *,
        session_id: str | None = None,
        haptics: HapticConfig | None = None,
        passive_audio_enabled: bool = True,
        clock=time.time,
    ):
        self.session_id = session_id or secrets.token_urlsafe(16)
        self.index = index
        self.dataset = index.dataset
        self.projection = index.projection
        self.haptics = haptics or HapticConfig()
        self.passive_audio_enabled = passive_audio_enabled
        self.clock = clock
        self.created_at = clock()
        self.cursor = CanvasPoint(self.projection.width_px / 2, self.projection.height_px / 2)
        initial = index.hit_test(self.cursor)
        self.current_zone = initial.zone_id if initial else None
        self.out_of_bounds = False
        self.visited: list[tuple[int, str]] = []
        self.events: list[FeedbackEvent] = []
        self.chat_history: list = []  # ChatTurn, managed by the agent module
        self.closed = False
        self._write_lock = threading.Lock()
        self._chat_lock = threading.Lock()
        self._ask_in_flight = False

    def _check_open(self):
        if self.closed:
            raise SessionClosed(f"session {self.session_id} is closed")

    def close(self):
        self.closed = True

    def set_passive_audio(self, enabled: bool) -> None:
        self._check_open()
        with self._write_lock:
            self.passive_audio_enabled = bool(enabled)

    def move_cursor(self, p: CanvasPoint, at: float | None = None) -> list[FeedbackEvent]:
        """Advance the cursor and return the feedback events it produced.

        Zone transitions follow hit_test (zones may extend past the canvas);
        crossing the canvas edge adds boundary_exit / boundary_reenter
        around the transition events. Empty regions yield no events at all.
        """
        self._check_open()
        with self._write_lock:
            return self._move_locked(p, self.clock() if at is None else at)

    def _move_locked(self, p: CanvasPoint, at: float) -> list[FeedbackEvent]:
        was_out = self.out_of_bounds
        is_out = not self.projection.contains(p)
        new_zone = self.index.hit_test(p)
        new_id = new_zone.zone_id if new_zone else None

        transition: list[FeedbackEvent] = []
        if new_id != self.current_zone:
            if self.current_zone is not None:
                old = self.dataset.zone_by_id(self.current_zone)
                transition.append(
                    FeedbackEvent("zone_exit", p, at, zone_id=old.zone_id, zone_name=old.name)
                )
            if new_zone is not None:
                speech = new_zone.name if self.passive_audio_enabled else None
                transition.append(
                    FeedbackEvent(
                        "zone_enter", p, at,
                        zone_id=new_zone.zone_id,
                        zone_name=new_zone.name,
                        haptic=self.haptics.haptic_for(new_zone.category),
                        speech_text=speech,
                    )
                )
                if self.passive_audio_enabled:
                    transition.append(
                        FeedbackEvent(
                            "audio_label", p, at,
                            zone_id=new_zone.zone_id,
                            zone_name=new_zone.name,
                            speech_text=new_zone.name,
                        )
                    )
                if not self.visited or self.visited[-1][1] != new_zone.name:
                    self.visited.append((len(self.visited) + 1, new_zone.name))

        events = transition
        if is_out and not was_out:
            direction = _return_direction(p, self.projection.width_px, self.projection.height_px)
            events = transition + [
                FeedbackEvent(
                    "boundary_exit", p, at,
                    haptic=BOUNDARY_BURST,
                    speech_text=BOUNDARY_SPEECH.format(direction=direction),
                )
            ]
        elif was_out and not is_out:
            events = [
                FeedbackEvent(
                    "boundary_reenter", p, at,
                    haptic=REENTER_CONFIRM,
                    speech_text=REENTER_SPEECH,
                )
            ] + transition

        self.cursor = p
        self.current_zone = new_id
        self.out_of_bounds = is_out
        self.events.extend(events)
        return events


# == Exploration traces (JSON-Lines) ==


@dataclass(frozen=True)
class TraceStep:
    """One replayable record: a cursor move or an interleaved ask."""

    t_ms: int
    x: float | None = None
    y: float | None = None
    ask: str | None = None


def parse_trace(text: str) -> list[TraceStep]:
    steps: list[TraceStep] = []
    t_last = 0
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        t_ms = int(rec.get("t_ms", t_last))
        t_last = t_ms
        if "ask" in rec:
            steps.append(TraceStep(t_ms=t_ms, ask=str(rec["ask"])))
        else:
            if "x" not in rec or "y" not in rec:
                raise ValueError(f"trace line {line_no} has neither x/y nor ask")
            steps.append(TraceStep(t_ms=t_ms, x=float(rec["x"]), y=float(rec["y"])))
    return steps


def load_trace(path) -> list[TraceStep]:
    with open(path, encoding="utf-8") as fh:
        return parse_trace(fh.read())
