"""Multimodal prompt assembly and conversational providers.

Each ask builds a four-part prompt (system role text, sliding 20-turn chat
window plus visited-locations list, spatial context with screenshot, and the
user question), dispatches it to a pluggable provider, and threads both
turns into the session history. A deterministic geometry-grounded mock
provider answers entirely from the dataset, for tests and offline demos;
the remote provider speaks a generic JSON chat-completions contract over
HTTPS so vendor adapters stay thin configuration.
"""

from __future__ import annotations

import base64
import json
import os
import re
import time
from dataclasses import dataclass, field

from .context import (
    SpatialLayout,
    describe_position,
    distance_phrase,
    egocentric_sentence,
)
from .errors import (
    AskInFlight,
    EmptyQuestion,
    NetworkFailure,
    ProviderError,
    ProviderRejected,
    ProviderTimeout,
    SessionClosed,
)
from .geo import CanvasPoint, compass_bearing, sector_index, sector_word
from .osm import Zone, ZoneDataset
from .render import DEFAULT_STYLE, RenderStyle, screenshot_jpeg
from .session import ExplorationSession

CHAT_WINDOW = 20

SYSTEM_INSTRUCTION = (
    "You are a guide helping a blind user explore a haptic map. "
    "Answer spatial questions in egocentric terms relative to the user's cursor, "
    "for example 'to your northeast'. Keep answers concise, one to three sentences. "
    "Use zone names exactly as they appear in the spatial context, give distances "
    "in meters, and if the map data cannot answer a question, say so plainly."
)

FALLBACK_TEXT = (
    "Sorry, I could not reach the map assistant just now. Please ask again in a moment."
)

MOCK_CAPABILITIES = (
    "I can tell you where you are, what is around you, how to reach a named zone, "
    "which zone is bigger, or whether a zone is still in a given direction."
)


@dataclass
class ChatTurn:
    speaker: str  # user | agent
    text: str
    at: float
    cursor_at_ask: CanvasPoint | None = None
    is_error: bool = False

    def __post_init__(self):
        if not self.text:
            raise ValueError("chat turn text must be non-empty")

    def to_json_obj(self) -> dict:
        return {
            "speaker": self.speaker,
            "text": self.text,
            "at": self.at,
            "is_error": self.is_error,
        }


@dataclass(frozen=True)
class ProviderConfig:
    provider_kind: str = "mock_grounded"  # mock_grounded | remote_text_mediated
    endpoint: str = ""
    model_name: str = ""
    api_key: str = ""
    timeout_ms: int = 10_000
    mock_delay_ms: int = 0  # test/demo hook: artificial mock latency

    def validate(self) -> None:
        if self.provider_kind == "remote_text_mediated" and not (self.endpoint and self.api_key):
            raise ValueError("remote provider requires endpoint and api_key")
        if self.provider_kind not in ("mock_grounded", "remote_text_mediated"):
            raise ValueError(f"unknown provider kind {self.provider_kind!r}")


def provider_config_from_env() -> ProviderConfig:
    return ProviderConfig(
        provider_kind=os.environ.get("AGENT_PROVIDER", "mock_grounded"),
        endpoint=os.environ.get("AGENT_ENDPOINT", ""),
        model_name=os.environ.get("AGENT_MODEL", ""),
        api_key=os.environ.get("AGENT_API_KEY", ""),
    )


@dataclass
class PromptBundle:
    """The four-part multimodal prompt, ready for any provider."""

    system_instruction: str
    chat_log: tuple[ChatTurn, ...]
    visited_locations: str
    screenshot_jpeg: bytes = field(repr=False)
    current_zone_line: str
    spatial_layout: SpatialLayout
    user_question: str

    def context_text(self) -> str:
        lines = [
            f"Visited locations: {self.visited_locations}",
            self.current_zone_line,
            "Spatial layout (nearest zones):",
        ]
        lines.extend(self.spatial_layout.neighbor_lines or ("(none)",))
        lines.append(f"Question: {self.user_question}")
        return "\n".join(lines)

    def to_wire(self, model_name: str = "", include_screenshot: bool = True) -> dict:
        messages = [
            {
                "role": "system",
                "content": [{"type": "text", "text": self.system_instruction}],
            }
        ]
        for turn in self.chat_log:
            messages.append(
                {
                    "role": "user" if turn.speaker == "user" else "assistant",
                    "content": [{"type": "text", "text": turn.text}],
                }
            )
        content: list[dict] = []
        if include_screenshot and self.screenshot_jpeg:
            content.append(
                {
                    "type": "image_jpeg_base64",
                    "data": base64.b64encode(self.screenshot_jpeg).decode("ascii"),
                }
            )
        content.append({"type": "text", "text": self.context_text()})
        messages.append({"role": "user", "content": content})
        return {"model": model_name, "messages": messages}


def serialize_wire(wire: dict) -> bytes:
    """Canonical, byte-stable provider payload serialization."""
    return json.dumps(wire, ensure_ascii=False, sort_keys=True, separators=(",", ":")).encode("utf-8")


def visited_string(visited: list[tuple[int, str]]) -> str:
    if not visited:
        return "(none)"
    return "(" + ", ".join(f"{i}.{name}" for i, name in visited) + ")"


def build_prompt(
    session: ExplorationSession,
    question: str,
    *,
    style: RenderStyle = DEFAULT_STYLE,
    include_screenshot: bool = True,
) -> PromptBundle:
    if session.closed:
        raise SessionClosed(f"session {session.session_id} is closed")
    if not question or not question.strip():
        raise EmptyQuestion("question must be non-empty")
    layout = describe_position(session)
    shot = b""
    if include_screenshot:
        shot = screenshot_jpeg(session.dataset, session.projection, session.cursor, style)
    return PromptBundle(
        system_instruction=SYSTEM_INSTRUCTION,
        chat_log=tuple(session.chat_history[-CHAT_WINDOW:]),
        visited_locations=visited_string(session.visited),
        screenshot_jpeg=shot,
        current_zone_line=layout.current_zone_line,
        spatial_layout=layout,
        user_question=question,
    )


# == Grounded mock provider ==

_ARTICLE_RE = re.compile(r"^(?:the|a|an)\s+", re.I)
_DIRECTION_WORDS = {
    "north": 0, "n": 0, "northeast": 1, "ne": 1, "east": 2, "e": 2,
    "southeast": 3, "se": 3, "south": 4, "s": 4, "southwest": 5, "sw": 5,
    "west": 6, "w": 6, "northwest": 7, "nw": 7,
}
_DIR_PATTERN = "|".join(sorted(_DIRECTION_WORDS, key=len, reverse=True))

_CONFIRM_RE = re.compile(
    rf"\bis\s+(?P<target>.+?)\s+(?:still\s+)?(?:to|on|at)\s+(?:my|your)\s+(?P<dir>{_DIR_PATTERN})\b",
    re.I,
)
_GUIDE_RES = (
    re.compile(r"\bwhere\s+is\s+(?P<target>.+?)(?:\s+from\s+here)?\s*[?.!]*$", re.I),
    re.compile(r"\b(?:get|go|navigate)\s+to\s+(?P<target>.+?)\s*[?.!]*$", re.I),
    re.compile(r"\breach\s+(?P<target>.+?)\s*[?.!]*$", re.I),
    re.compile(r"\bhow\s+far\s+is\s+(?P<target>.+?)\s*[?.!]*$", re.I),
)
_IDENTIFY_RE = re.compile(
    r"\bwhere\s+am\s+i\b|\bwhat\s+am\s+i\s+(?:touching|on)\b|\bwhat\s+is\s+this\s*[?.!]*$", re.I
)
_AROUND_RE = re.compile(r"\baround\b|\bnearby\b|\bnear\s+me\b|\bsurround", re.I)
_CONTEXT_RE = re.compile(r"\bused\s+for\b|\btell\s+me\s+(?:more\s+)?about\b|\bwhat\s+kind\s+of\b", re.I)
_COMPARE_RE = re.compile(r"\bbigger\b|\blarger\b|\bsmaller\b", re.I)


def _strip_articles(text: str) -> str:
    return _ARTICLE_RE.sub("", text.strip()).strip()


def _find_zone(dataset: ZoneDataset, target: str) -> Zone | None:
    """Case-insensitive substring match; ties broken by shortest name."""
    needle = _strip_articles(target).lower().rstrip("?.! ")
    if not needle:
        return None
    hits = [z for z in dataset.zones if needle in z.name.lower()]
    if not hits:
        return None
    return min(hits, key=lambda z: (len(z.name), z.zone_id))


def _zones_mentioned(dataset: ZoneDataset, question: str) -> list[Zone]:
    q = question.lower()
    found: dict[str, tuple[int, int, Zone]] = {}
    for z in dataset.zones:
        pos = q.find(z.name.lower())
        if pos < 0 or z.name.lower().startswith("unnamed "):
            continue
        prev = found.get(z.name)
        if prev is None or (pos, -len(z.name)) < (prev[0], -prev[1]):
            found[z.name] = (pos, len(z.name), z)
    return [z for _, _, z in sorted(found.values(), key=lambda t: (t[0], -t[1]))]


def _cannot_find(target: str) -> str:
    return f"I can't find a {_strip_articles(target).rstrip('?.! ')} on this map."


def mock_respond(bundle: PromptBundle, session: ExplorationSession) -> str:
    """Deterministic keyword-routed answers grounded purely in geometry.

    Every direction and distance comes from the same helpers the spatial
    context uses, so the mock's claims re-parse to exactly the values the
    layout would report for the same cursor and target.
    """
    q = bundle.user_question.strip()
    dataset = session.dataset
    cursor_geo = session.projection.unproject(session.cursor)
    current = session.index.hit_test(session.cursor)

    m = _CONFIRM_RE.search(q)
    if m:
        zone = _find_zone(dataset, m.group("target"))
        if zone is None:
            return _cannot_find(m.group("target"))
        if zone.centroid_geo == cursor_geo:
            return f"You are right on {zone.name} now."
        bearing, _ = compass_bearing(cursor_geo, zone.centroid_geo)
        word = sector_word(bearing)
        from .geo import geo_distance_m

        phrase = distance_phrase(geo_distance_m(cursor_geo, zone.centroid_geo), "meters")
        wanted = _DIRECTION_WORDS[m.group("dir").lower()]
        if sector_index(bearing) == wanted:
            return f"Yes, {zone.name} is still to your {word}, {phrase} away."
        return f"No, {zone.name} is now to your {word}, {phrase} away."

    for pat in _GUIDE_RES:
        m = pat.search(q)
        if m:
            zone = _find_zone(dataset, m.group("target"))
            if zone is None:
                return _cannot_find(m.group("target"))
            if current is not None and zone.zone_id == current.zone_id:
                return f"You are already on {zone.name}."
            if zone.centroid_geo == cursor_geo:
                return f"You are right on {zone.name} now."
            bearing, _ = compass_bearing(cursor_geo, zone.centroid_geo)
            return (
                egocentric_sentence(zone, cursor_geo)
                + f" Move your finger to the {sector_word(bearing)} to reach it."
            )

    if _COMPARE_RE.search(q):
        answer = _compare_zones(q, dataset, session, cursor_geo, current)
        if answer:
            return answer

    if _AROUND_RE.search(q):
        neighbors = session.index.nearest_zones(session.cursor, 3)
        if not neighbors:
            return "There are no mapped zones near you."
        sentences = " ".join(egocentric_sentence(z, cursor_geo) for z, _, _, _ in neighbors)
        return f"Around you: {sentences}"

    if _CONTEXT_RE.search(q):
        mentioned = _zones_mentioned(dataset, q)
        zone = mentioned[0] if mentioned else current
        if zone is None:
            return "You are over an empty area, so there is nothing to describe here."
        tags = [
            f"{k}={v}"
            for k, v in sorted(zone.source_tags.items())
            if k != "name"
        ][:3]
        base = f"{zone.name} is a {zone.category.value} zone on this map."
        if tags:
            return base + " Its map tags include " + ", ".join(tags) + "."
        return base

    if _IDENTIFY_RE.search(q):
        if current is not None:
            return f"You are currently on {current.name} ({current.category.value})."
        neighbors = session.index.nearest_zones(session.cursor, 1)
        if neighbors:
            z, _, _, _ = neighbors[0]
            return f"You are over an empty area. {egocentric_sentence(z, cursor_geo)}"
        return "You are over an empty area."

    return MOCK_CAPABILITIES


def _compare_zones(q, dataset, session, cursor_geo, current) -> str | None:
    mentioned = _zones_mentioned(dataset, q)
    if len(mentioned) >= 2:
        z1, z2 = mentioned[0], mentioned[1]
    elif len(mentioned) == 1 and current is not None and mentioned[0].zone_id != current.zone_id:
        z1, z2 = mentioned[0], current
    else:
        base = mentioned[0] if mentioned else current
        neighbors = session.index.nearest_zones(session.cursor, 1)
        if base is None or not neighbors:
            return None
        z1, z2 = base, neighbors[0][0]
    bigger, smaller = (z1, z2) if z1.area_m2 >= z2.area_m2 else (z2, z1)
    pick, word = (smaller, "smaller") if (
        "smaller" in q.lower() and "bigger" not in q.lower() and "larger" not in q.lower()
    ) else (bigger, "bigger")
    other = z2 if pick is z1 else z1
    return (
        f"{pick.name} is {word}: it covers about {round(pick.area_m2)} square meters, "
        f"while {other.name} covers about {round(other.area_m2)}."
    )


# == Providers and ask ==


class MockGroundedProvider:
    def __init__(self, session: ExplorationSession, delay_ms: int = 0):
        self.session = session
        self.delay_ms = delay_ms

    def respond(self, bundle: PromptBundle) -> str:
        if self.delay_ms:
            time.sleep(self.delay_ms / 1000.0)
        return mock_respond(bundle, self.session)


class RemoteTextProvider:
    """Generic JSON chat-completions HTTP contract; response {"text": str}."""

    def __init__(self, config: ProviderConfig):
        config.validate()
        self.config = config

    def respond(self, bundle: PromptBundle) -> str:
        import requests

        wire = bundle.to_wire(self.config.model_name)
        try:
            resp = requests.post(
                self.config.endpoint,
                json=wire,
                headers={"Authorization": f"Bearer {self.config.api_key}"},
                timeout=self.config.timeout_ms / 1000.0,
            )
        except requests.Timeout as exc:
            raise ProviderTimeout(str(exc)) from exc
        except requests.RequestException as exc:
            raise NetworkFailure(str(exc)) from exc
        if resp.status_code != 200:
            raise ProviderRejected(f"provider HTTP {resp.status_code}")
        try:
            return str(resp.json()["text"])
        except Exception as exc:
            raise ProviderRejected(f"provider response missing 'text': {exc}") from exc


def provider_for(config: ProviderConfig, session: ExplorationSession):
    config.validate()
    if config.provider_kind == "mock_grounded":
        return MockGroundedProvider(session, delay_ms=config.mock_delay_ms)
    return RemoteTextProvider(config)


_REMOTE_RETRIES = 2
_RETRY_BACKOFF_S = 0.25


def ask(
    session: ExplorationSession,
    question: str,
    config: ProviderConfig | None = None,
    provider=None,
    *,
    style: RenderStyle = DEFAULT_STYLE,
) -> ChatTurn:
    """Build the prompt, dispatch, and thread both turns into history.

    Read-only with respect to spatial state; on provider failure after
    retries the agent turn is an apologetic fallback flagged is_error, and
    history still gains exactly the user turn and that fallback turn.
    """
    config = config or ProviderConfig()
    if provider is None:
        provider = provider_for(config, session)
    with session._chat_lock:
        if session._ask_in_flight:
            raise AskInFlight(f"session {session.session_id} already has an ask pending")
        session._ask_in_flight = True
    try:
        bundle = build_prompt(session, question, style=style)
        user_turn = ChatTurn("user", question, at=session.clock(), cursor_at_ask=session.cursor)
        is_error = False
        attempts = 1 if isinstance(provider, MockGroundedProvider) else _REMOTE_RETRIES
        text = None
        for attempt in range(attempts):
            try:
                text = provider.respond(bundle)
                break
            except (ProviderError, NetworkFailure):
                if attempt < attempts - 1:
                    time.sleep(_RETRY_BACKOFF_S)
        if text is None:
            text = FALLBACK_TEXT
            is_error = True
        agent_turn = ChatTurn("agent", text, at=session.clock(), is_error=is_error)
        with session._chat_lock:
            session.chat_history.append(user_turn)
            session.chat_history.append(agent_turn)
        return agent_turn
    finally:
        with session._chat_lock:
            session._ask_in_flight = False
