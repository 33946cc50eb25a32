"""Audio-haptic map exploration engine.

Turns OpenStreetMap data for a requested location into touchable haptic
zones on a uniform-scale canvas, tracks cursor exploration with vibrotactile
and spoken feedback, and answers open-ended spatial questions through a
conversational agent grounded in a multimodal prompt.
"""

from .agent import (
    ChatTurn,
    PromptBundle,
    ProviderConfig,
    SYSTEM_INSTRUCTION,
    ask,
    build_prompt,
    mock_respond,
)
from .context import SpatialLayout, describe_position, egocentric_sentence
from .errors import HapticMapError
from .geo import (
    CanvasPoint,
    CanvasProjection,
    EARTH_RADIUS_M,
    compass_bearing,
    geo_distance_m,
    polygon_centroid_area,
)
from .index import SpatialIndex
from .osm import (
    OverpassClient,
    PlaceQuery,
    RawFeature,
    Zone,
    ZoneCategory,
    ZoneDataset,
    build_dataset,
    classify,
    resolve_place,
)
from .render import RenderStyle, encode_jpeg, render_canvas
from .session import (
    ExplorationSession,
    FeedbackEvent,
    HapticConfig,
    HapticPattern,
    haptic_for,
)

__version__ = "0.1.0"

__all__ = [
    "ChatTurn", "PromptBundle", "ProviderConfig", "SYSTEM_INSTRUCTION",
    "ask", "build_prompt", "mock_respond",
    "SpatialLayout", "describe_position", "egocentric_sentence",
    "HapticMapError",
    "CanvasPoint", "CanvasProjection", "EARTH_RADIUS_M",
    "compass_bearing", "geo_distance_m", "polygon_centroid_area",
    "SpatialIndex",
    "OverpassClient", "PlaceQuery", "RawFeature", "Zone", "ZoneCategory",
    "ZoneDataset", "build_dataset", "classify", "resolve_place",
    "RenderStyle", "encode_jpeg", "render_canvas",
    "ExplorationSession", "FeedbackEvent", "HapticConfig", "HapticPattern",
    "haptic_for",
    "__version__",
]
