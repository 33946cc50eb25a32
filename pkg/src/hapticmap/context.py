"""Egocentric textual spatial context: current zone plus the nearest-10 layout.

Two registers share the same geometry: short sector codes ("SE") in the
prompt layout lines, full sector words ("southeast") in speech sentences.
Distances round to the nearest 10 m, half up; sub-5 m distances read
"under 10 m" instead of "about 0 m".
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import EmptyDataset
from .geo import compass_bearing, geo_distance_m, sector_word
from .osm import Zone

EMPTY_AREA_LINE = "You are over an empty area"

NEIGHBOR_LINE_RE = re.compile(
    r"^- (?P<name>.+) \((?P<category>building|park|water|other_area)\) is to your "
    r"(?P<sector>N|NE|E|SE|S|SW|W|NW) (?:about (?P<dist>\d+) m|under 10 m) away$"
)


@dataclass(frozen=True)
class SpatialLayout:
    """Current-zone line plus <= 10 neighbor lines ordered by distance."""

    current_zone_line: str
    neighbor_lines: tuple[str, ...]

    def as_text(self) -> str:
        lines = [self.current_zone_line]
        if self.neighbor_lines:
            lines.append("Nearest zones with direction and distance:")
            lines.extend(self.neighbor_lines)
        return "\n".join(lines)


def round_distance_10(meters: float) -> int:
    """Nearest multiple of 10, half up (65.0 -> 70, 64.9 -> 60)."""
    return int(math.floor(meters / 10.0 + 0.5)) * 10


def distance_phrase(meters: float, unit: str = "m") -> str:
    d = round_distance_10(meters)
    if d == 0:
        return f"under 10 {unit}"
    return f"about {d} {unit}"


def neighbor_line(zone: Zone, distance_m: float, sector: str) -> str:
    return f"- {zone.name} ({zone.category.value}) is to your {sector} {distance_phrase(distance_m)} away"


def describe_position(session) -> SpatialLayout:
    """Layout at the session's cursor; pure in (dataset, cursor)."""
    if not session.dataset.zones:
        raise EmptyDataset("no zones to describe")
    zone_id = session.current_zone
    if zone_id is not None:
        zone = session.dataset.zone_by_id(zone_id)
        current = f"Current zone: {zone.name} ({zone.category.value})"
    else:
        current = EMPTY_AREA_LINE
    lines = tuple(
        neighbor_line(z, dist, sector)
        for z, dist, sector, _ in session.index.nearest_zones(session.cursor, 10)
    )
    return SpatialLayout(current_zone_line=current, neighbor_lines=lines)


def egocentric_sentence(zone: Zone, from_cursor_geo) -> str:
    """Speech-register sentence: '<name> is to your southeast, about 60 meters away.'"""
    bearing, _ = compass_bearing(from_cursor_geo, zone.centroid_geo)
    dist = geo_distance_m(from_cursor_geo, zone.centroid_geo)
    return (
        f"{zone.name} is to your {sector_word(bearing)}, "
        f"{distance_phrase(dist, unit='meters')} away."
    )
