"""Geodesic and canvas-projection math.

Everything here works at neighborhood scale (a few hundred meters around a
query center), where a local equirectangular plane is accurate to well under
0.5% against great-circle distances. Pixel distances on the canvas map to
real-world meters with uniform scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateBearing, DegenerateGeometry

EARTH_RADIUS_M = 6_371_000.0
_DEG = math.pi / 180.0

# Eight half-open 45-degree arcs, clockwise from north. The boundary angle
# (e.g. 22.5) resolves to the clockwise-later sector (NE).
SECTOR_CODES = ("N", "NE", "E", "SE", "S", "SW", "W", "NW")
SECTOR_WORDS = (
    "north", "northeast", "east", "southeast",
    "south", "southwest", "west", "northwest",
)

LatLon = tuple[float, float]


@dataclass(frozen=True)
class CanvasPoint:
    """Pixel position: x grows eastward (right), y grows southward (down)."""

    x: float
    y: float


@dataclass(frozen=True)
class CanvasProjection:
    """Uniform meters-per-pixel mapping between geographic and pixel space.

    Local equirectangular projection around ``center_geo``: exact uniform
    scale at neighborhood extents, unlike Mercator whose scale drifts with
    latitude. Defaults (800 px at 1 m/px) inscribe a 400 m-radius disc.
    """

    center_geo: LatLon
    meters_per_pixel: float = 1.0
    width_px: int = 800
    height_px: int = 800

    def __post_init__(self):
        if self.meters_per_pixel <= 0:
            raise ValueError("meters_per_pixel must be > 0")

    @property
    def _lon_scale(self) -> float:
        return math.cos(self.center_geo[0] * _DEG)

    def project(self, p: LatLon) -> CanvasPoint:
        lat0, lon0 = self.center_geo
        x = self.width_px / 2 + (
            EARTH_RADIUS_M * (p[1] - lon0) * _DEG * self._lon_scale
        ) / self.meters_per_pixel
        y = self.height_px / 2 - (
            EARTH_RADIUS_M * (p[0] - lat0) * _DEG
        ) / self.meters_per_pixel
        return CanvasPoint(x, y)

    def unproject(self, p: CanvasPoint) -> LatLon:
        lat0, lon0 = self.center_geo
        lat = lat0 + (self.height_px / 2 - p.y) * self.meters_per_pixel / (
            EARTH_RADIUS_M * _DEG
        )
        lon = lon0 + (p.x - self.width_px / 2) * self.meters_per_pixel / (
            EARTH_RADIUS_M * _DEG * self._lon_scale
        )
        return (lat, lon)

    def project_ring(self, ring: list[LatLon]) -> np.ndarray:
        """Project a ring to an (N, 2) array of canvas x, y."""
        arr = np.asarray(ring, dtype=float)
        lat0, lon0 = self.center_geo
        k = EARTH_RADIUS_M * _DEG / self.meters_per_pixel
        x = self.width_px / 2 + (arr[:, 1] - lon0) * k * self._lon_scale
        y = self.height_px / 2 - (arr[:, 0] - lat0) * k
        return np.column_stack([x, y])

    def contains(self, p: CanvasPoint) -> bool:
        return 0 <= p.x <= self.width_px and 0 <= p.y <= self.height_px


@dataclass
class ProjectedZone:
    """A zone's rings in canvas space, plus its tight outer-ring bbox."""

    zone_ref: str
    canvas_rings: list[np.ndarray] = field(repr=False)
    canvas_centroid: CanvasPoint = None
    bbox: tuple[float, float, float, float] = None  # min_x, min_y, max_x, max_y


def geo_distance_m(a: LatLon, b: LatLon) -> float:
    """Haversine great-circle distance in meters (spherical earth)."""
    lat1, lon1 = a
    lat2, lon2 = b
    p1 = lat1 * _DEG
    p2 = lat2 * _DEG
    dp = (lat2 - lat1) * _DEG
    dl = (lon2 - lon1) * _DEG
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def local_offsets_m(origin: LatLon, p: LatLon) -> tuple[float, float]:
    """(east, north) meters from origin to p on the local plane.

    Uses the mean latitude for the east scale so that offsets are exactly
    antisymmetric under swapping origin and p.
    """
    mean_lat = (origin[0] + p[0]) / 2.0
    east = EARTH_RADIUS_M * (p[1] - origin[1]) * _DEG * math.cos(mean_lat * _DEG)
    north = EARTH_RADIUS_M * (p[0] - origin[0]) * _DEG
    return east, north


def sector_index(bearing_deg: float) -> int:
    """Index 0..7 (N..NW) for a bearing; boundaries go to the later sector."""
    return int(((bearing_deg + 22.5) % 360.0) // 45.0)


def sector_code(bearing_deg: float) -> str:
    return SECTOR_CODES[sector_index(bearing_deg)]


def sector_word(bearing_deg: float) -> str:
    return SECTOR_WORDS[sector_index(bearing_deg)]


def compass_bearing(from_p: LatLon, to_p: LatLon) -> tuple[float, str]:
    """Bearing in [0, 360) and its 8-sector code, local-plane atan2(E, N)."""
    if from_p == to_p:
        raise DegenerateBearing(f"bearing undefined from a point to itself: {from_p}")
    east, north = local_offsets_m(from_p, to_p)
    theta = math.degrees(math.atan2(east, north)) % 360.0
    return theta, sector_code(theta)


def _ring_signed_area_centroid(xy: np.ndarray) -> tuple[float, float, float]:
    """Signed shoelace area and centroid of one ring in plane coordinates."""
    x = xy[:, 0]
    y = xy[:, 1]
    x2 = np.roll(x, -1)
    y2 = np.roll(y, -1)
    cross = x * y2 - x2 * y
    area = 0.5 * float(np.sum(cross))
    if abs(area) < 1e-12:
        return area, float(np.mean(x)), float(np.mean(y))
    cx = float(np.sum((x + x2) * cross)) / (6.0 * area)
    cy = float(np.sum((y + y2) * cross)) / (6.0 * area)
    return area, cx, cy


def _close_ring(ring: list[LatLon]) -> list[LatLon]:
    if ring and ring[0] == ring[-1]:
        return list(ring[:-1])
    return list(ring)


def polygon_centroid_area(rings: list[list[LatLon]]) -> tuple[LatLon, float]:
    """Area centroid (lat, lon) and area in m² of outer ring minus holes.

    Rings are geographic; shoelace runs on a local plane anchored at the
    outer ring's vertex mean. Raises DegenerateGeometry below 1e-6 m².
    """
    if not rings or len(rings[0]) < 3:
        raise DegenerateGeometry("outer ring needs at least 3 vertices")
    outer = _close_ring(rings[0])
    origin = (
        sum(p[0] for p in outer) / len(outer),
        sum(p[1] for p in outer) / len(outer),
    )
    k = EARTH_RADIUS_M * _DEG
    lon_scale = math.cos(origin[0] * _DEG)

    def to_plane(ring: list[LatLon]) -> np.ndarray:
        arr = np.asarray(ring, dtype=float)
        east = (arr[:, 1] - origin[1]) * k * lon_scale
        north = (arr[:, 0] - origin[0]) * k
        return np.column_stack([east, north])

    a_out, cx, cy = _ring_signed_area_centroid(to_plane(outer))
    area = abs(a_out)
    wx, wy = area * cx, area * cy
    for hole in rings[1:]:
        h = _close_ring(hole)
        if len(h) < 3:
            continue
        a_h, hx, hy = _ring_signed_area_centroid(to_plane(h))
        area -= abs(a_h)
        wx -= abs(a_h) * hx
        wy -= abs(a_h) * hy
    if area < 1e-6:
        raise DegenerateGeometry(f"polygon area {area} m² below threshold")
    cx, cy = wx / area, wy / area
    centroid = (
        origin[0] + cy / k,
        origin[1] + cx / (k * lon_scale),
    )
    return centroid, area


def point_to_ring_distance_m(center: LatLon, ring: list[LatLon]) -> float:
    """Distance in meters from a point to a closed ring (0 if inside)."""
    pts = _close_ring(ring)
    if len(pts) < 3:
        raise DegenerateGeometry("ring needs at least 3 vertices")
    k = EARTH_RADIUS_M * _DEG
    lon_scale = math.cos(center[0] * _DEG)
    arr = np.asarray(pts, dtype=float)
    ex = (arr[:, 1] - center[1]) * k * lon_scale
    ny = (arr[:, 0] - center[0]) * k
    xy = np.column_stack([ex, ny])
    if _point_in_ring_plane(0.0, 0.0, xy):
        return 0.0
    return _min_segment_distance(0.0, 0.0, xy)


def point_to_polyline_distance_m(center: LatLon, verts: list[LatLon]) -> float:
    """Distance in meters from a point to an open vertex chain."""
    if len(verts) == 1:
        return geo_distance_m(center, verts[0])
    k = EARTH_RADIUS_M * _DEG
    lon_scale = math.cos(center[0] * _DEG)
    arr = np.asarray(verts, dtype=float)
    ex = (arr[:, 1] - center[1]) * k * lon_scale
    ny = (arr[:, 0] - center[0]) * k
    xy = np.column_stack([ex, ny])[:-1]
    nxt = np.column_stack([ex, ny])[1:]
    return _min_open_segment_distance(0.0, 0.0, xy, nxt)


def _point_in_ring_plane(px: float, py: float, xy: np.ndarray) -> bool:
    x = xy[:, 0]
    y = xy[:, 1]
    xj = np.roll(x, 1)
    yj = np.roll(y, 1)
    cond = (y > py) != (yj > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xin = (xj - x) * (py - y) / (yj - y) + x
    hits = cond & (px < xin)
    return bool(np.count_nonzero(hits) % 2)


def _min_segment_distance(px: float, py: float, xy: np.ndarray) -> float:
    return _min_open_segment_distance(px, py, xy, np.roll(xy, -1, axis=0))


def _min_open_segment_distance(px: float, py: float, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    ap = np.array([px, py]) - a
    denom = np.einsum("ij,ij->i", ab, ab)
    t = np.clip(np.divide(np.einsum("ij,ij->i", ap, ab), np.where(denom == 0, 1, denom)), 0, 1)
    closest = a + ab * t[:, None]
    d = np.hypot(closest[:, 0] - px, closest[:, 1] - py)
    return float(np.min(d))
