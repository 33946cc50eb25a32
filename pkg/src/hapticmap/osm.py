"""OpenStreetMap retrieval and zone-dataset construction.

Fetches raw ways/relations around a center through the Overpass HTTP API
(or a bundled fixture), assembles closed polygon rings (including
multipolygon relations with holes), classifies them into the haptic
category taxonomy, and drops point-only and linear features such as trails.
Disk-cached responses keep repeat queries offline and deterministic.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from importlib import resources
from pathlib import Path

from .errors import (
    DegenerateGeometry,
    GeocodeFailure,
    MalformedResponse,
    NetworkFailure,
    OverpassRateLimited,
)
from .geo import LatLon, point_to_ring_distance_m, polygon_centroid_area

logger = logging.getLogger(__name__)

DEFAULT_RADIUS_M = 400.0
DEFAULT_OVERPASS_URL = "https://overpass-api.de/api/interpreter"
DEFAULT_NOMINATIM_URL = "https://nominatim.openstreetmap.org/search"
USER_AGENT = "hapticmap/0.1 (audio-haptic map engine)"

# Bit-exact Overpass QL template; {R}/{LAT}/{LON} substituted per query.
OVERPASS_QL = (
    '[out:json][timeout:60];('
    'way(around:{R},{LAT},{LON})["building"];'
    'way(around:{R},{LAT},{LON})["leisure"];'
    'way(around:{R},{LAT},{LON})["natural"];'
    'way(around:{R},{LAT},{LON})["landuse"];'
    'way(around:{R},{LAT},{LON})["amenity"];'
    'way(around:{R},{LAT},{LON})["water"];'
    'relation(around:{R},{LAT},{LON})["type"="multipolygon"];'
    ');out geom;'
)

_PARK_LEISURE = {"park", "garden", "playground"}
_PARK_LANDUSE = {"grass", "recreation_ground"}
_AREA_KEYS = ("leisure", "landuse", "amenity", "natural", "water")

# Bundled offline fixtures: name -> (resource file, default center).
BUNDLED_FIXTURES: dict[str, tuple[str, LatLon]] = {
    "seattle_center": ("seattle_center.json", (47.6205, -122.3493)),
}


class ZoneCategory(str, Enum):
    BUILDING = "building"
    PARK = "park"
    WATER = "water"
    OTHER_AREA = "other_area"


#: Sentinel returned by classify() for point-only / linear features.
EXCLUDED = "excluded"


@dataclass(frozen=True)
class PlaceQuery:
    """A location request: free text, explicit coordinates, or both."""

    query_text: str = ""
    center: LatLon | None = None
    radius_m: float = DEFAULT_RADIUS_M

    def __post_init__(self):
        if self.radius_m <= 0:
            raise ValueError("radius_m must be > 0")
        if self.center is not None:
            lat, lon = self.center
            if not (-90 <= lat <= 90 and -180 <= lon <= 180):
                raise ValueError(f"coordinates out of range: {self.center}")


@dataclass
class RawFeature:
    """One Overpass element with its geometry kept as vertex lists.

    ``geometry`` holds one vertex list per member: a single list for ways,
    one list per member way for relations (roles aligned in
    ``member_roles``), and a single one-vertex list for nodes.
    """

    osm_id: int
    feature_kind: str  # node | way | relation
    tags: dict[str, str]
    geometry: list[list[LatLon]]
    member_roles: list[str] | None = None


@dataclass(eq=False)
class Zone:
    """A named, categorized polygonal map feature in geographic space."""

    zone_id: str
    name: str
    category: ZoneCategory
    geo_rings: list[list[LatLon]]  # outer ring first, then hole rings
    centroid_geo: LatLon
    area_m2: float
    source_tags: dict[str, str] = field(default_factory=dict)

    @property
    def outer_ring(self) -> list[LatLon]:
        return self.geo_rings[0]

    @property
    def holes(self) -> list[list[LatLon]]:
        return self.geo_rings[1:]


@dataclass(eq=False)
class ZoneDataset:
    """Immutable-after-build set of zones around a query center."""

    center: LatLon
    radius_m: float
    zones: list[Zone]
    fetched_at: str
    source: str  # overpass | fixture

    def zone_by_id(self, zone_id: str) -> Zone | None:
        for z in self.zones:
            if z.zone_id == zone_id:
                return z
        return None

    def to_json_obj(self) -> dict:
        return {
            "center": [self.center[0], self.center[1]],
            "radius_m": self.radius_m,
            "fetched_at": self.fetched_at,
            "source": self.source,
            "zones": [
                {
                    "zone_id": z.zone_id,
                    "name": z.name,
                    "category": z.category.value,
                    "outer_ring": [[p[0], p[1]] for p in z.outer_ring],
                    "holes": [[[p[0], p[1]] for p in h] for h in z.holes],
                    "centroid": [z.centroid_geo[0], z.centroid_geo[1]],
                    "area_m2": z.area_m2,
                    "tags": dict(sorted(z.source_tags.items())),
                }
                for z in self.zones
            ],
        }

    def to_json_bytes(self) -> bytes:
        return json.dumps(self.to_json_obj(), ensure_ascii=False, indent=1).encode("utf-8")

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_bytes(self.to_json_bytes())
        return path

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ZoneDataset":
        zones = []
        for zo in obj["zones"]:
            rings = [[(p[0], p[1]) for p in zo["outer_ring"]]]
            rings += [[(p[0], p[1]) for p in h] for h in zo.get("holes", [])]
            zones.append(
                Zone(
                    zone_id=zo["zone_id"],
                    name=zo["name"],
                    category=ZoneCategory(zo["category"]),
                    geo_rings=rings,
                    centroid_geo=(zo["centroid"][0], zo["centroid"][1]),
                    area_m2=zo["area_m2"],
                    source_tags=zo.get("tags", {}),
                )
            )
        return cls(
            center=(obj["center"][0], obj["center"][1]),
            radius_m=obj["radius_m"],
            zones=zones,
            fetched_at=obj["fetched_at"],
            source=obj["source"],
        )

    @classmethod
    def load(cls, path: str | Path) -> "ZoneDataset":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_obj(json.load(fh))


def classify(tags: dict[str, str]) -> ZoneCategory | str:
    """Map OSM tags to a zone category, or EXCLUDED for non-area features.

    Total function: any tag dict gets an answer. Linear/point tag families
    (highway=path and friends) carry none of the area keys and fall through
    to EXCLUDED; geometry-based exclusion happens separately in
    build_dataset.
    """
    for key, value in tags.items():
        if key == "building" or key.startswith("building:"):
            if value != "no":
                return ZoneCategory.BUILDING
    if tags.get("leisure") in _PARK_LEISURE or tags.get("landuse") in _PARK_LANDUSE:
        return ZoneCategory.PARK
    if tags.get("natural") == "water" or "water" in tags or tags.get("landuse") == "reservoir":
        return ZoneCategory.WATER
    if any(k in tags for k in _AREA_KEYS):
        return ZoneCategory.OTHER_AREA
    return EXCLUDED


def parse_overpass(payload: dict | str | bytes) -> list[RawFeature]:
    """Parse an Overpass ``out geom`` JSON response into RawFeatures."""
    if isinstance(payload, (str, bytes)):
        try:
            payload = json.loads(payload)
        except json.JSONDecodeError as exc:
            raise MalformedResponse(f"Overpass response is not JSON: {exc}") from exc
    if not isinstance(payload, dict) or "elements" not in payload:
        raise MalformedResponse("Overpass response missing 'elements'")
    features: list[RawFeature] = []
    for el in payload["elements"]:
        kind = el.get("type")
        tags = el.get("tags", {}) or {}
        if kind == "node":
            if "lat" not in el or "lon" not in el:
                continue
            features.append(
                RawFeature(el["id"], "node", tags, [[(el["lat"], el["lon"])]])
            )
        elif kind == "way":
            geom = el.get("geometry") or []
            verts = [(g["lat"], g["lon"]) for g in geom]
            if len(verts) < 2:
                continue
            features.append(RawFeature(el["id"], "way", tags, [verts]))
        elif kind == "relation":
            member_geoms: list[list[LatLon]] = []
            roles: list[str] = []
            for m in el.get("members", []):
                geom = m.get("geometry") or []
                verts = [(g["lat"], g["lon"]) for g in geom]
                if len(verts) < 2:
                    continue
                member_geoms.append(verts)
                roles.append(m.get("role", "outer"))
            if member_geoms:
                features.append(
                    RawFeature(el["id"], "relation", tags, member_geoms, roles)
                )
    return features


def _dedupe_closed(verts: list[LatLon]) -> list[LatLon] | None:
    """Closed input ring -> open vertex list with >= 3 distinct points."""
    if len(verts) < 4 or verts[0] != verts[-1]:
        return None
    ring = verts[:-1]
    distinct = []
    for v in ring:
        if not distinct or v != distinct[-1]:
            distinct.append(v)
    if len(set(distinct)) < 3:
        return None
    return distinct


def _stitch_rings(segments: list[list[LatLon]]) -> list[list[LatLon]]:
    """Join member way segments end-to-end into closed rings.

    Members already closed stand alone; open members are chained by matching
    endpoints (reversing where needed). Unclosable leftovers are dropped and
    logged, never fatal.
    """
    rings: list[list[LatLon]] = []
    open_segs: list[list[LatLon]] = []
    for seg in segments:
        if len(seg) >= 4 and seg[0] == seg[-1]:
            rings.append(seg)
        else:
            open_segs.append(list(seg))
    while open_segs:
        chain = open_segs.pop(0)
        progress = True
        while chain[0] != chain[-1] and progress:
            progress = False
            for i, seg in enumerate(open_segs):
                if seg[0] == chain[-1]:
                    chain.extend(seg[1:])
                elif seg[-1] == chain[-1]:
                    chain.extend(reversed(seg[:-1]))
                elif seg[-1] == chain[0]:
                    chain[:0] = seg[:-1]
                elif seg[0] == chain[0]:
                    chain[:0] = reversed(seg[1:])
                else:
                    continue
                open_segs.pop(i)
                progress = True
                break
        if len(chain) >= 4 and chain[0] == chain[-1]:
            rings.append(chain)
        else:
            logger.warning("dropping unclosable relation member chain (%d vertices)", len(chain))
    return rings


def _ring_contains_point(ring: list[LatLon], p: LatLon) -> bool:
    inside = False
    n = len(ring)
    j = n - 1
    for i in range(n):
        yi, xi = ring[i]
        yj, xj = ring[j]
        if (yi > p[0]) != (yj > p[0]) and p[1] < (xj - xi) * (p[0] - yi) / (yj - yi) + xi:
            inside = not inside
        j = i
    return inside


def build_dataset(
    features: list[RawFeature],
    center: LatLon,
    radius_m: float,
    *,
    fetched_at: str | None = None,
    source: str = "overpass",
) -> ZoneDataset:
    """Assemble categorized polygon zones from raw features.

    Point features and open polylines are dropped; multipolygon relations
    become one zone per outer ring with their holes attached; zones whose
    outer ring does not intersect the radius disc are dropped (retained
    zones are kept whole, never clipped). Output ordering is deterministic
    (sorted by zone_id).
    """
    if fetched_at is None:
        fetched_at = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    zones: list[Zone] = []
    for feat in features:
        category = classify(feat.tags)
        if category == EXCLUDED or feat.feature_kind == "node":
            continue
        candidate_rings: list[tuple[str, list[list[LatLon]]]] = []
        if feat.feature_kind == "way":
            ring = _dedupe_closed(feat.geometry[0])
            if ring is None:
                continue  # open polyline or degenerate
            candidate_rings.append((f"way/{feat.osm_id}", [ring]))
        else:  # relation
            roles = feat.member_roles or ["outer"] * len(feat.geometry)
            outers = _stitch_rings(
                [g for g, r in zip(feat.geometry, roles) if r != "inner"]
            )
            inners = _stitch_rings(
                [g for g, r in zip(feat.geometry, roles) if r == "inner"]
            )
            outer_rings = [r for r in (_dedupe_closed(o) for o in outers) if r]
            inner_rings = [r for r in (_dedupe_closed(i) for i in inners) if r]
            for k, outer in enumerate(sorted(outer_rings, key=lambda r: r[0])):
                holes = [h for h in inner_rings if _ring_contains_point(outer, h[0])]
                suffix = "" if len(outer_rings) == 1 else f"#{k}"
                candidate_rings.append((f"relation/{feat.osm_id}{suffix}", [outer] + holes))
        for zone_id, rings in candidate_rings:
            try:
                centroid, area = polygon_centroid_area(rings)
            except DegenerateGeometry as exc:
                logger.warning("dropping degenerate geometry %s: %s", zone_id, exc)
                continue
            if point_to_ring_distance_m(center, rings[0]) > radius_m:
                continue
            name = feat.tags.get("name") or f"unnamed {category.value}"
            zones.append(
                Zone(
                    zone_id=zone_id,
                    name=name,
                    category=category,
                    geo_rings=rings,
                    centroid_geo=centroid,
                    area_m2=area,
                    source_tags=dict(feat.tags),
                )
            )
    zones.sort(key=lambda z: z.zone_id)
    seen: set[str] = set()
    for z in zones:
        if z.zone_id in seen:
            raise MalformedResponse(f"duplicate zone_id {z.zone_id}")
        seen.add(z.zone_id)
    return ZoneDataset(center=center, radius_m=radius_m, zones=zones,
                       fetched_at=fetched_at, source=source)


# == Overpass client with disk cache ==


def _requests_transport(url: str, ql: str, timeout_s: float) -> str:
    import requests

    try:
        resp = requests.post(
            url, data={"data": ql}, headers={"User-Agent": USER_AGENT}, timeout=timeout_s
        )
    except requests.RequestException as exc:
        raise NetworkFailure(f"Overpass unreachable at {url}: {exc}") from exc
    if resp.status_code in (429, 504):
        raise OverpassRateLimited(f"Overpass busy (HTTP {resp.status_code})")
    if resp.status_code != 200:
        raise NetworkFailure(f"Overpass HTTP {resp.status_code}")
    return resp.text


class OverpassClient:
    """Fetches and disk-caches raw Overpass responses.

    Cache entries are keyed by (lat, lon, radius) rounded to 1e-4 degrees
    and kept indefinitely; pass refresh=True to force a refetch.
    """

    def __init__(self, url: str | None = None, cache_dir: str | Path | None = None,
                 transport=None, timeout_s: float = 90.0, max_retries: int = 3):
        import os

        self.url = url or os.environ.get("OVERPASS_URL", DEFAULT_OVERPASS_URL)
        self.cache_dir = Path(cache_dir) if cache_dir else Path.home() / ".cache" / "hapticmap" / "overpass"
        self.transport = transport or _requests_transport
        self.timeout_s = timeout_s
        self.max_retries = max_retries

    def cache_path(self, center: LatLon, radius_m: float) -> Path:
        lat, lon = round(center[0], 4), round(center[1], 4)
        return self.cache_dir / f"around_{lat:.4f}_{lon:.4f}_{radius_m:g}.json"

    def fetch_raw(self, center: LatLon, radius_m: float, *, refresh: bool = False) -> list[RawFeature]:
        if not (-90 <= center[0] <= 90 and -180 <= center[1] <= 180):
            raise ValueError(f"coordinates out of range: {center}")
        if radius_m <= 0:
            raise ValueError("radius_m must be > 0")
        path = self.cache_path(center, radius_m)
        if path.exists() and not refresh:
            return parse_overpass(path.read_text(encoding="utf-8"))
        ql = OVERPASS_QL.format(R=f"{radius_m:g}", LAT=repr(center[0]), LON=repr(center[1]))
        text = self._fetch_with_backoff(ql)
        features = parse_overpass(text)  # validate before caching
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        return features

    def _fetch_with_backoff(self, ql: str) -> str:
        delay = 1.0
        for attempt in range(self.max_retries):
            try:
                return self.transport(self.url, ql, self.timeout_s)
            except OverpassRateLimited:
                if attempt == self.max_retries - 1:
                    raise
                time.sleep(delay)
                delay *= 2
        raise NetworkFailure("unreachable")  # pragma: no cover


# == Geocoding ==


def _nominatim_geocoder(text: str) -> LatLon:
    import requests

    try:
        resp = requests.get(
            DEFAULT_NOMINATIM_URL,
            params={"q": text, "format": "json", "limit": 1},
            headers={"User-Agent": USER_AGENT},
            timeout=30,
        )
    except requests.RequestException as exc:
        raise NetworkFailure(f"geocoder unreachable: {exc}") from exc
    if resp.status_code != 200:
        raise NetworkFailure(f"geocoder HTTP {resp.status_code}")
    hits = resp.json()
    if not hits:
        raise GeocodeFailure(f"no geocoder hit for {text!r}")
    return (float(hits[0]["lat"]), float(hits[0]["lon"]))


class FixtureGeocoder:
    """Offline geocoder over a pinned name -> coordinates table."""

    def __init__(self, table: dict[str, LatLon] | None = None):
        if table is None:
            with resources.files("hapticmap.fixtures").joinpath("geocode_fixture.json").open(
                encoding="utf-8"
            ) as fh:
                raw = json.load(fh)
            table = {k: (v[0], v[1]) for k, v in raw.items()}
        self.table = {k.strip().lower(): v for k, v in table.items()}

    def __call__(self, text: str) -> LatLon:
        hit = self.table.get(text.strip().lower())
        if hit is None:
            raise GeocodeFailure(f"no fixture geocode entry for {text!r}")
        return hit


def resolve_place(query: PlaceQuery, geocoder=None) -> LatLon:
    """Explicit coordinates pass through; otherwise geocode the text."""
    if query.center is not None:
        return query.center
    if not query.query_text.strip():
        raise GeocodeFailure("place query has neither text nor coordinates")
    geocoder = geocoder or _nominatim_geocoder
    return geocoder(query.query_text)


# == Fixture loading ==


def fixture_path(name_or_path: str | Path) -> Path:
    """Resolve a bundled fixture name or a filesystem path."""
    if str(name_or_path) in BUNDLED_FIXTURES:
        res = resources.files("hapticmap.fixtures").joinpath(
            BUNDLED_FIXTURES[str(name_or_path)][0]
        )
        with resources.as_file(res) as p:
            return Path(p)
    p = Path(name_or_path)
    if not p.exists():
        raise FileNotFoundError(f"no such fixture: {name_or_path}")
    return p


def load_fixture_features(
    name_or_path: str | Path, center: LatLon | None = None, radius_m: float | None = None
) -> list[RawFeature]:
    """Load raw features from a fixture, emulating Overpass `around` filtering.

    When center/radius are given, features farther than radius_m from the
    center (minimum distance to any geometry segment) are dropped, matching
    what a live around-query would have returned.
    """
    path = fixture_path(name_or_path)
    features = parse_overpass(path.read_text(encoding="utf-8"))
    if center is None or radius_m is None:
        return features
    kept = []
    for feat in features:
        if _feature_within(feat, center, radius_m):
            kept.append(feat)
    return kept


def _feature_within(feat: RawFeature, center: LatLon, radius_m: float) -> bool:
    from .geo import geo_distance_m, point_to_polyline_distance_m

    for verts in feat.geometry:
        if len(verts) == 1:
            if geo_distance_m(center, verts[0]) <= radius_m:
                return True
        elif verts[0] == verts[-1] and len(verts) >= 4:
            if point_to_ring_distance_m(center, verts) <= radius_m:
                return True
        elif point_to_polyline_distance_m(center, verts) <= radius_m:
            return True
    return False


def default_fixture_center(name: str) -> LatLon:
    return BUNDLED_FIXTURES[name][1]
