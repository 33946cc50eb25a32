"""Real-time spatial queries over a projected zone dataset.

A uniform 32-px cell grid holds bbox-overlap candidates per cell; queries
through the grid agree exactly with a brute-force scan over all zones
(the grid only prunes, never changes answers). The index is immutable after
build and safe for concurrent readers.
"""

from __future__ import annotations

import math

import numpy as np

from .geo import (
    CanvasPoint,
    CanvasProjection,
    ProjectedZone,
    compass_bearing,
    geo_distance_m,
)
from .osm import Zone, ZoneDataset

GRID_CELL_PX = 32


def point_in_rings(x: float, y: float, rings: list[np.ndarray]) -> bool:
    """Even-odd containment over all rings; points on any edge count inside.

    Holes fall out of the parity rule: a point inside a hole ring crosses
    an even number of boundaries and is therefore not in the zone.
    """
    crossings = 0
    for ring in rings:
        rx = ring[:, 0]
        ry = ring[:, 1]
        rxj = np.roll(rx, 1)
        ryj = np.roll(ry, 1)
        # on-edge: zero cross product and inside the segment bbox
        cross = (rxj - rx) * (y - ry) - (x - rx) * (ryj - ry)
        on_seg = (
            (cross == 0.0)
            & (np.minimum(rx, rxj) <= x)
            & (x <= np.maximum(rx, rxj))
            & (np.minimum(ry, ryj) <= y)
            & (y <= np.maximum(ry, ryj))
        )
        if bool(np.any(on_seg)):
            return True
        cond = (ry > y) != (ryj > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xin = (rxj - rx) * (y - ry) / (ryj - ry) + rx
        crossings += int(np.count_nonzero(cond & (x < xin)))
    return crossings % 2 == 1


def project_zone(zone: Zone, projection: CanvasProjection) -> ProjectedZone:
    rings = [projection.project_ring(r) for r in zone.geo_rings]
    c = projection.project(zone.centroid_geo)
    outer = rings[0]
    bbox = (
        float(outer[:, 0].min()),
        float(outer[:, 1].min()),
        float(outer[:, 0].max()),
        float(outer[:, 1].max()),
    )
    return ProjectedZone(zone_ref=zone.zone_id, canvas_rings=rings,
                         canvas_centroid=c, bbox=bbox)


class SpatialIndex:
    """Grid-accelerated hit testing and nearest-zone ranking."""

    def __init__(self, dataset: ZoneDataset, projection: CanvasProjection | None = None):
        self.dataset = dataset
        self.projection = projection or CanvasProjection(center_geo=dataset.center)
        self.projected: list[ProjectedZone] = [
            project_zone(z, self.projection) for z in dataset.zones
        ]
        self._grid: dict[tuple[int, int], list[int]] = {}
        for i, pz in enumerate(self.projected):
            x0, y0, x1, y1 = pz.bbox
            for cx in range(math.floor(x0 / GRID_CELL_PX), math.floor(x1 / GRID_CELL_PX) + 1):
                for cy in range(math.floor(y0 / GRID_CELL_PX), math.floor(y1 / GRID_CELL_PX) + 1):
                    self._grid.setdefault((cx, cy), []).append(i)

    def hit_test(self, p: CanvasPoint) -> Zone | None:
        """Zone containing p, smallest area winning on overlap, else None."""
        cell = (math.floor(p.x / GRID_CELL_PX), math.floor(p.y / GRID_CELL_PX))
        best: Zone | None = None
        for i in self._grid.get(cell, ()):
            pz = self.projected[i]
            x0, y0, x1, y1 = pz.bbox
            if not (x0 <= p.x <= x1 and y0 <= p.y <= y1):
                continue
            if point_in_rings(p.x, p.y, pz.canvas_rings):
                z = self.dataset.zones[i]
                if best is None or (z.area_m2, z.zone_id) < (best.area_m2, best.zone_id):
                    best = z
        return best

    def nearest_zones(
        self, p: CanvasPoint, k: int = 10
    ) -> list[tuple[Zone, float, str, float]]:
        """k nearest zones by centroid distance: (zone, meters, sector, bearing).

        The zone currently containing p is excluded; ties break by zone_id.
        Distances and bearings run cursor -> centroid.
        """
        zones = self.dataset.zones
        if not zones:
            return []
        cursor_geo = self.projection.unproject(p)
        inside = self.hit_test(p)
        ranked = sorted(
            ((geo_distance_m(cursor_geo, z.centroid_geo), z) for z in zones),
            key=lambda t: (t[0], t[1].zone_id),
        )
        out: list[tuple[Zone, float, str, float]] = []
        for dist, z in ranked:
            if inside is not None and z.zone_id == inside.zone_id:
                continue
            if z.centroid_geo == cursor_geo:
                continue  # bearing undefined; measure-zero case
            bearing, sector = compass_bearing(cursor_geo, z.centroid_geo)
            out.append((z, dist, sector, bearing))
            if len(out) == k:
                break
        return out
