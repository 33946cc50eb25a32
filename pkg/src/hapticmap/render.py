"""Canvas rasterization and JPEG encoding for prompt screenshots.

Zones are filled with an even-odd scanline rule (holes carved out), outlined
at 1 px, and topped with a star cursor marker. The base layer is a flat
background rather than map tiles; the prompt's text sections carry the
information tiles would add. Rendering is deterministic for fixed inputs;
the cursor-independent zone layer is memoized per (dataset, projection,
style) so repeated screenshots only pay for compositing and encoding.
"""

from __future__ import annotations

import io
import weakref
from dataclasses import dataclass

import numpy as np

from .errors import EncodingFailure
from .geo import CanvasPoint, CanvasProjection
from .osm import ZoneCategory, ZoneDataset

RGB = tuple[int, int, int]


@dataclass(frozen=True)
class RenderStyle:
    building_fill: RGB = (186, 112, 99)
    park_fill: RGB = (124, 176, 109)
    water_fill: RGB = (116, 154, 209)
    other_fill: RGB = (209, 190, 132)
    outline_color: RGB = (60, 60, 60)
    background_color: RGB = (242, 239, 233)
    star_color: RGB = (214, 30, 30)
    star_glyph_size: int = 9
    label_rendering: str = "off"  # off | on

    def __post_init__(self):
        fills = {self.building_fill, self.park_fill, self.water_fill, self.other_fill}
        if len(fills) != 4:
            raise ValueError("category fill colors must be pairwise distinct")
        if self.label_rendering not in ("off", "on"):
            raise ValueError("label_rendering must be 'off' or 'on'")

    def fill_for(self, category: ZoneCategory) -> RGB:
        return {
            ZoneCategory.BUILDING: self.building_fill,
            ZoneCategory.PARK: self.park_fill,
            ZoneCategory.WATER: self.water_fill,
            ZoneCategory.OTHER_AREA: self.other_fill,
        }[category]


DEFAULT_STYLE = RenderStyle()

# dataset -> {(projection, style): base RGB array}
_LAYER_CACHE: "weakref.WeakKeyDictionary[ZoneDataset, dict]" = weakref.WeakKeyDictionary()


def _fill_rings_evenodd(
    buf: np.ndarray, rings: list[np.ndarray], color: RGB, mask: np.ndarray | None = None
) -> None:
    """Scanline even-odd fill over all rings; pixel centers decide coverage.

    When given, ``mask`` records the exact painted coverage so outlines can
    be clipped to the zone's own footprint.
    """
    height, width = buf.shape[:2]
    x1s, y1s, x2s, y2s = [], [], [], []
    for ring in rings:
        a = ring
        b = np.roll(ring, -1, axis=0)
        x1s.append(a[:, 0]); y1s.append(a[:, 1])
        x2s.append(b[:, 0]); y2s.append(b[:, 1])
    x1 = np.concatenate(x1s); y1 = np.concatenate(y1s)
    x2 = np.concatenate(x2s); y2 = np.concatenate(y2s)
    nonflat = y1 != y2
    x1, y1, x2, y2 = x1[nonflat], y1[nonflat], x2[nonflat], y2[nonflat]
    if x1.size == 0:
        return
    ymin = np.minimum(y1, y2)
    ymax = np.maximum(y1, y2)
    row_lo = max(0, int(np.floor(ymin.min() - 0.5)))
    row_hi = min(height - 1, int(np.ceil(ymax.max())))
    if row_hi < row_lo:
        return
    yc = np.arange(row_lo, row_hi + 1, dtype=float) + 0.5  # pixel-center scanlines
    # half-open [ymin, ymax) inclusion avoids double-counting shared vertices
    hit = (ymin[None, :] <= yc[:, None]) & (yc[:, None] < ymax[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x1[None, :] + (yc[:, None] - y1[None, :]) * (x2 - x1)[None, :] / (y2 - y1)[None, :]
    xint = np.where(hit, xint, np.inf)
    xint.sort(axis=1)
    counts = hit.sum(axis=1)
    max_pairs = int(counts.max()) // 2 if counts.size else 0
    for j in range(max_pairs):
        a = xint[:, 2 * j]
        b = xint[:, 2 * j + 1]
        valid = np.isfinite(b)
        for i in np.nonzero(valid)[0]:
            start = max(0, int(np.ceil(a[i] - 0.5)))
            stop = min(width, int(np.ceil(b[i] - 0.5)))
            if stop > start:
                buf[row_lo + i, start:stop] = color
                if mask is not None:
                    mask[row_lo + i, start:stop] = True


def _draw_polyline(
    buf: np.ndarray, ring: np.ndarray, color: RGB, mask: np.ndarray | None = None
) -> None:
    """1 px outline along ring edges, optionally clipped to a coverage mask."""
    height, width = buf.shape[:2]
    a = ring
    b = np.roll(ring, -1, axis=0)
    for (xa, ya), (xb, yb) in zip(a, b):
        n = int(max(abs(xb - xa), abs(yb - ya))) + 1
        ts = np.linspace(0.0, 1.0, n + 1)
        xs = np.rint(xa + ts * (xb - xa)).astype(int)
        ys = np.rint(ya + ts * (yb - ya)).astype(int)
        keep = (xs >= 0) & (xs < width) & (ys >= 0) & (ys < height)
        xs, ys = xs[keep], ys[keep]
        if mask is not None:
            inside = mask[ys, xs]
            xs, ys = xs[inside], ys[inside]
        buf[ys, xs] = color


def _draw_star(buf: np.ndarray, cursor: CanvasPoint, size: int, color: RGB) -> None:
    height, width = buf.shape[:2]
    cx = int(round(cursor.x))
    cy = int(round(cursor.y))
    arm = max(1, size // 2)
    pts = []
    for d in range(-arm, arm + 1):
        pts += [(cx + d, cy), (cx, cy + d), (cx + d, cy + d), (cx + d, cy - d)]
    for dx in (-1, 0, 1):  # solid 3x3 core so the marker reads at any angle
        for dy in (-1, 0, 1):
            pts.append((cx + dx, cy + dy))
    for x, y in pts:
        if 0 <= x < width and 0 <= y < height:
            buf[y, x] = color


def _zone_layer(dataset: ZoneDataset, projection: CanvasProjection, style: RenderStyle) -> np.ndarray:
    from .index import project_zone

    buf = np.empty((projection.height_px, projection.width_px, 3), dtype=np.uint8)
    buf[:, :] = style.background_color
    order = sorted(dataset.zones, key=lambda z: (-z.area_m2, z.zone_id))
    projected = [(z, project_zone(z, projection)) for z in order]
    mask = np.zeros(buf.shape[:2], dtype=bool)
    dirty: tuple[int, int] | None = None
    for zone, pz in projected:
        if dirty is not None:
            mask[dirty[0] : dirty[1] + 1] = False
        _fill_rings_evenodd(buf, pz.canvas_rings, style.fill_for(zone.category), mask)
        y0 = max(0, int(pz.bbox[1]) - 1)
        y1 = min(buf.shape[0] - 1, int(pz.bbox[3]) + 1)
        dirty = (y0, y1)
        for ring in pz.canvas_rings:
            _draw_polyline(buf, ring, style.outline_color, mask)
    if style.label_rendering == "on":
        for zone, pz in projected:
            draw_label(buf, zone.name, pz.canvas_centroid, style.outline_color)
    return buf


def _cached_zone_layer(dataset, projection, style) -> np.ndarray:
    per_ds = _LAYER_CACHE.setdefault(dataset, {})
    key = (projection, style)
    layer = per_ds.get(key)
    if layer is None:
        layer = _zone_layer(dataset, projection, style)
        per_ds[key] = layer
    return layer


def render_canvas(
    dataset: ZoneDataset,
    projection: CanvasProjection,
    cursor: CanvasPoint,
    style: RenderStyle = DEFAULT_STYLE,
) -> np.ndarray:
    """Rasterize the canvas: zones, outlines, then the star marker on top."""
    buf = _cached_zone_layer(dataset, projection, style).copy()
    _draw_star(buf, cursor, style.star_glyph_size, style.star_color)
    return buf


def encode_jpeg(image: np.ndarray, quality: int = 80) -> bytes:
    """Encode an (H, W, 3) uint8 array as baseline JFIF JPEG bytes."""
    if not 1 <= quality <= 100:
        raise EncodingFailure(f"quality {quality} outside 1..100")
    try:
        from PIL import Image

        img = Image.fromarray(np.ascontiguousarray(image), mode="RGB")
        out = io.BytesIO()
        img.save(out, format="JPEG", quality=quality)
        return out.getvalue()
    except EncodingFailure:
        raise
    except Exception as exc:
        raise EncodingFailure(f"JPEG encode failed: {exc}") from exc


def screenshot_jpeg(
    dataset: ZoneDataset,
    projection: CanvasProjection,
    cursor: CanvasPoint,
    style: RenderStyle = DEFAULT_STYLE,
    quality: int = 80,
) -> bytes:
    return encode_jpeg(render_canvas(dataset, projection, cursor, style), quality)


# == Optional 5x7 bitmap labels ==

# Column-wise 5x7 glyphs, LSB = top row. Enough coverage for zone names;
# unknown characters render as blanks.
_FONT_5X7 = {
    "A": (0x7E, 0x09, 0x09, 0x09, 0x7E), "B": (0x7F, 0x49, 0x49, 0x49, 0x36),
    "C": (0x3E, 0x41, 0x41, 0x41, 0x22), "D": (0x7F, 0x41, 0x41, 0x22, 0x1C),
    "E": (0x7F, 0x49, 0x49, 0x49, 0x41), "F": (0x7F, 0x09, 0x09, 0x09, 0x01),
    "G": (0x3E, 0x41, 0x49, 0x49, 0x7A), "H": (0x7F, 0x08, 0x08, 0x08, 0x7F),
    "I": (0x00, 0x41, 0x7F, 0x41, 0x00), "J": (0x20, 0x40, 0x41, 0x3F, 0x01),
    "K": (0x7F, 0x08, 0x14, 0x22, 0x41), "L": (0x7F, 0x40, 0x40, 0x40, 0x40),
    "M": (0x7F, 0x02, 0x0C, 0x02, 0x7F), "N": (0x7F, 0x04, 0x08, 0x10, 0x7F),
    "O": (0x3E, 0x41, 0x41, 0x41, 0x3E), "P": (0x7F, 0x09, 0x09, 0x09, 0x06),
    "Q": (0x3E, 0x41, 0x51, 0x21, 0x5E), "R": (0x7F, 0x09, 0x19, 0x29, 0x46),
    "S": (0x46, 0x49, 0x49, 0x49, 0x31), "T": (0x01, 0x01, 0x7F, 0x01, 0x01),
    "U": (0x3F, 0x40, 0x40, 0x40, 0x3F), "V": (0x1F, 0x20, 0x40, 0x20, 0x1F),
    "W": (0x3F, 0x40, 0x38, 0x40, 0x3F), "X": (0x63, 0x14, 0x08, 0x14, 0x63),
    "Y": (0x07, 0x08, 0x70, 0x08, 0x07), "Z": (0x61, 0x51, 0x49, 0x45, 0x43),
    "0": (0x3E, 0x51, 0x49, 0x45, 0x3E), "1": (0x00, 0x42, 0x7F, 0x40, 0x00),
    "2": (0x42, 0x61, 0x51, 0x49, 0x46), "3": (0x21, 0x41, 0x45, 0x4B, 0x31),
    "4": (0x18, 0x14, 0x12, 0x7F, 0x10), "5": (0x27, 0x45, 0x45, 0x45, 0x39),
    "6": (0x3C, 0x4A, 0x49, 0x49, 0x30), "7": (0x01, 0x71, 0x09, 0x05, 0x03),
    "8": (0x36, 0x49, 0x49, 0x49, 0x36), "9": (0x06, 0x49, 0x49, 0x29, 0x1E),
    "-": (0x08, 0x08, 0x08, 0x08, 0x08), "'": (0x00, 0x05, 0x03, 0x00, 0x00),
    ".": (0x00, 0x60, 0x60, 0x00, 0x00), " ": (0x00, 0x00, 0x00, 0x00, 0x00),
}
_LABEL_MAX_CHARS = 14


def draw_label(buf: np.ndarray, text: str, at: CanvasPoint, color: RGB) -> None:
    """Stamp an uppercase 5x7 bitmap label centered on a point."""
    height, width = buf.shape[:2]
    text = text.upper()[:_LABEL_MAX_CHARS]
    total_w = len(text) * 6 - 1
    x0 = int(round(at.x)) - total_w // 2
    y0 = int(round(at.y)) - 3
    for ci, ch in enumerate(text):
        glyph = _FONT_5X7.get(ch)
        if glyph is None:
            continue
        for col, bits in enumerate(glyph):
            x = x0 + ci * 6 + col
            if not 0 <= x < width:
                continue
            for row in range(7):
                if bits >> row & 1:
                    y = y0 + row
                    if 0 <= y < height:
                        buf[y, x] = color
    return None
