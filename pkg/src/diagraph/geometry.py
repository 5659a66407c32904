"""Graphical primitives and the measurement vocabulary.

Coordinates are y-up.  A diagram is normalized once on ingestion: its union
bounding box is translated to the origin and uniformly scaled so the larger
extent fills [0, 2^13).  All predicates below assume normalized coordinates.

The five primitive kinds (line, circle, polygon, bezier curve, text) plus
the endpoint markers installed for alignment queries all expose `tag`,
`kind` and `bbox`, which is the whole interface the spatial index needs.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property

from .config import EngineConfig
from .errors import DiagramError, GeometryError

SPACE_BITS = 13
SPACE_EXTENT = float(1 << SPACE_BITS)   # 8192.0
FINEST_LEVEL = 6                         # 64 x 64 finest grid
CELL_SIZE = SPACE_EXTENT / (1 << FINEST_LEVEL)  # 128.0
BEZIER_SUBDIVISIONS = 16
TEXT_GLYPH_ASPECT = 0.6                  # nominal glyph width / glyph height

HORIZONTAL = "horizontal"
VERTICAL = "vertical"

_NUMERIC_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __iter__(self):
        yield self.x
        yield self.y


@dataclass(frozen=True)
class Rect:
    min: Point
    max: Point

    @property
    def width(self) -> float:
        return self.max.x - self.min.x

    @property
    def height(self) -> float:
        return self.max.y - self.min.y

    @property
    def max_dim(self) -> float:
        return max(self.width, self.height)

    @property
    def center(self) -> Point:
        return Point((self.min.x + self.max.x) / 2.0, (self.min.y + self.max.y) / 2.0)

    def union(self, other: "Rect") -> "Rect":
        return Rect(
            Point(min(self.min.x, other.min.x), min(self.min.y, other.min.y)),
            Point(max(self.max.x, other.max.x), max(self.max.y, other.max.y)),
        )

    def contains(self, other: "Rect") -> bool:
        return (
            self.min.x <= other.min.x
            and self.min.y <= other.min.y
            and self.max.x >= other.max.x
            and self.max.y >= other.max.y
        )

    def intersects(self, other: "Rect") -> bool:
        return not (
            self.max.x < other.min.x
            or other.max.x < self.min.x
            or self.max.y < other.min.y
            or other.max.y < self.min.y
        )


def rect_from_points(points) -> Rect:
    xs = [p.x for p in points]
    ys = [p.y for p in points]
    return Rect(Point(min(xs), min(ys)), Point(max(xs), max(ys)))


# --------------------------------------------------------------------------
# Primitives
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Line:
    tag: int
    p1: Point
    p2: Point
    source_id: str | None = None

    kind = "line"

    @cached_property
    def bbox(self) -> Rect:
        return rect_from_points((self.p1, self.p2))

    @property
    def length(self) -> float:
        return distance(self.p1, self.p2)


@dataclass(frozen=True)
class Circle:
    tag: int
    center: Point
    radius: float
    source_id: str | None = None

    kind = "circle"

    @cached_property
    def bbox(self) -> Rect:
        r = self.radius
        return Rect(
            Point(self.center.x - r, self.center.y - r),
            Point(self.center.x + r, self.center.y + r),
        )


@dataclass(frozen=True)
class Polygon:
    tag: int
    vertices: tuple[Point, ...]
    closed: bool = True
    source_id: str | None = None

    kind = "polygon"

    @cached_property
    def bbox(self) -> Rect:
        return rect_from_points(self.vertices)

    def edges(self) -> list[tuple[Point, Point]]:
        pairs = list(zip(self.vertices, self.vertices[1:]))
        if self.closed and len(self.vertices) > 2:
            pairs.append((self.vertices[-1], self.vertices[0]))
        return pairs


@dataclass(frozen=True)
class Bezier:
    """A chain of cubic segments; each segment holds its 4 control points."""

    tag: int
    segments: tuple[tuple[Point, Point, Point, Point], ...]
    source_id: str | None = None

    kind = "bezier"

    @cached_property
    def bbox(self) -> Rect:
        return rect_from_points(self.polyline())

    def polyline(self, subdivisions: int = BEZIER_SUBDIVISIONS) -> list[Point]:
        points: list[Point] = []
        for seg in self.segments:
            for i in range(subdivisions + 1):
                if points and i == 0:
                    continue  # shared joint between consecutive segments
                points.append(_cubic_point(seg, i / subdivisions))
        return points

    @property
    def start(self) -> Point:
        return self.segments[0][0]

    @property
    def end(self) -> Point:
        return self.segments[-1][3]


@dataclass(frozen=True)
class Text:
    tag: int
    string: str
    anchor: Point  # lower-left corner of the glyph box
    height: float
    orientation: str = HORIZONTAL
    source_id: str | None = None

    kind = "text"

    @cached_property
    def bbox(self) -> Rect:
        run = TEXT_GLYPH_ASPECT * self.height * max(len(self.string), 1)
        if self.orientation == HORIZONTAL:
            return Rect(self.anchor, Point(self.anchor.x + run, self.anchor.y + self.height))
        return Rect(self.anchor, Point(self.anchor.x + self.height, self.anchor.y + run))


@dataclass(frozen=True)
class EndpointMarker:
    """A line endpoint installed as its own indexed object.

    Markers make endpoint coincidence and alignment visible to cell-level
    queries; they are filtered out of grammar contexts by element type.
    """

    tag: int
    point: Point
    owner_tag: int
    which: int  # 0 for p1, 1 for p2

    kind = "endpoint"

    @cached_property
    def bbox(self) -> Rect:
        return Rect(self.point, self.point)


Primitive = Line | Circle | Polygon | Bezier | Text

PRIMITIVE_KINDS = ("line", "circle", "polygon", "bezier", "text")

# Grammar-facing type names for primitive kinds.
TYPE_NAME_TO_KIND = {
    "line": "line",
    "circle": "circle",
    "polygon": "polygon",
    "curve": "bezier",
    "text": "text",
}


def _cubic_point(seg: tuple[Point, Point, Point, Point], t: float) -> Point:
    p0, p1, p2, p3 = seg
    u = 1.0 - t
    a = u * u * u
    b = 3.0 * u * u * t
    c = 3.0 * u * t * t
    d = t * t * t
    return Point(
        a * p0.x + b * p1.x + c * p2.x + d * p3.x,
        a * p0.y + b * p1.y + c * p2.y + d * p3.y,
    )


def polyline_length(points) -> float:
    total = 0.0
    for a, b in zip(points, points[1:]):
        total += distance(a, b)
    return total


def distance(a: Point, b: Point) -> float:
    return math.hypot(b.x - a.x, b.y - a.y)


# --------------------------------------------------------------------------
# Normalization and characteristic lengths
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalizeTransform:
    offset_x: float
    offset_y: float
    scale: float

    def apply(self, p: Point) -> Point:
        # Clamp away float dust so a mapped extreme lands exactly in range.
        x = min(max((p.x - self.offset_x) * self.scale, 0.0), SPACE_EXTENT - 0.5)
        y = min(max((p.y - self.offset_y) * self.scale, 0.0), SPACE_EXTENT - 0.5)
        return Point(x, y)


def diagram_bbox(primitives) -> Rect:
    if not primitives:
        raise DiagramError("empty diagram")
    box = primitives[0].bbox
    for p in primitives[1:]:
        box = box.union(p.bbox)
    return box


def normalize_transform(primitives) -> NormalizeTransform:
    box = diagram_bbox(primitives)
    extent = max(box.width, box.height)
    # The largest extent maps onto [0, 2^13 - 1] so every coordinate stays
    # strictly inside the index space.
    scale = (SPACE_EXTENT - 1.0) / extent if extent > 0 else 1.0
    return NormalizeTransform(box.min.x, box.min.y, scale)


def normalize_diagram(primitives) -> list[Primitive]:
    """Map a diagram into the index space with a single uniform scale."""
    tf = normalize_transform(primitives)
    return [transform_primitive(p, tf) for p in primitives]


def transform_primitive(p: Primitive, tf: NormalizeTransform) -> Primitive:
    if isinstance(p, Line):
        return Line(p.tag, tf.apply(p.p1), tf.apply(p.p2), p.source_id)
    if isinstance(p, Circle):
        return Circle(p.tag, tf.apply(p.center), p.radius * tf.scale, p.source_id)
    if isinstance(p, Polygon):
        return Polygon(p.tag, tuple(tf.apply(v) for v in p.vertices), p.closed, p.source_id)
    if isinstance(p, Bezier):
        segs = tuple(tuple(tf.apply(c) for c in seg) for seg in p.segments)
        return Bezier(p.tag, segs, p.source_id)
    if isinstance(p, Text):
        return Text(p.tag, p.string, tf.apply(p.anchor), p.height * tf.scale,
                    p.orientation, p.source_id)
    raise GeometryError(f"unknown primitive kind: {p!r}")


@dataclass(frozen=True)
class CharacteristicLengths:
    """Smallest text height h and diagram width W, in normalized units."""

    h: float
    W: float


def characteristic_lengths(primitives) -> CharacteristicLengths:
    box = diagram_bbox(primitives)
    width = box.width
    heights = [p.height for p in primitives if isinstance(p, Text)]
    if heights:
        h = min(heights)
    else:
        h = width / 64.0
    return CharacteristicLengths(h=h, W=width)


# --------------------------------------------------------------------------
# Predicates and accessors
# --------------------------------------------------------------------------

def horizp(obj, config: EngineConfig = EngineConfig()) -> bool:
    """True for lines within the angular tolerance of horizontal, and for
    horizontally oriented text.  Any other kind is neither horizontal nor
    vertical."""
    if isinstance(obj, Text):
        return obj.orientation == HORIZONTAL
    if isinstance(obj, Line):
        dx = abs(obj.p2.x - obj.p1.x)
        dy = abs(obj.p2.y - obj.p1.y)
        return dy <= math.tan(math.radians(config.angle_tol_deg)) * dx
    return False


def vertp(obj, config: EngineConfig = EngineConfig()) -> bool:
    if isinstance(obj, Text):
        return obj.orientation == VERTICAL
    if isinstance(obj, Line):
        dx = abs(obj.p2.x - obj.p1.x)
        dy = abs(obj.p2.y - obj.p1.y)
        return dx <= math.tan(math.radians(config.angle_tol_deg)) * dy
    return False


def a_length(obj) -> float:
    """Arc length: line length, subdivided curve length, or the member sum
    for a derived collection of lines/curves."""
    if isinstance(obj, Line):
        return obj.length
    if isinstance(obj, Bezier):
        return polyline_length(obj.polyline())
    members = getattr(obj, "members", None)
    if members:
        return sum(a_length(m) for m in members)
    raise GeometryError(f"no arc length for {getattr(obj, 'kind', type(obj).__name__)}")


def measurable_extent(obj) -> float:
    """Length used by the size predicates: arc length where defined, else
    the larger bounding-box dimension."""
    if isinstance(obj, (Line, Bezier)):
        return a_length(obj)
    return obj.bbox.max_dim


def size_predicate(obj, cl: CharacteristicLengths, which: str,
                   config: EngineConfig = EngineConfig()) -> bool:
    if which == "short":
        return measurable_extent(obj) <= config.short_mult * cl.h
    if which == "long":
        return measurable_extent(obj) >= max(config.long_mult * cl.h, config.long_frac * cl.W)
    if which == "small":
        return obj.bbox.max_dim <= config.short_mult * cl.h
    raise GeometryError(f"unknown size predicate: {which}")


def left_endpoint(line: Line) -> Point:
    if not isinstance(line, Line):
        raise GeometryError("left-endpoint requires a line")
    a, b = line.p1, line.p2
    if (a.x, a.y) <= (b.x, b.y):
        return a
    return b


def bottom_endpoint(line: Line) -> Point:
    if not isinstance(line, Line):
        raise GeometryError("bottom-endpoint requires a line")
    a, b = line.p1, line.p2
    if (a.y, a.x) <= (b.y, b.x):
        return a
    return b


def rectanglep(poly, config: EngineConfig = EngineConfig()) -> bool:
    """True for four-sided, axis-aligned, right-angled polygons.

    A repeated closing vertex is ignored; both the corner angles and the
    edge orientations must be within the angular tolerance.
    """
    if not isinstance(poly, Polygon):
        return False
    verts = list(poly.vertices)
    if len(verts) >= 2 and verts[0] == verts[-1]:
        verts = verts[:-1]
    if len(verts) != 4 or len({(v.x, v.y) for v in verts}) != 4:
        return False
    tol = math.radians(config.angle_tol_deg)
    for i in range(4):
        a, b, c = verts[i], verts[(i + 1) % 4], verts[(i + 2) % 4]
        e1x, e1y = b.x - a.x, b.y - a.y
        e2x, e2y = c.x - b.x, c.y - b.y
        n1 = math.hypot(e1x, e1y)
        n2 = math.hypot(e2x, e2y)
        if n1 == 0 or n2 == 0:
            return False
        cos_corner = abs(e1x * e2x + e1y * e2y) / (n1 * n2)
        if cos_corner > math.sin(tol):
            return False
        axis_angle = math.atan2(abs(e1y), abs(e1x))
        if min(axis_angle, math.pi / 2 - axis_angle) > tol:
            return False
    return True


def numeric_textp(text) -> bool:
    if not isinstance(text, Text):
        return False
    return bool(_NUMERIC_RE.match(text.string.strip()))


def validate_primitive(p: Primitive, record: int | None = None) -> None:
    """Structural invariants for a single primitive; raises DiagramError."""
    where = f"record {record}: " if record is not None else ""
    if isinstance(p, Line):
        if p.p1 == p.p2:
            raise DiagramError(f"{where}line endpoints must be distinct")
    elif isinstance(p, Circle):
        if p.radius <= 0:
            raise DiagramError(f"{where}circle radius must be positive")
    elif isinstance(p, Polygon):
        if len(p.vertices) < 3:
            raise DiagramError(f"{where}polygon needs at least 3 vertices")
    elif isinstance(p, Bezier):
        if not p.segments:
            raise DiagramError(f"{where}bezier needs at least one segment")
    elif isinstance(p, Text):
        if p.height <= 0:
            raise DiagramError(f"{where}text height must be positive")
    else:
        raise DiagramError(f"{where}unknown primitive kind")
