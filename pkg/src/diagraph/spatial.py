"""Pyramidal spatial index over the normalized diagram space.

The finest level is a 64x64 occupancy grid; every coarser level halves the
resolution down to a single cell.  Each level keeps 1-D X and Y projection
arrays (the union of each column / row), and an inverse map records the
finest-level cells of every installed object.  Directional queries walk a
dyadic decomposition of a projection ray, touching at most two cells per
level regardless of diagram size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import IndexError_
from .geometry import (
    FINEST_LEVEL,
    SPACE_EXTENT,
    Bezier,
    Circle,
    EndpointMarker,
    Line,
    Point,
    Polygon,
    Rect,
    Text,
)
from .model import DerivedObject, TaggedSet, representative_points

Cell = tuple[int, int]


def _cell_index(coord: float, level: int = FINEST_LEVEL) -> int:
    n = 1 << level
    i = int(math.floor(coord * n / SPACE_EXTENT))
    return min(max(i, 0), n - 1)


def segment_cells(p1: Point, p2: Point, level: int = FINEST_LEVEL) -> set[Cell]:
    """Every level-`level` cell a segment passes through (conservative grid
    traversal).  An exact corner crossing steps diagonally."""
    n = 1 << level
    cell_size = SPACE_EXTENT / n
    x0, y0 = p1.x / cell_size, p1.y / cell_size
    x1, y1 = p2.x / cell_size, p2.y / cell_size
    i, j = _cell_index(p1.x, level), _cell_index(p1.y, level)
    i_end, j_end = _cell_index(p2.x, level), _cell_index(p2.y, level)
    cells = {(i, j)}
    dx = x1 - x0
    dy = y1 - y0
    step_i = 1 if dx > 0 else -1
    step_j = 1 if dy > 0 else -1
    # Parameter t in [0,1] along the segment at which the next vertical /
    # horizontal cell boundary is crossed.
    t_max_x = ((i + (step_i > 0)) - x0) / dx if dx != 0 else math.inf
    t_max_y = ((j + (step_j > 0)) - y0) / dy if dy != 0 else math.inf
    t_delta_x = abs(1.0 / dx) if dx != 0 else math.inf
    t_delta_y = abs(1.0 / dy) if dy != 0 else math.inf
    guard = 0
    while (i, j) != (i_end, j_end):
        guard += 1
        if guard > 4 * n:  # two full grid diagonals; defensive only
            break
        both_finite = math.isfinite(t_max_x) and math.isfinite(t_max_y)
        if both_finite and abs(t_max_x - t_max_y) <= 1e-12:
            i += step_i
            j += step_j
            t_max_x += t_delta_x
            t_max_y += t_delta_y
        elif t_max_x < t_max_y:
            i += step_i
            t_max_x += t_delta_x
        else:
            j += step_j
            t_max_y += t_delta_y
        i = min(max(i, 0), n - 1)
        j = min(max(j, 0), n - 1)
        cells.add((i, j))
    return cells


def bbox_cells(box: Rect, level: int = FINEST_LEVEL) -> set[Cell]:
    i0, i1 = _cell_index(box.min.x, level), _cell_index(box.max.x, level)
    j0, j1 = _cell_index(box.min.y, level), _cell_index(box.max.y, level)
    return {(i, j) for i in range(i0, i1 + 1) for j in range(j0, j1 + 1)}


def polyline_cells(points, level: int = FINEST_LEVEL) -> set[Cell]:
    cells: set[Cell] = set()
    for a, b in zip(points, points[1:]):
        cells |= segment_cells(a, b, level)
    return cells


def geometric_cells(obj, level: int = FINEST_LEVEL) -> set[Cell]:
    """Finest-level footprint of a non-derived object.

    Lines, polygon boundaries and curves use the cells they pass through;
    circles and text use their bounding-box footprint.
    """
    if isinstance(obj, Line):
        return segment_cells(obj.p1, obj.p2, level)
    if isinstance(obj, Polygon):
        cells: set[Cell] = set()
        for a, b in obj.edges():
            cells |= segment_cells(a, b, level)
        return cells
    if isinstance(obj, Bezier):
        return polyline_cells(obj.polyline(), level)
    if isinstance(obj, (Circle, Text)):
        return bbox_cells(obj.bbox, level)
    if isinstance(obj, EndpointMarker):
        return {(_cell_index(obj.point.x, level), _cell_index(obj.point.y, level))}
    raise IndexError_(f"cannot rasterize object of kind {getattr(obj, 'kind', '?')}")


@dataclass
class LevelStats:
    level: int
    grid: int
    occupied_cells: int
    entries: int


class SpatialIndex:
    """Occupancy pyramid with projection arrays and an inverse index.

    Installs are exclusive-writer operations; queries are read-only and may
    run concurrently with each other, but never with an install on the same
    index.
    """

    def __init__(self, levels: int = FINEST_LEVEL + 1) -> None:
        if levels < 1:
            raise IndexError_("pyramid needs at least one level")
        self.levels = levels
        self.finest = levels - 1
        self._registry: dict[int, object] = {}
        self._cells: list[dict[Cell, set[int]]] = [dict() for _ in range(levels)]
        self._xproj: list[dict[int, set[int]]] = [dict() for _ in range(levels)]
        self._yproj: list[dict[int, set[int]]] = [dict() for _ in range(levels)]
        self._inverse: dict[int, frozenset[Cell]] = {}
        self.query_cost = 0          # projection cells inspected, cumulative
        self.last_query_cost = 0     # same, for the most recent query

    # -- installation -----------------------------------------------------

    def install(self, obj, cells: frozenset[Cell] | None = None) -> frozenset[Cell]:
        tag = obj.tag
        if tag in self._registry:
            raise IndexError_(f"duplicate tag {tag}")
        if cells is None:
            if isinstance(obj, DerivedObject):
                cells = self._derived_cells(obj)
            else:
                self._check_normalized(obj)
                cells = frozenset(geometric_cells(obj, self.finest))
        else:
            cells = frozenset(cells)
        self._registry[tag] = obj
        self._inverse[tag] = cells
        for level in range(self.levels):
            shift = self.finest - level
            level_cells = {(i >> shift, j >> shift) for (i, j) in cells}
            grid = self._cells[level]
            xp = self._xproj[level]
            yp = self._yproj[level]
            for (i, j) in level_cells:
                grid.setdefault((i, j), set()).add(tag)
                xp.setdefault(i, set()).add(tag)
                yp.setdefault(j, set()).add(tag)
        return cells

    def _derived_cells(self, obj: DerivedObject) -> frozenset[Cell]:
        # Occupancy of a derived object is the union of its parts' cells as
        # recorded in the inverse index; no geometric re-scan happens.
        cells: set[Cell] = set()
        for part in obj.parts():
            try:
                cells |= self._inverse[part.tag]
            except KeyError:
                raise IndexError_(
                    f"constituent #{part.tag} of {obj.display_type} is not installed"
                ) from None
        return frozenset(cells)

    def _check_normalized(self, obj) -> None:
        box = obj.bbox
        eps = 1e-6
        if (box.min.x < -eps or box.min.y < -eps
                or box.max.x >= SPACE_EXTENT + eps or box.max.y >= SPACE_EXTENT + eps):
            raise IndexError_(f"unnormalized input: object #{obj.tag} outside index space")

    # -- lookups -----------------------------------------------------------

    def is_installed(self, obj) -> bool:
        return obj.tag in self._registry

    def object_by_tag(self, tag: int):
        try:
            return self._registry[tag]
        except KeyError:
            raise IndexError_(f"unknown tag {tag}") from None

    def all_objects(self) -> TaggedSet:
        return TaggedSet(self._registry.values())

    def cells_of(self, obj) -> frozenset[Cell]:
        tag = obj if isinstance(obj, int) else obj.tag
        try:
            return self._inverse[tag]
        except KeyError:
            raise IndexError_(f"unknown tag {tag}") from None

    def cell_contents(self, level: int, cell: Cell) -> TaggedSet:
        tags = self._cells[level].get(cell, ())
        return TaggedSet(self._registry[t] for t in tags)

    # -- queries -----------------------------------------------------------

    def objects_touching(self, anchor) -> TaggedSet:
        """Union of the contents of the anchor's finest-level cells, minus
        the anchor itself."""
        grid = self._cells[self.finest]
        found: set[int] = set()
        for cell in self.cells_of(anchor):
            found |= grid.get(cell, set())
        found.discard(anchor.tag)
        return TaggedSet(self._registry[t] for t in found)

    def objects_at_point(self, point: Point) -> TaggedSet:
        cell = (_cell_index(point.x, self.finest), _cell_index(point.y, self.finest))
        return self.cell_contents(self.finest, cell)

    def objects_near(self, obj, cell_radius: int) -> TaggedSet:
        """Objects occupying any cell within a Chebyshev cell radius of the
        object's own cells."""
        grid = self._cells[self.finest]
        n = 1 << self.finest
        found: set[int] = set()
        for (i, j) in self.cells_of(obj):
            for di in range(-cell_radius, cell_radius + 1):
                ii = i + di
                if ii < 0 or ii >= n:
                    continue
                for dj in range(-cell_radius, cell_radius + 1):
                    jj = j + dj
                    if 0 <= jj < n:
                        found |= grid.get((ii, jj), set())
        found.discard(obj.tag)
        return TaggedSet(self._registry[t] for t in found)

    def directional_query(self, anchor, direction: str, strip: bool = False) -> TaggedSet:
        """All installed objects whose bounding box lies strictly beyond the
        anchor's box in `direction` (edge contact allowed).  With `strip`,
        results must also overlap the anchor's perpendicular extent.

        Candidate generation walks one dyadic ray per projection pyramid,
        inspecting at most two cells per level; exact bbox tests then filter
        the candidates.
        """
        box = anchor.bbox if not isinstance(anchor, Rect) else anchor
        anchor_tag = getattr(anchor, "tag", None)
        if direction == "right":
            candidates = self._ray_candidates(self._xproj, box.max.x, forward=True)
        elif direction == "left":
            candidates = self._ray_candidates(self._xproj, box.min.x, forward=False)
        elif direction == "above":
            candidates = self._ray_candidates(self._yproj, box.max.y, forward=True)
        elif direction == "below":
            candidates = self._ray_candidates(self._yproj, box.min.y, forward=False)
        else:
            raise IndexError_(f"unknown direction: {direction}")
        result = TaggedSet()
        for tag in candidates:
            if tag == anchor_tag:
                continue
            obj = self._registry[tag]
            if beyond(obj.bbox, box, direction) and (not strip or strip_overlap(obj.bbox, box, direction)):
                result.add(obj)
        return result

    def _ray_candidates(self, projections, coord: float, forward: bool) -> set[int]:
        """Union of projection-cell contents covering the half-space at or
        beyond `coord`, via suffix/prefix dyadic decomposition."""
        cells = self._ray_cells(_cell_index(coord, self.finest), forward)
        self.last_query_cost = len(cells)
        self.query_cost += len(cells)
        found: set[int] = set()
        for level, idx in cells:
            found |= projections[level].get(idx, set())
        return found

    def _ray_cells(self, start: int, forward: bool) -> list[tuple[int, int]]:
        """Dyadic cover of the suffix [start, end] (forward) or prefix
        [0, start] of the finest projection row: at most one cell per level."""
        cells: list[tuple[int, int]] = []
        level = self.finest
        if forward:
            lo = start
            while level >= 0 and lo < (1 << level):
                if lo == 0:
                    cells.append((0, 0))  # remainder spans the whole space
                    break
                if lo & 1:
                    cells.append((level, lo))
                    lo += 1
                    if lo == (1 << level):
                        break
                lo >>= 1
                level -= 1
        else:
            hi = start
            while level >= 0 and hi >= 0:
                if hi == (1 << level) - 1:
                    cells.append((0, 0))
                    break
                if (hi & 1) == 0:
                    cells.append((level, hi))
                    hi -= 1
                    if hi < 0:
                        break
                hi >>= 1
                level -= 1
        return cells

    def aligned_partition(self, objects, axis: str, level: int | None = None) -> list[list]:
        """Partition objects into maximal groups whose alignment
        representatives share a projection cell at `level`, transitively."""
        if level is None:
            level = self.finest
        objs = list(objects)
        parent = list(range(len(objs)))

        def find(a: int) -> int:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a: int, b: int) -> None:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[rb] = ra

        first_at: dict[int, int] = {}
        for pos, obj in enumerate(objs):
            for point in representative_points(obj):
                coord = point.y if axis == "horizontal" else point.x
                row = _cell_index(coord, level)
                if row in first_at:
                    union(first_at[row], pos)
                else:
                    first_at[row] = pos
        groups: dict[int, list] = {}
        for pos, obj in enumerate(objs):
            groups.setdefault(find(pos), []).append(obj)
        ordered = sorted(groups.values(), key=lambda g: min(o.tag for o in g))
        return [sorted(g, key=lambda o: o.tag) for g in ordered]

    # -- reporting ---------------------------------------------------------

    def object_count(self) -> int:
        return len(self._registry)

    def inverse_size(self) -> int:
        return len(self._inverse)

    def level_stats(self) -> list[LevelStats]:
        stats = []
        for level in range(self.levels):
            grid = self._cells[level]
            stats.append(
                LevelStats(
                    level=level,
                    grid=1 << level,
                    occupied_cells=len(grid),
                    entries=sum(len(s) for s in grid.values()),
                )
            )
        return stats


def beyond(box: Rect, anchor: Rect, direction: str) -> bool:
    """Box disjoint from the anchor along the query axis (gap >= 0)."""
    if direction == "right":
        return box.min.x >= anchor.max.x
    if direction == "left":
        return box.max.x <= anchor.min.x
    if direction == "above":
        return box.min.y >= anchor.max.y
    if direction == "below":
        return box.max.y <= anchor.min.y
    raise IndexError_(f"unknown direction: {direction}")


def strip_overlap(box: Rect, anchor: Rect, direction: str) -> bool:
    if direction in ("left", "right"):
        return box.max.y >= anchor.min.y and box.min.y <= anchor.max.y
    return box.max.x >= anchor.min.x and box.min.x <= anchor.max.x


def directional_gap(box: Rect, anchor: Rect, direction: str) -> float:
    """Distance between facing edges for a box beyond the anchor."""
    if direction == "right":
        return box.min.x - anchor.max.x
    if direction == "left":
        return anchor.min.x - box.max.x
    if direction == "above":
        return box.min.y - anchor.max.y
    if direction == "below":
        return anchor.min.y - box.max.y
    raise IndexError_(f"unknown direction: {direction}")


def build_index(primitives, levels: int = FINEST_LEVEL + 1) -> SpatialIndex:
    """Install a normalized diagram: every primitive plus an endpoint marker
    for each line endpoint (used by alignment and touch queries)."""
    index = SpatialIndex(levels=levels)
    for prim in primitives:
        index.install(prim)
    next_tag = max((p.tag for p in primitives), default=0) + 1
    for prim in primitives:
        if isinstance(prim, Line):
            for which, point in enumerate((prim.p1, prim.p2)):
                index.install(EndpointMarker(next_tag, point, prim.tag, which))
                next_tag += 1
    return index
