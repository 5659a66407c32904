"""Reading and writing diagram and solution files.

A diagram file (`.diag`) is JSON: a `primitives` array of records, one per
graphics primitive, with y-up coordinates in arbitrary units.  On load the
diagram is normalized into the engine's index space.  A solution file is
JSON too: the solved forest as recursive records whose leaves reference the
input primitives by tag (and source id when present), plus a timing block.
"""
from __future__ import annotations

import json
from pathlib import Path

from . import geometry
from .errors import DiagramError
from .geometry import (
    Bezier,
    Circle,
    EndpointMarker,
    Line,
    Point,
    Polygon,
    Primitive,
    Text,
    validate_primitive,
)
from .model import DerivedObject

DIAGRAM_VERSION = 1
SOLUTION_VERSION = 1


# --------------------------------------------------------------------------
# Diagram files
# --------------------------------------------------------------------------

def _pair(value, where: str) -> Point:
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, (int, float)) for v in value)):
        raise DiagramError(f"{where}: expected [x, y], got {value!r}")
    return Point(float(value[0]), float(value[1]))


def record_to_primitive(record: dict, tag: int, idx: int) -> Primitive:
    where = f"record {idx}"
    if not isinstance(record, dict) or "kind" not in record:
        raise DiagramError(f"{where}: each primitive needs a 'kind'")
    kind = record["kind"]
    source_id = record.get("id")
    try:
        if kind == "line":
            prim = Line(tag, _pair(record["p1"], where), _pair(record["p2"], where),
                        source_id)
        elif kind == "circle":
            prim = Circle(tag, _pair(record["center"], where),
                          float(record["radius"]), source_id)
        elif kind == "polygon":
            vertices = record["vertices"]
            if not isinstance(vertices, list):
                raise DiagramError(f"{where}: polygon vertices must be a list")
            prim = Polygon(tag, tuple(_pair(v, where) for v in vertices),
                           bool(record.get("closed", True)), source_id)
        elif kind == "bezier":
            segments = record["segments"]
            if not isinstance(segments, list) or not segments:
                raise DiagramError(f"{where}: bezier needs a segments list")
            segs = []
            for seg in segments:
                if not isinstance(seg, list) or len(seg) != 4:
                    raise DiagramError(f"{where}: each bezier segment needs 4 control points")
                segs.append(tuple(_pair(c, where) for c in seg))
            prim = Bezier(tag, tuple(segs), source_id)
        elif kind == "text":
            prim = Text(tag, str(record["string"]), _pair(record["anchor"], where),
                        float(record["height"]),
                        record.get("orientation", geometry.HORIZONTAL), source_id)
        else:
            raise DiagramError(f"{where}: unknown kind '{kind}'")
    except KeyError as exc:
        raise DiagramError(f"{where}: missing field {exc} for kind '{kind}'") from None
    except (TypeError, ValueError) as exc:
        raise DiagramError(f"{where}: {exc}") from None
    for coord in _record_coords(prim):
        if not (coord == coord and abs(coord) != float("inf")):
            raise DiagramError(f"{where}: coordinates must be finite")
    if isinstance(prim, Text) and prim.orientation not in (geometry.HORIZONTAL,
                                                           geometry.VERTICAL):
        raise DiagramError(f"{where}: orientation must be horizontal or vertical")
    validate_primitive(prim, idx)
    return prim


def _record_coords(prim: Primitive):
    if isinstance(prim, Line):
        return (prim.p1.x, prim.p1.y, prim.p2.x, prim.p2.y)
    if isinstance(prim, Circle):
        return (prim.center.x, prim.center.y, prim.radius)
    if isinstance(prim, Polygon):
        return tuple(c for v in prim.vertices for c in (v.x, v.y))
    if isinstance(prim, Bezier):
        return tuple(c for seg in prim.segments for p in seg for c in (p.x, p.y))
    return (prim.anchor.x, prim.anchor.y, prim.height)


def primitive_to_record(prim: Primitive) -> dict:
    if isinstance(prim, Line):
        record = {"kind": "line", "p1": [prim.p1.x, prim.p1.y], "p2": [prim.p2.x, prim.p2.y]}
    elif isinstance(prim, Circle):
        record = {"kind": "circle", "center": [prim.center.x, prim.center.y],
                  "radius": prim.radius}
    elif isinstance(prim, Polygon):
        record = {"kind": "polygon", "vertices": [[v.x, v.y] for v in prim.vertices],
                  "closed": prim.closed}
    elif isinstance(prim, Bezier):
        record = {"kind": "bezier",
                  "segments": [[[p.x, p.y] for p in seg] for seg in prim.segments]}
    elif isinstance(prim, Text):
        record = {"kind": "text", "string": prim.string,
                  "anchor": [prim.anchor.x, prim.anchor.y],
                  "height": prim.height, "orientation": prim.orientation}
    else:
        raise DiagramError(f"cannot serialize {prim!r}")
    if prim.source_id is not None:
        record["id"] = prim.source_id
    return record


def load_primitives(document: dict) -> list[Primitive]:
    """Primitives from a parsed diagram document, tagged in file order."""
    if not isinstance(document, dict) or "primitives" not in document:
        raise DiagramError("diagram file needs a 'primitives' array")
    records = document["primitives"]
    if not isinstance(records, list):
        raise DiagramError("'primitives' must be an array")
    if not records:
        raise DiagramError("empty diagram")
    return [record_to_primitive(rec, tag=i + 1, idx=i) for i, rec in enumerate(records)]


def read_diagram(path: str | Path, normalize: bool = True) -> list[Primitive]:
    """Load a diagram file; primitives come back normalized (unless asked
    not to) with fresh tags in file order."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DiagramError(f"cannot read diagram file {path}: {exc}") from None
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DiagramError(f"{path}: not valid JSON: {exc}") from None
    primitives = load_primitives(document)
    if normalize:
        return geometry.normalize_diagram(primitives)
    return primitives


def write_diagram(path: str | Path, primitives: list[Primitive],
                  units: str = "y-up, arbitrary units") -> None:
    document = {
        "version": DIAGRAM_VERSION,
        "units": units,
        "primitives": [primitive_to_record(p) for p in primitives],
    }
    Path(path).write_text(json.dumps(document, indent=1) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# Solution files
# --------------------------------------------------------------------------

def _jsonable_value(value):
    if isinstance(value, Point):
        return [value.x, value.y]
    if isinstance(value, (bool, int, float, str)) or value is None:
        return value
    if isinstance(value, (DerivedObject, Line, Circle, Polygon, Bezier, Text,
                          EndpointMarker)):
        return solution_node(value)
    return str(value)


def solution_node(obj) -> dict:
    if isinstance(obj, DerivedObject):
        node: dict = {"type": obj.display_type, "tag": obj.tag}
        if obj.slots:
            node["slots"] = {name: _jsonable_value(v) for name, v in obj.slots.items()}
        if obj.members is not None:
            node["members"] = [solution_node(m) for m in obj.members]
        else:
            node["constituents"] = {
                name: (solution_node(v) if v is not None else None)
                for name, v in obj.constituents
            }
        return node
    if isinstance(obj, EndpointMarker):
        return {"endpoint": obj.tag, "line": obj.owner_tag, "which": obj.which}
    node = {"primitive": obj.tag, "kind": obj.kind}
    if obj.source_id is not None:
        node["id"] = obj.source_id
    return node


def solutions_document(forest, grammar_name: str, start_symbol: str,
                       index_build_ms: float, parse_ms: float) -> dict:
    return {
        "version": SOLUTION_VERSION,
        "grammar": grammar_name,
        "start": start_symbol,
        "solution_count": len(forest),
        "solutions": [solution_node(s) for s in forest],
        "timings": {
            "index_build_ms": round(index_build_ms, 3),
            "parse_ms": round(parse_ms, 3),
        },
    }


def write_solutions(path: str | Path, forest, grammar_name: str, start_symbol: str,
                    index_build_ms: float, parse_ms: float) -> dict:
    document = solutions_document(forest, grammar_name, start_symbol,
                                  index_build_ms, parse_ms)
    Path(path).write_text(json.dumps(document, indent=1) + "\n", encoding="utf-8")
    return document


def read_solutions(path: str | Path) -> dict:
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DiagramError(f"cannot read solution file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DiagramError(f"{path}: not valid JSON: {exc}") from None
    return document


def solution_leaf_tags(node: dict) -> set[int]:
    """Primitive tags referenced by a solution record (recursive)."""
    if node is None:
        return set()
    if "primitive" in node:
        return {node["primitive"]}
    if "endpoint" in node:
        return {node["line"]}
    tags: set[int] = set()
    for child in node.get("members", []):
        tags |= solution_leaf_tags(child)
    for child in node.get("constituents", {}).values():
        tags |= solution_leaf_tags(child)
    return tags
