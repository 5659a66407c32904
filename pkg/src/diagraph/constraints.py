"""The registered constraint vocabulary and its evaluator.

Constraints are s-expressions over bound constituent names.  Evaluation is
pure: it reads the spatial index, the characteristic lengths and the engine
config through an `EvalEnv`.  A type mismatch (say, arc length of a text)
makes the enclosing constraint false and records a note instead of raising,
so grammars stay declarative.  Constraints that mention a null-bound
constituent are vacuously true, which is what lets `:null` rules succeed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import geometry
from .config import EngineConfig
from .errors import IndexError_, ParseEngineError
from .geometry import (
    CELL_SIZE,
    SPACE_EXTENT,
    CharacteristicLengths,
    EndpointMarker,
    Line,
    Point,
)
from .model import DerivedObject, TaggedSet, endpoints_of, resolved_kind
from .spatial import SpatialIndex, beyond, directional_gap, geometric_cells

GER_NAMES = ("near", "horiz-aligned", "vert-aligned", "connected", "same-type")

_DIRECTIONS = {"above": "above", "below": "below", "left": "left", "right": "right",
               "below-nearest": "below", "left-nearest": "left"}
_OPPOSITE = {"above": "below", "below": "above", "left": "right", "right": "left"}


class ConstraintTypeError(Exception):
    """Internal: converted into a false constraint plus a trace note."""


@dataclass
class EvalEnv:
    index: SpatialIndex
    cl: CharacteristicLengths
    config: EngineConfig = field(default_factory=EngineConfig)
    notes: list[str] = field(default_factory=list)

    @property
    def tiny(self) -> float:
        return self.config.resolved_tiny(self.cl.h, CELL_SIZE)

    @property
    def very_long(self) -> float:
        return self.config.resolved_very_long(self.cl.W)

    @property
    def align_level(self) -> int:
        return min(self.config.align_level, self.index.finest)


# --------------------------------------------------------------------------
# Vocabulary
# --------------------------------------------------------------------------

# head -> (min_args, max_args); None means unbounded.
VOCABULARY: dict[str, tuple[int, int | None]] = {
    "horizp": (1, 1),
    "vertp": (1, 1),
    "long": (1, 1),
    "short": (1, 1),
    "small": (1, 1),
    "numeric-textp": (1, 1),
    "rectanglep": (1, 1),
    "touch": (2, 2),
    "above": (2, 2),
    "below": (2, 2),
    "left": (2, 2),
    "right": (2, 2),
    "below-nearest": (2, 2),
    "left-nearest": (2, 2),
    "contain": (2, 2),
    "near": (2, 2),
    "connected": (2, 2),
    "same-type": (2, 2),
    "horiz-aligned": (2, 2),
    "vert-aligned": (2, 2),
    "distance": (2, 2),
    "a-length": (1, 1),
    "left-endpoint": (1, 1),
    "bottom-endpoint": (1, 1),
    "size": (1, 1),
    "number-of": (1, 1),
    "or": (1, None),
    "<": (2, 2),
    ">": (2, 2),
    ">=": (2, 2),
    "<=": (2, 2),
}


def default_vocabulary() -> dict[str, tuple[int, int | None]]:
    return dict(VOCABULARY)


# --------------------------------------------------------------------------
# Expression evaluation
# --------------------------------------------------------------------------

def mentions_null(expr, bindings: dict) -> bool:
    if isinstance(expr, str):
        return expr in bindings and bindings[expr] is None
    if isinstance(expr, tuple):
        return any(mentions_null(e, bindings) for e in expr)
    return False


def eval_constraint(expr, bindings: dict, env: EvalEnv) -> bool:
    """Truth value of a constraint; null mentions are vacuously true and
    type mismatches are false (with a note in env.notes)."""
    if mentions_null(expr, bindings):
        return True
    try:
        return bool(eval_expr(expr, bindings, env))
    except (ConstraintTypeError, geometry.GeometryError) as exc:
        env.notes.append(f"{_fmt(expr)}: {exc}")
        return False


def eval_expr(expr, bindings: dict, env: EvalEnv):
    if isinstance(expr, float):
        return expr
    if isinstance(expr, str):
        if expr in bindings:
            return bindings[expr]
        if expr == "*tiny*":
            return env.tiny
        if expr == "*very-long*":
            return env.very_long
        if expr == "t":
            return True
        if expr == "nil":
            return None
        raise ParseEngineError(f"unbound name '{expr}'")
    if not isinstance(expr, tuple) or not expr:
        raise ParseEngineError(f"malformed expression {expr!r}")
    head = expr[0]
    args = _positional_args(expr)

    if head == "or":
        for arg in args:
            value = eval_expr(arg, bindings, env)
            if value is not None and value is not False:
                return value
        return None
    if head in ("<", ">", ">=", "<="):
        a, b = (_as_number(eval_expr(arg, bindings, env)) for arg in args)
        return {"<": a < b, ">": a > b, ">=": a >= b, "<=": a <= b}[head]
    if head == "distance":
        pa, pb = (_as_point(eval_expr(arg, bindings, env)) for arg in args)
        return geometry.distance(pa, pb)
    if head in ("size", "number-of"):
        return _cardinality(eval_expr(args[0], bindings, env))
    if head == "a-length":
        return geometry.a_length(_as_object(eval_expr(args[0], bindings, env)))
    if head in ("left-endpoint", "bottom-endpoint"):
        return _endpoint_accessor(head, eval_expr(args[0], bindings, env))
    if head in ("horizp", "vertp"):
        obj = _as_object(eval_expr(args[0], bindings, env))
        return geometry.horizp(obj, env.config) if head == "horizp" else geometry.vertp(obj, env.config)
    if head in ("long", "short", "small"):
        obj = _as_object(eval_expr(args[0], bindings, env))
        try:
            return geometry.size_predicate(obj, env.cl, head, env.config)
        except geometry.GeometryError as exc:
            raise ConstraintTypeError(str(exc)) from None
    if head == "numeric-textp":
        return geometry.numeric_textp(eval_expr(args[0], bindings, env))
    if head == "rectanglep":
        return geometry.rectanglep(eval_expr(args[0], bindings, env), env.config)
    if head == "touch":
        a, b = (_as_object(eval_expr(arg, bindings, env)) for arg in args)
        return objects_touch(a, b, env)
    if head in ("above", "below", "left", "right", "below-nearest", "left-nearest"):
        a, b = (_as_object(eval_expr(arg, bindings, env)) for arg in args)
        return beyond(a.bbox, b.bbox, _DIRECTIONS[head])
    if head == "contain":
        a, b = (_as_object(eval_expr(arg, bindings, env)) for arg in args)
        return a.bbox.contains(b.bbox)
    if head in GER_NAMES:
        a, b = (_as_object(eval_expr(arg, bindings, env)) for arg in args)
        return ger_relation(head, env).related(a, b)
    # Fallback: constituent accessor, e.g. (Line self) inside a slot
    # expression picks the Line constituent of the new object.
    if len(args) == 1:
        value = eval_expr(args[0], bindings, env)
        if isinstance(value, DerivedObject):
            try:
                return value.constituent(head)
            except KeyError:
                pass
    raise ParseEngineError(f"unknown constraint head '{head}'")


def _fmt(expr) -> str:
    from .grammar import format_expr

    return format_expr(expr)


def _as_number(value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConstraintTypeError(f"expected a number, got {type(value).__name__}")
    return float(value)


def _as_point(value) -> Point:
    if isinstance(value, Point):
        return value
    if isinstance(value, EndpointMarker):
        return value.point
    raise ConstraintTypeError(f"expected a point, got {type(value).__name__}")


def _as_object(value):
    if value is None or isinstance(value, (bool, float, Point)):
        raise ConstraintTypeError(f"expected a graphical object, got {value!r}")
    return value


def _cardinality(value) -> float:
    if isinstance(value, DerivedObject) and value.members is not None:
        return float(len(value.members))
    if isinstance(value, TaggedSet):
        return float(len(value))
    raise ConstraintTypeError("size/number-of needs a set")


def _endpoint_accessor(which: str, value):
    if isinstance(value, DerivedObject):
        if which in value.slots:
            return value.slots[which]
        raise ConstraintTypeError(f"{value.display_type} has no '{which}' slot")
    if isinstance(value, Line):
        return geometry.left_endpoint(value) if which == "left-endpoint" \
            else geometry.bottom_endpoint(value)
    raise ConstraintTypeError(f"'{which}' needs a line or a slotted object")


def occupied_cells(obj, env: EvalEnv) -> frozenset:
    """Finest-level cells of any object, installed or not (uninstalled
    derived objects resolve through their parts)."""
    try:
        return env.index.cells_of(obj)
    except IndexError_:
        pass
    if isinstance(obj, DerivedObject):
        cells: set = set()
        for part in obj.parts():
            cells |= occupied_cells(part, env)
        return frozenset(cells)
    return frozenset(geometric_cells(obj, env.index.finest))


def objects_touch(a, b, env: EvalEnv) -> bool:
    shared = occupied_cells(a, env) & occupied_cells(b, env)
    if not shared:
        return False
    if env.config.strict_touch:
        return a.bbox.intersects(b.bbox)
    return True


# --------------------------------------------------------------------------
# Generalized equivalence relations
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GERRelation:
    """A reflexive, symmetric relation whose transitive closure partitions a
    set of objects into maximal groups."""

    name: str
    env: EvalEnv

    def related(self, a, b) -> bool:
        if a.tag == b.tag:
            return True
        env = self.env
        if self.name == "near":
            radius = _near_cell_radius(env)
            return _cells_within(env.index.cells_of(a), env.index.cells_of(b), radius)
        if self.name == "connected":
            pa, pb = endpoints_of(a), endpoints_of(b)
            if not pa or not pb:
                return False
            tiny = env.tiny
            return any(geometry.distance(p, q) <= tiny for p in pa for q in pb)
        if self.name == "same-type":
            if resolved_kind(a) != resolved_kind(b):
                return False
            half_h = env.cl.h / 2.0
            return (abs(a.bbox.width - b.bbox.width) <= half_h
                    and abs(a.bbox.height - b.bbox.height) <= half_h)
        if self.name in ("horiz-aligned", "vert-aligned"):
            axis = "horizontal" if self.name == "horiz-aligned" else "vertical"
            groups = env.index.aligned_partition([a, b], axis, env.align_level)
            return len(groups) == 1
        raise ParseEngineError(f"unknown relation '{self.name}'")


def ger_relation(name: str, env: EvalEnv) -> GERRelation:
    if name not in GER_NAMES:
        raise ParseEngineError(f"'{name}' is not a generalized equivalence relation")
    return GERRelation(name, env)


def _near_cell_radius(env: EvalEnv) -> int:
    finest_cell = SPACE_EXTENT / (1 << env.index.finest)
    return max(1, math.ceil(env.tiny / finest_cell))


def _cells_within(cells_a, cells_b, radius: int) -> bool:
    for (i, j) in cells_a:
        for (p, q) in cells_b:
            if abs(i - p) <= radius and abs(j - q) <= radius:
                return True
    return False


def ger_partition(objects, relation: GERRelation, env: EvalEnv) -> list[list]:
    """Maximal sets: connected components of the relation graph.  The result
    is a true partition ordered by smallest member tag."""
    if relation.name in ("horiz-aligned", "vert-aligned"):
        axis = "horizontal" if relation.name == "horiz-aligned" else "vertical"
        return env.index.aligned_partition(list(objects), axis, env.align_level)

    objs = sorted(objects, key=lambda o: o.tag)
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

    if relation.name == "near":
        # The index already knows cell adjacency; link each object to the
        # in-set objects occupying nearby cells.
        radius = _near_cell_radius(env)
        pos = {obj.tag: k for k, obj in enumerate(objs)}
        for k, obj in enumerate(objs):
            for other in env.index.objects_near(obj, radius):
                if other.tag in pos:
                    union(k, pos[other.tag])
    else:
        for i in range(len(objs)):
            for j in range(i + 1, len(objs)):
                if relation.related(objs[i], objs[j]):
                    union(i, j)
    groups: dict[int, list] = {}
    for k, obj in enumerate(objs):
        groups.setdefault(find(k), []).append(obj)
    return sorted(groups.values(), key=lambda g: g[0].tag)


# --------------------------------------------------------------------------
# Context filtering
# --------------------------------------------------------------------------

def filter_context(relation_expr: tuple, bindings: dict, context: TaggedSet,
                   env: EvalEnv) -> TaggedSet:
    """Candidate set for a `(rel ... ? ...)` context expression: generate
    from the spatial index, then intersect with the inherited context."""
    head = relation_expr[0]
    positional = _positional_args(relation_expr)
    strip = _strip_flag(relation_expr)
    try:
        q_pos = positional.index("?")
    except ValueError:
        raise ParseEngineError(f"relation {_fmt(relation_expr)} has no '?'") from None
    anchor_exprs = [a for k, a in enumerate(positional) if k != q_pos]
    if len(anchor_exprs) != 1:
        raise ParseEngineError(f"relation {_fmt(relation_expr)} needs one anchor")
    anchor = eval_expr(anchor_exprs[0], bindings, env)
    if anchor is None:
        return TaggedSet()

    if head == "touch":
        if isinstance(anchor, Point):
            candidates = env.index.objects_at_point(anchor)
        elif isinstance(anchor, EndpointMarker):
            candidates = env.index.objects_at_point(anchor.point).without_tag(anchor.tag)
        else:
            candidates = env.index.objects_touching(anchor)
            if env.config.strict_touch:
                candidates = TaggedSet(
                    o for o in candidates if o.bbox.intersects(anchor.bbox))
        return candidates.intersect(context)

    if head == "contain":
        inner_is_candidate = q_pos > 0
        result = TaggedSet()
        if isinstance(anchor, Point):
            raise ParseEngineError("contain needs an object anchor")
        for obj in context:
            if obj.tag == getattr(anchor, "tag", None):
                continue
            ok = anchor.bbox.contains(obj.bbox) if inner_is_candidate \
                else obj.bbox.contains(anchor.bbox)
            if ok:
                result.add(obj)
        return result

    if head in _DIRECTIONS:
        direction = _DIRECTIONS[head]
        if q_pos != 0:
            direction = _OPPOSITE[direction]
        if isinstance(anchor, Point):
            anchor_box = geometry.Rect(anchor, anchor)
            candidates = env.index.directional_query(anchor_box, direction, strip)
        else:
            candidates = env.index.directional_query(anchor, direction, strip)
        candidates = candidates.intersect(context)
        if head in ("below-nearest", "left-nearest"):
            anchor_obj = anchor if not isinstance(anchor, Point) else geometry.Rect(anchor, anchor)
            return nearest_band(candidates, anchor_obj, direction, env)
        return candidates

    if head in GER_NAMES:
        if isinstance(anchor, Point):
            raise ParseEngineError(f"'{head}' needs an object anchor")
        if head == "near":
            candidates = env.index.objects_near(anchor, _near_cell_radius(env))
            return candidates.intersect(context)
        relation = ger_relation(head, env)
        result = TaggedSet()
        for obj in context:
            if obj.tag != anchor.tag and relation.related(anchor, obj):
                result.add(obj)
        return result

    raise ParseEngineError(f"'{head}' cannot generate a context")


def _positional_args(expr: tuple) -> list:
    """Arguments of a relation form, with `:keyword value` pairs removed."""
    args = []
    items = list(expr[1:])
    k = 0
    while k < len(items):
        item = items[k]
        if isinstance(item, str) and item.startswith(":"):
            k += 2  # keyword and its value
            continue
        args.append(item)
        k += 1
    return args


def _strip_flag(expr: tuple) -> bool:
    items = list(expr)
    for k, item in enumerate(items):
        if item == ":strip":
            if k + 1 < len(items):
                value = items[k + 1]
                return not (value == "nil" or value is None)
            return True
    return False


def nearest_band(candidates: TaggedSet, anchor, direction: str, env: EvalEnv) -> TaggedSet:
    """Keep the candidates closest to the anchor on the given side: gap at
    most the minimum gap plus one text height."""
    anchor_box = anchor if isinstance(anchor, geometry.Rect) else anchor.bbox
    gaps = {obj.tag: directional_gap(obj.bbox, anchor_box, direction) for obj in candidates}
    if not gaps:
        return TaggedSet()
    limit = min(gaps.values()) + env.cl.h
    return TaggedSet(obj for obj in candidates if gaps[obj.tag] <= limit)
