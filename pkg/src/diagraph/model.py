"""Tagged object sets and derived (rule-built) graphical objects."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .geometry import Line, Bezier, Point, Rect

# Cumulative element visits across TaggedSet binary operations; tests use it
# to check the linear-time bound.
VISIT_COUNTER = {"visits": 0}


class TaggedSet:
    """A set of graphical objects keyed by tag, iterated in ascending tag
    order.  Binary operations walk each operand at most once."""

    __slots__ = ("_items",)

    def __init__(self, objects: Iterable = ()) -> None:
        self._items: dict[int, object] = {}
        for obj in objects:
            self._items[obj.tag] = obj

    def add(self, obj) -> None:
        self._items[obj.tag] = obj

    def __len__(self) -> int:
        return len(self._items)

    def __bool__(self) -> bool:
        return bool(self._items)

    def __contains__(self, obj) -> bool:
        tag = obj if isinstance(obj, int) else obj.tag
        return tag in self._items

    def __iter__(self) -> Iterator:
        for tag in sorted(self._items):
            yield self._items[tag]

    def tags(self) -> frozenset[int]:
        return frozenset(self._items)

    def get(self, tag: int):
        return self._items.get(tag)

    def intersect(self, other: "TaggedSet") -> "TaggedSet":
        small, large = (self, other) if len(self) <= len(other) else (other, self)
        VISIT_COUNTER["visits"] += len(small)
        result = TaggedSet()
        for tag, obj in small._items.items():
            if tag in large._items:
                result._items[tag] = obj
        return result

    def union(self, other: "TaggedSet") -> "TaggedSet":
        VISIT_COUNTER["visits"] += len(self) + len(other)
        result = TaggedSet()
        result._items.update(self._items)
        result._items.update(other._items)
        return result

    def difference(self, other: "TaggedSet") -> "TaggedSet":
        VISIT_COUNTER["visits"] += len(self)
        result = TaggedSet()
        for tag, obj in self._items.items():
            if tag not in other._items:
                result._items[tag] = obj
        return result

    def without_tag(self, tag: int) -> "TaggedSet":
        result = TaggedSet()
        result._items.update(self._items)
        result._items.pop(tag, None)
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, TaggedSet):
            return NotImplemented
        return self._items.keys() == other._items.keys()

    def __repr__(self) -> str:
        return f"TaggedSet({sorted(self._items)})"


@dataclass(eq=False)
class DerivedObject:
    """An LHS instance: a full graphical object built from constituents.

    Ordinary rules fill `constituents` (name -> object or None for a null
    binding); set rules fill `members`.  The bounding box is synthesized
    from the non-null parts, and `slots` holds additional-slot values.
    """

    tag: int
    type_name: str                # canonical (lower-case) LHS name
    display_type: str             # LHS name as written in the grammar
    bbox: Rect
    constituents: tuple[tuple[str, object | None], ...] = ()
    members: tuple | None = None
    slots: dict[str, object] = field(default_factory=dict)

    kind = "derived"

    def constituent(self, name: str):
        for key, value in self.constituents:
            if key == name:
                return value
        raise KeyError(name)

    def constituent_names(self) -> list[str]:
        return [key for key, _ in self.constituents]

    def parts(self) -> list:
        """Non-null children (constituent values or set members)."""
        if self.members is not None:
            return list(self.members)
        return [value for _, value in self.constituents if value is not None]

    @property
    def cardinality(self) -> int:
        if self.members is None:
            raise ValueError(f"{self.display_type} is not a set object")
        return len(self.members)

    def __repr__(self) -> str:
        if self.members is not None:
            inner = "{" + ",".join(str(m.tag) for m in self.members) + "}"
        else:
            inner = ",".join(
                f"{k}={'null' if v is None else v.tag}" for k, v in self.constituents
            )
        return f"<{self.display_type}#{self.tag} {inner}>"


def leaf_tags(obj) -> frozenset[int]:
    """Tags of the primitive-level objects under `obj` (itself, for a
    primitive or endpoint marker)."""
    if isinstance(obj, DerivedObject):
        tags: set[int] = set()
        for part in obj.parts():
            tags.update(leaf_tags(part))
        return frozenset(tags)
    return frozenset((obj.tag,))


def resolved_kind(obj) -> str:
    """The underlying primitive kind when an object bottoms out in a single
    primitive, else its type name.  Used by the same-type relation."""
    if isinstance(obj, DerivedObject):
        parts = obj.parts()
        if len(parts) == 1:
            return resolved_kind(parts[0])
        return obj.type_name
    return obj.kind


def endpoints_of(obj) -> list[Point]:
    """Connection points used by the connected relation."""
    if isinstance(obj, Line):
        return [obj.p1, obj.p2]
    if isinstance(obj, Bezier):
        return [obj.start, obj.end]
    return []


def representative_points(obj) -> list[Point]:
    """Alignment representatives: line endpoints where available, otherwise
    the bounding-box center."""
    if isinstance(obj, Line):
        return [obj.p1, obj.p2]
    from .geometry import EndpointMarker

    if isinstance(obj, EndpointMarker):
        return [obj.point]
    return [obj.bbox.center]
