"""Annotated overlay rendering: the diagram in gray plus one colored layer
per solution outlining constituent bounding boxes."""
from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import Circle as MplCircle
from matplotlib.patches import Polygon as MplPolygon
from matplotlib.patches import Rectangle as MplRectangle

from .geometry import SPACE_EXTENT, Bezier, Circle, Line, Polygon, Rect, Text
from .model import DerivedObject

BASE_COLOR = "0.55"
SOLUTION_COLORS = ("tab:red", "tab:blue", "tab:green", "tab:purple",
                   "tab:orange", "tab:cyan", "tab:brown", "tab:pink")


@dataclass(frozen=True)
class OverlayBox:
    solution: int
    type_name: str
    box: Rect


def overlay_boxes(forest) -> list[OverlayBox]:
    """One box per derived object in each solution tree, depth-first."""
    boxes: list[OverlayBox] = []

    def walk(obj, solution: int) -> None:
        if not isinstance(obj, DerivedObject):
            return
        boxes.append(OverlayBox(solution, obj.display_type, obj.bbox))
        for part in obj.parts():
            walk(part, solution)

    for i, solution in enumerate(forest):
        walk(solution, i)
    return boxes


def _draw_primitive(ax, prim) -> None:
    if isinstance(prim, Line):
        ax.plot([prim.p1.x, prim.p2.x], [prim.p1.y, prim.p2.y],
                color=BASE_COLOR, linewidth=1.0)
    elif isinstance(prim, Circle):
        ax.add_patch(MplCircle((prim.center.x, prim.center.y), prim.radius,
                               fill=False, edgecolor=BASE_COLOR, linewidth=1.0))
    elif isinstance(prim, Polygon):
        ax.add_patch(MplPolygon([(v.x, v.y) for v in prim.vertices],
                                closed=prim.closed, fill=False,
                                edgecolor=BASE_COLOR, linewidth=1.0))
    elif isinstance(prim, Bezier):
        pts = prim.polyline()
        ax.plot([p.x for p in pts], [p.y for p in pts],
                color=BASE_COLOR, linewidth=1.0)
    elif isinstance(prim, Text):
        ax.text(prim.anchor.x, prim.anchor.y, prim.string, color=BASE_COLOR,
                fontsize=7,
                rotation=90 if prim.orientation == "vertical" else 0,
                va="bottom", ha="left")


def emit_overlay(diagram, forest, path) -> list[OverlayBox]:
    """Render the diagram plus per-solution layers to a vector-graphics
    file (format chosen by the path suffix, SVG by default)."""
    boxes = overlay_boxes(forest)
    fig, ax = plt.subplots(figsize=(10, 10))
    ax.set_aspect("equal")
    ax.set_xlim(-100, SPACE_EXTENT + 100)
    ax.set_ylim(-100, SPACE_EXTENT + 100)
    ax.axis("off")
    for prim in diagram:
        _draw_primitive(ax, prim)
    for i in range(len(forest)):
        color = SOLUTION_COLORS[i % len(SOLUTION_COLORS)]
        for entry in boxes:
            if entry.solution != i:
                continue
            rect = MplRectangle(
                (entry.box.min.x, entry.box.min.y),
                max(entry.box.width, 8.0), max(entry.box.height, 8.0),
                fill=False, edgecolor=color, linewidth=0.9, alpha=0.9)
            rect.set_gid(f"solution-{i}")
            ax.add_patch(rect)
            label = ax.annotate(entry.type_name,
                                (entry.box.min.x, entry.box.max.y),
                                color=color, fontsize=5, va="bottom")
            label.set_gid(f"solution-{i}")
    fig.savefig(path)
    plt.close(fig)
    return boxes
