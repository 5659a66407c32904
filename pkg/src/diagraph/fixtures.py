"""Deterministic synthetic diagrams used by the test suite and the CLI.

All three fixtures are laid out directly in the engine's index space with
their union box pinned to the origin and a width of 8191 units, so
normalization is the identity and cell arithmetic in tests stays exact.

fig2-ticks   24 lines in five regions: a long line with seven attached and
             two detached ticks, a second line with four ticks, a third
             with only two, three long vertical lines, and three
             free-floating aligned ticks.
fig3-micro   five lines: a long horizontal line D, two short ticks B and C
             hanging from it, a vertical line A and a diagonal E far away.
datagraph4   a 2x2 panel data graph of 133 primitives: axis pairs, ticks,
             shared numeric tick labels per column/row, two data curves per
             panel with point markers, and one shared title per axis.
"""
from __future__ import annotations

from .errors import DiagramError
from .geometry import (
    HORIZONTAL,
    VERTICAL,
    Bezier,
    Circle,
    Line,
    Point,
    Polygon,
    Primitive,
    Text,
)

FIXTURE_NAMES = ("fig2-ticks", "fig3-micro", "datagraph4")

TEXT_HEIGHT = 120.0
TICK_LEN = 280.0
MARKER_HALF = 45.0


class _Builder:
    def __init__(self) -> None:
        self.primitives: list[Primitive] = []

    def _tag(self) -> int:
        return len(self.primitives) + 1

    def line(self, x1, y1, x2, y2, sid) -> Line:
        prim = Line(self._tag(), Point(x1, y1), Point(x2, y2), sid)
        self.primitives.append(prim)
        return prim

    def text(self, string, x, y, sid, orientation=HORIZONTAL, height=TEXT_HEIGHT) -> Text:
        prim = Text(self._tag(), string, Point(x, y), height, orientation, sid)
        self.primitives.append(prim)
        return prim

    def circle(self, x, y, sid, r=MARKER_HALF) -> Circle:
        prim = Circle(self._tag(), Point(x, y), r, sid)
        self.primitives.append(prim)
        return prim

    def square(self, x, y, sid, half=MARKER_HALF) -> Polygon:
        prim = Polygon(
            self._tag(),
            (Point(x - half, y - half), Point(x + half, y - half),
             Point(x + half, y + half), Point(x - half, y + half)),
            True, sid)
        self.primitives.append(prim)
        return prim

    def curve(self, samples: list[Point], sid) -> Bezier:
        segs = []
        for a, b in zip(samples, samples[1:]):
            c1 = Point(a.x + (b.x - a.x) / 3.0, a.y + (b.y - a.y) / 3.0)
            c2 = Point(a.x + 2.0 * (b.x - a.x) / 3.0, a.y + 2.0 * (b.y - a.y) / 3.0)
            segs.append((a, c1, c2, b))
        prim = Bezier(self._tag(), tuple(segs), sid)
        self.primitives.append(prim)
        return prim


def fig2_ticks() -> list[Primitive]:
    b = _Builder()
    # Region a: the detached pair sits left of the line and never shares a
    # cell with it; the seven attached ticks stand on the line.
    b.line(0, 6000, 0, 6320, "a-detached-1")
    b.line(400, 6000, 400, 6320, "a-detached-2")
    b.line(1500, 6000, 6500, 6000, "a-line")
    for k in range(7):
        x = 2200 + 550 * k
        b.line(x, 6000, x, 6320, f"a-tick-{k + 1}")
    # Region b: four ticks on their own line, lower on the page.
    b.line(1500, 3500, 5500, 3500, "b-line")
    for k in range(4):
        x = 2200 + 700 * k
        b.line(x, 3500, x, 3820, f"b-tick-{k + 1}")
    # Region c: only two ticks.
    b.line(1500, 1200, 4500, 1200, "c-line")
    b.line(2300, 1200, 2300, 1520, "c-tick-1")
    b.line(3100, 1200, 3100, 1520, "c-tick-2")
    # Region d: three long vertical lines.
    b.line(7300, 4000, 7300, 6500, "d-line-1")
    b.line(7745, 4000, 7745, 6500, "d-line-2")
    b.line(8191, 4000, 8191, 6500, "d-line-3")
    # Region e: three aligned ticks with no line to attach to.
    b.line(6800, 0, 6800, 320, "e-tick-1")
    b.line(7200, 0, 7200, 320, "e-tick-2")
    b.line(7600, 0, 7600, 320, "e-tick-3")
    return b.primitives


def fig3_micro() -> list[Primitive]:
    b = _Builder()
    b.line(0, 0, 0, 3000, "A")            # vertical, away from D
    b.line(2500, 2100, 2500, 1780, "B")    # tick below D; first endpoint on D
    b.line(3300, 2100, 3300, 1780, "C")
    b.line(1000, 2100, 6000, 2100, "D")    # the only long horizontal line
    b.line(6800, 3000, 8191, 4391, "E")    # 45 degree diagonal
    return b.primitives


# Panel geometry for datagraph4.  Columns share x tick labels (placed below
# the bottom row) and rows share y tick labels (placed left of the left
# column); the two axis titles are shared by all four panels.
_COL_X = ((700.0, 3900.0), (4400.0, 8191.0))
_ROW_Y = ((550.0, 3400.0), (4850.0, 7700.0))
_XTICK_FRACS = (0.15, 0.30, 0.45, 0.60, 0.75)
_YTICK_FRACS = (0.20, 0.40, 0.60, 0.80)
_XLABELS = ("0.0", "0.5", "1.0", "1.5", "2.0")
_YLABELS = ("0.2", "0.4", "0.6", "0.8")
_CURVE_SHAPES = (
    (0.05, 0.55, 0.15, 0.70, 0.25, 0.85, 0.40, 0.95, 0.60),
    (0.90, 0.35, 0.80, 0.20, 0.70, 0.10, 0.55, 0.05, 0.30),
)
_MARKERS_ON_SECOND_CURVE = (8, 7, 7, 7)  # first curve always carries 8


def _curve_samples(col: int, row: int, shape) -> list[Point]:
    x0, x1 = _COL_X[col]
    y0, y1 = _ROW_Y[row]
    lo = y0 + 320.0
    span = (y1 - y0) - 440.0
    xs = [x0 + 260.0 + (x1 - x0 - 520.0) * i / (len(shape) - 1) for i in range(len(shape))]
    return [Point(x, lo + span * t) for x, t in zip(xs, shape)]


def datagraph4() -> list[Primitive]:
    b = _Builder()
    for row in range(2):
        for col in range(2):
            panel = row * 2 + col
            x0, x1 = _COL_X[col]
            y0, y1 = _ROW_Y[row]
            b.line(x0, y0, x1, y0, f"p{panel}-x-line")
            b.line(x0, y0, x0, y1, f"p{panel}-y-line")
            for k, frac in enumerate(_XTICK_FRACS):
                x = x0 + frac * (x1 - x0)
                b.line(x, y0, x, y0 + TICK_LEN, f"p{panel}-xtick-{k + 1}")
            for k, frac in enumerate(_YTICK_FRACS):
                y = y0 + frac * (y1 - y0)
                b.line(x0, y, x0 + TICK_LEN, y, f"p{panel}-ytick-{k + 1}")
            curves = [
                b.curve(_curve_samples(col, row, shape), f"p{panel}-curve-{ci + 1}")
                for ci, shape in enumerate(_CURVE_SHAPES)
            ]
            # One marker shape per panel, so its data points form a single
            # same-type cluster.
            round_markers = panel % 2 == 0
            counts = (8, _MARKERS_ON_SECOND_CURVE[panel])
            n = 0
            for ci, count in enumerate(counts):
                samples = _curve_samples(col, row, _CURVE_SHAPES[ci])
                for point in samples[:count]:
                    n += 1
                    sid = f"p{panel}-marker-{n}"
                    if round_markers:
                        b.circle(point.x, point.y, sid)
                    else:
                        b.square(point.x, point.y, sid)
    # Column x tick labels, below the bottom panels.
    for col in range(2):
        x0, x1 = _COL_X[col]
        for k, frac in enumerate(_XTICK_FRACS):
            x = x0 + frac * (x1 - x0)
            b.text(_XLABELS[k], x - 108.0, 280.0, f"col{col}-xlabel-{k + 1}")
    # Row y tick labels, left of the left panels.
    for row in range(2):
        y0, y1 = _ROW_Y[row]
        for k, frac in enumerate(_YTICK_FRACS):
            y = y0 + frac * (y1 - y0)
            b.text(_YLABELS[k], 302.0, y - 60.0, f"row{row}-ylabel-{k + 1}")
    b.text("Elapsed Time", 3664.0, 0.0, "x-title")
    b.text("Response Fraction", 0.0, 2800.0, "y-title", orientation=VERTICAL)
    return b.primitives


_FIXTURES = {
    "fig2-ticks": fig2_ticks,
    "fig3-micro": fig3_micro,
    "datagraph4": datagraph4,
}


def gen_fixture(name: str) -> list[Primitive]:
    try:
        builder = _FIXTURES[name]
    except KeyError:
        raise DiagramError(
            f"unknown fixture '{name}' (choose from {', '.join(FIXTURE_NAMES)})"
        ) from None
    return builder()
