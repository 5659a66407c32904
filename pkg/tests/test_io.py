import json
import xml.etree.ElementTree as ET

import pytest

from diagraph import DiagramError, parse_diagram
from diagraph.diagram_io import (
    read_diagram,
    read_solutions,
    solution_leaf_tags,
    solutions_document,
    write_diagram,
    write_solutions,
)
from diagraph.fixtures import gen_fixture
from diagraph.geometry import Line
from diagraph.overlay import emit_overlay, overlay_boxes


class TestReadDiagram:
    def test_fig2_file_round_trip(self, tmp_path):
        path = tmp_path / "fig2.diag"
        write_diagram(path, gen_fixture("fig2-ticks"))
        prims = read_diagram(path)
        assert len(prims) == 24
        assert all(isinstance(p, Line) for p in prims)
        assert [p.tag for p in prims] == list(range(1, 25))

    def test_single_circle(self, tmp_path):
        path = tmp_path / "one.diag"
        path.write_text(json.dumps({
            "version": 1,
            "primitives": [{"kind": "circle", "center": [10, 10], "radius": 4}],
        }))
        prims = read_diagram(path, normalize=False)
        assert len(prims) == 1 and prims[0].kind == "circle"

    def test_malformed_record_names_index(self, tmp_path):
        path = tmp_path / "bad.diag"
        path.write_text(json.dumps({
            "primitives": [
                {"kind": "line", "p1": [0, 0], "p2": [5, 5]},
                {"kind": "line", "p1": [0, 0, 3], "p2": [5, 5]},
            ],
        }))
        with pytest.raises(DiagramError, match="record 1"):
            read_diagram(path)

    def test_zero_primitives_rejected(self, tmp_path):
        path = tmp_path / "empty.diag"
        path.write_text(json.dumps({"primitives": []}))
        with pytest.raises(DiagramError, match="empty diagram"):
            read_diagram(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DiagramError, match="cannot read"):
            read_diagram(tmp_path / "nope.diag")

    def test_degenerate_line_rejected(self, tmp_path):
        path = tmp_path / "deg.diag"
        path.write_text(json.dumps({
            "primitives": [{"kind": "line", "p1": [1, 1], "p2": [1, 1]}]}))
        with pytest.raises(DiagramError, match="distinct"):
            read_diagram(path)

    def test_write_read_identity_up_to_normalization(self, tmp_path):
        for name in ("fig2-ticks", "fig3-micro", "datagraph4"):
            raw = gen_fixture(name)
            path = tmp_path / f"{name}.diag"
            write_diagram(path, raw)
            loaded = read_diagram(path)  # normalized
            assert len(loaded) == len(raw)
            # Fixtures are already laid out in index space, so normalization
            # moves nothing by more than a grid unit.
            for a, b in zip(raw, loaded):
                assert type(a) is type(b)
                assert abs(a.bbox.min.x - b.bbox.min.x) <= 1.0
                assert abs(a.bbox.max.y - b.bbox.max.y) <= 1.0


class TestFixtures:
    def test_counts(self):
        assert len(gen_fixture("fig2-ticks")) == 24
        assert len(gen_fixture("fig3-micro")) == 5
        assert len(gen_fixture("datagraph4")) == 133

    def test_datagraph_has_all_five_kinds(self):
        kinds = {p.kind for p in gen_fixture("datagraph4")}
        assert kinds == {"line", "circle", "polygon", "bezier", "text"}

    def test_generation_is_deterministic(self, tmp_path):
        a, b = tmp_path / "a.diag", tmp_path / "b.diag"
        write_diagram(a, gen_fixture("datagraph4"))
        write_diagram(b, gen_fixture("datagraph4"))
        assert a.read_bytes() == b.read_bytes()

    def test_unknown_name(self):
        with pytest.raises(DiagramError, match="unknown fixture"):
            gen_fixture("bogus")


class TestSolutionFiles:
    def test_two_solution_g1_file(self, tmp_path, g1, fig2_prims):
        out = parse_diagram(g1, "X-Ticks", fig2_prims)
        path = tmp_path / "sol.json"
        doc = write_solutions(path, out.solutions, "g1", "X-Ticks", 1.25, 2.5)
        loaded = read_solutions(path)
        assert loaded == doc
        assert loaded["solution_count"] == 2
        assert [s["type"] for s in loaded["solutions"]] == ["X-Ticks", "X-Ticks"]
        assert set(loaded["timings"]) == {"index_build_ms", "parse_ms"}

    def test_empty_forest_file(self, tmp_path, g1, fig3_prims):
        out = parse_diagram(g1, "X-Ticks", fig3_prims)
        path = tmp_path / "sol.json"
        write_solutions(path, out.solutions, "g1", "X-Ticks", 0.5, 0.5)
        loaded = read_solutions(path)
        assert loaded["solutions"] == [] and loaded["solution_count"] == 0

    def test_leaves_reference_input_primitives(self, tmp_path, g2, datagraph_prims,
                                               datagraph_outcome):
        doc = solutions_document(datagraph_outcome.solutions, "g2", "XY-Data-Graph",
                                 1.0, 1.0)
        valid = {p.tag for p in datagraph_prims}
        for node in doc["solutions"]:
            tags = solution_leaf_tags(node)
            assert tags and tags <= valid

    def test_slots_serialized_as_points(self, g2, datagraph_prims, datagraph_outcome):
        doc = solutions_document(datagraph_outcome.solutions, "g2", "XY-Data-Graph",
                                 1.0, 1.0)
        axis = doc["solutions"][0]["constituents"]["axis"]
        slot = axis["constituents"]["x-line"]["slots"]["left-endpoint"]
        assert isinstance(slot, list) and len(slot) == 2


class TestOverlay:
    def test_layer_count_matches_solutions(self, tmp_path, g1, fig2_prims):
        out = parse_diagram(g1, "X-Ticks", fig2_prims)
        path = tmp_path / "overlay.svg"
        emit_overlay(fig2_prims, out.solutions, path)
        svg = path.read_text()
        root = ET.fromstring(svg)
        gids = {el.get("id").rsplit("_", 1)[0]
                for el in root.iter() if el.get("id", "").startswith("solution-")}
        assert gids == {"solution-0", "solution-1"}

    def test_empty_forest_base_drawing_only(self, tmp_path, fig3_prims):
        path = tmp_path / "base.svg"
        emit_overlay(fig3_prims, [], path)
        svg = path.read_text()
        assert "solution-" not in svg
        assert path.stat().st_size > 0

    def test_boxes_equal_recomputed_constituent_bboxes(self, datagraph_outcome):
        from diagraph.model import DerivedObject

        boxes = overlay_boxes(datagraph_outcome.solutions)
        assert boxes

        def recompute(obj):
            leaves = []

            def walk(o):
                if isinstance(o, DerivedObject):
                    for part in o.parts():
                        walk(part)
                else:
                    leaves.append(o.bbox)
            walk(obj)
            box = leaves[0]
            for b in leaves[1:]:
                box = box.union(b)
            return box

        index = {}

        def collect(obj):
            if isinstance(obj, DerivedObject):
                index[obj.tag] = obj
                for part in obj.parts():
                    collect(part)

        for sol in datagraph_outcome.solutions:
            collect(sol)
        by_key = {}
        for entry in boxes:
            by_key.setdefault((entry.solution, entry.type_name), []).append(entry.box)
        for sol_idx, sol in enumerate(datagraph_outcome.solutions):
            want = recompute(sol)
            got = [e.box for e in boxes
                   if e.solution == sol_idx and e.type_name == sol.display_type]
            assert len(got) == 1
            assert got[0].min.x == pytest.approx(want.min.x)
            assert got[0].max.y == pytest.approx(want.max.y)
