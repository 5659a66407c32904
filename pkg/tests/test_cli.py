import json

import pytest

from diagraph.cli import main
from diagraph.diagram_io import read_solutions, write_diagram
from diagraph.fixtures import gen_fixture


@pytest.fixture()
def fig2_file(tmp_path):
    path = tmp_path / "fig2.diag"
    write_diagram(path, gen_fixture("fig2-ticks"))
    return path


@pytest.fixture()
def fig3_file(tmp_path):
    path = tmp_path / "fig3.diag"
    write_diagram(path, gen_fixture("fig3-micro"))
    return path


class TestParseCommand:
    def test_g1_fig2_writes_two_solutions(self, tmp_path, fig2_file, capsys):
        out = tmp_path / "sol.json"
        code = main(["parse", "--grammar", "g1.dg", "--diagram", str(fig2_file),
                     "--start", "X-Ticks", "--out", str(out)])
        assert code == 0
        doc = read_solutions(out)
        assert doc["solution_count"] == 2
        assert doc["grammar"] == "g1" and doc["start"] == "X-Ticks"

    def test_g2_datagraph_four_solutions_with_overlay(self, tmp_path, capsys):
        diag = tmp_path / "dg.diag"
        write_diagram(diag, gen_fixture("datagraph4"))
        out = tmp_path / "sol.json"
        overlay = tmp_path / "overlay.svg"
        code = main(["parse", "--grammar", "g2.dg", "--diagram", str(diag),
                     "--start", "XY-Data-Graph", "--out", str(out),
                     "--overlay", str(overlay), "--timing"])
        assert code == 0
        assert read_solutions(out)["solution_count"] == 4
        assert overlay.exists() and overlay.stat().st_size > 0
        lines = capsys.readouterr().out.splitlines()
        timing = [l for l in lines if "=" in l]
        assert any(l.startswith("index_ms=") for l in timing)
        assert any(l.startswith("parse_ms=") for l in timing)

    def test_zero_solutions_still_exit_zero(self, tmp_path, fig3_file):
        out = tmp_path / "sol.json"
        code = main(["parse", "--grammar", "g1.dg", "--diagram", str(fig3_file),
                     "--start", "X-Ticks", "--out", str(out)])
        assert code == 0
        assert read_solutions(out)["solution_count"] == 0

    def test_missing_grammar_file_exits_nonzero(self, tmp_path, fig2_file, capsys):
        code = main(["parse", "--grammar", "missing-grammar.dg",
                     "--diagram", str(fig2_file),
                     "--start", "X-Ticks", "--out", str(tmp_path / "x.json")])
        assert code != 0
        assert "missing-grammar.dg" in capsys.readouterr().err

    def test_missing_diagram_file_exits_nonzero(self, tmp_path, capsys):
        code = main(["parse", "--grammar", "g1.dg",
                     "--diagram", str(tmp_path / "ghost.diag"),
                     "--start", "X-Ticks", "--out", str(tmp_path / "x.json")])
        assert code != 0
        assert "ghost.diag" in capsys.readouterr().err

    def test_trace_flag_prints_rule_lines(self, tmp_path, fig3_file, capsys):
        out = tmp_path / "sol.json"
        code = main(["parse", "--grammar", "g1.dg", "--diagram", str(fig3_file),
                     "--start", "X-Ticks", "--out", str(out), "--trace"])
        assert code == 0
        trace = capsys.readouterr().out
        assert "enter X-Ticks" in trace
        assert "reject" in trace

    def test_config_override(self, tmp_path, fig2_file, capsys):
        cfg = tmp_path / "engine.cfg"
        # A huge short multiplier turns the long scale lines into "ticks"
        # candidates too; the parse still runs and succeeds.
        cfg.write_text("angle_tol_deg = 5\nshort_mult = 3\n")
        out = tmp_path / "sol.json"
        code = main(["parse", "--grammar", "g1.dg", "--diagram", str(fig2_file),
                     "--start", "X-Ticks", "--out", str(out),
                     "--config", str(cfg)])
        assert code == 0
        assert read_solutions(out)["solution_count"] == 2

    def test_bad_config_key_rejected(self, tmp_path, fig2_file, capsys):
        cfg = tmp_path / "engine.cfg"
        cfg.write_text("wibble = 3\n")
        code = main(["parse", "--grammar", "g1.dg", "--diagram", str(fig2_file),
                     "--start", "X-Ticks", "--out", str(tmp_path / "x.json"),
                     "--config", str(cfg)])
        assert code != 0

    def test_config_from_environment(self, tmp_path, fig2_file, monkeypatch):
        cfg = tmp_path / "engine.cfg"
        cfg.write_text("align_level = 6\n")
        monkeypatch.setenv("DIAGRAPH_CONFIG", str(cfg))
        out = tmp_path / "sol.json"
        assert main(["parse", "--grammar", "g1.dg", "--diagram", str(fig2_file),
                     "--start", "X-Ticks", "--out", str(out)]) == 0


class TestIndexCommand:
    def test_fig3_reports_fifteen_objects(self, fig3_file, capsys):
        assert main(["index", "--diagram", str(fig3_file)]) == 0
        out = capsys.readouterr().out
        assert "objects installed: 15" in out
        assert "inverse entries: 15" in out
        assert "level 6: grid=64x64" in out

    def test_occupancy_consistent_with_inverse(self, fig3_file, capsys):
        from diagraph.diagram_io import read_diagram
        from diagraph.spatial import build_index

        index = build_index(read_diagram(fig3_file))
        finest = index.level_stats()[-1]
        total_from_inverse = sum(len(index.cells_of(o)) for o in index.all_objects())
        assert finest.entries == total_from_inverse


class TestGenCommand:
    def test_gen_fig2(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["gen", "fig2-ticks"]) == 0
        doc = json.loads((tmp_path / "fig2-ticks.diag").read_text())
        assert len(doc["primitives"]) == 24

    def test_gen_datagraph(self, tmp_path):
        out = tmp_path / "dg.diag"
        assert main(["gen", "datagraph4", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert len(doc["primitives"]) == 133

    def test_gen_bogus_name(self, tmp_path, capsys):
        assert main(["gen", "bogus", "--out", str(tmp_path / "x.diag")]) != 0
        assert "unknown fixture" in capsys.readouterr().err
