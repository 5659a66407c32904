import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from diagraph import normalize_diagram, parse_grammar
from diagraph.cli import bundled_grammar_path
from diagraph.fixtures import gen_fixture


@pytest.fixture(scope="session")
def g1():
    return parse_grammar(bundled_grammar_path("g1.dg").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def g2():
    return parse_grammar(bundled_grammar_path("g2.dg").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def fig2_prims():
    return normalize_diagram(gen_fixture("fig2-ticks"))


@pytest.fixture(scope="session")
def fig3_prims():
    return normalize_diagram(gen_fixture("fig3-micro"))


@pytest.fixture(scope="session")
def datagraph_prims():
    return normalize_diagram(gen_fixture("datagraph4"))


@pytest.fixture(scope="session")
def datagraph_outcome(g2, datagraph_prims):
    from diagraph import parse_diagram

    return parse_diagram(g2, "XY-Data-Graph", datagraph_prims)
