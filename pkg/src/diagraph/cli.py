"""Command-line driver: parse diagrams, inspect indexes, generate fixtures."""
from __future__ import annotations

import argparse
import os
import sys
from importlib import resources
from pathlib import Path

from .config import CONFIG_ENV_VAR, EngineConfig, load_config
from .constraints import GER_NAMES, default_vocabulary
from .diagram_io import read_diagram, write_diagram, write_solutions
from .errors import DiagraphError
from .fixtures import FIXTURE_NAMES, gen_fixture
from .grammar import parse_grammar, validate_grammar
from .parser import parse_diagram, render_trace
from .spatial import build_index


def bundled_grammar_path(name: str) -> Path | None:
    candidate = resources.files("diagraph").joinpath("grammars", name)
    try:
        if candidate.is_file():
            return Path(str(candidate))
    except (OSError, TypeError):
        pass
    return None


def _resolve_grammar(path_arg: str) -> Path:
    path = Path(path_arg)
    if path.exists():
        return path
    bundled = bundled_grammar_path(path.name)
    if bundled is not None:
        return bundled
    raise DiagraphError(f"grammar file not found: {path_arg}")


def _load_engine_config(args) -> EngineConfig:
    config = EngineConfig()
    config_path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
    if config_path:
        if not Path(config_path).exists():
            raise DiagraphError(f"config file not found: {config_path}")
        config = load_config(config_path, config)
    return config


def cmd_parse(args) -> int:
    config = _load_engine_config(args)
    grammar_path = _resolve_grammar(args.grammar)
    grammar = parse_grammar(grammar_path.read_text(encoding="utf-8"))
    diagnostics = validate_grammar(grammar, default_vocabulary(), GER_NAMES)
    if diagnostics:
        for diag in diagnostics:
            print(f"grammar error: {diag}", file=sys.stderr)
        return 2
    diagram = read_diagram(args.diagram)
    outcome = parse_diagram(grammar, args.start, diagram, config=config,
                            trace=args.trace)
    write_solutions(args.out, outcome.solutions, grammar_path.stem, args.start,
                    outcome.index_build_seconds * 1000.0,
                    outcome.parse_seconds * 1000.0)
    if args.overlay:
        from .overlay import emit_overlay

        emit_overlay(diagram, outcome.solutions, args.overlay)
    if args.trace:
        print(render_trace(outcome.trace))
    if args.timing:
        print(f"index_ms={outcome.index_build_seconds * 1000.0:.3f}")
        print(f"parse_ms={outcome.parse_seconds * 1000.0:.3f}")
    print(f"wrote {args.out}: {len(outcome.solutions)} solution(s)")
    return 0


def cmd_index(args) -> int:
    diagram = read_diagram(args.diagram)
    index = build_index(diagram)
    print(f"objects installed: {index.object_count()}")
    print(f"inverse entries: {index.inverse_size()}")
    for stats in index.level_stats():
        print(f"level {stats.level}: grid={stats.grid}x{stats.grid} "
              f"occupied={stats.occupied_cells} entries={stats.entries}")
    return 0


def cmd_gen(args) -> int:
    primitives = gen_fixture(args.name)
    out = args.out or f"{args.name}.diag"
    write_diagram(out, primitives)
    print(f"wrote {out}: {len(primitives)} primitives")
    return 0


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diagraph",
        description="Parse vector-graphics diagrams with constraint grammars.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a diagram against a grammar")
    p.add_argument("--grammar", required=True,
                   help="grammar file (.dg); bundled names g1.dg / g2.dg resolve too")
    p.add_argument("--diagram", required=True, help="diagram file (.diag)")
    p.add_argument("--start", required=True, help="start symbol")
    p.add_argument("--out", required=True, help="solution file to write")
    p.add_argument("--overlay", help="also write an annotated overlay (SVG)")
    p.add_argument("--config", help=f"engine config file (default ${CONFIG_ENV_VAR})")
    p.add_argument("--trace", action="store_true", help="print the rule trace")
    p.add_argument("--timing", action="store_true",
                   help="print index/parse durations as key=value lines")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("index", help="build the spatial index and report occupancy")
    p.add_argument("--diagram", required=True)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("gen", help="generate a bundled fixture diagram")
    p.add_argument("name", help=f"one of: {', '.join(FIXTURE_NAMES)}")
    p.add_argument("--out", help="output path (default <name>.diag)")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DiagraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
