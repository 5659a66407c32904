"""diagraph: constraint-grammar parsing of vector-graphics diagrams.

The engine analyzes a flat collection of graphics primitives (lines,
circles, polygons, curves, text) against declarative rule grammars.  A
pyramidal spatial index makes touch, alignment, containment and directional
queries cheap, and set-valued rules with generalized equivalence relations
collapse repetitive structure (tick marks, point markers) into maximal
groups, so realistically sized diagrams parse quickly.
"""
from .config import EngineConfig, load_config
from .constraints import EvalEnv, GER_NAMES, default_vocabulary, ger_partition, ger_relation
from .errors import (
    DiagramError,
    DiagraphError,
    GeometryError,
    GrammarSyntaxError,
    ParseEngineError,
    SearchLimitError,
)
from .geometry import (
    Bezier,
    CharacteristicLengths,
    Circle,
    EndpointMarker,
    Line,
    Point,
    Polygon,
    Rect,
    Text,
    characteristic_lengths,
    normalize_diagram,
)
from .grammar import (
    Diagnostic,
    Grammar,
    OrdinaryRule,
    SetRule,
    parse_grammar,
    pretty_print,
    rule_metadata,
    validate_grammar,
)
from .model import DerivedObject, TaggedSet, leaf_tags
from .parser import ParseOutcome, parse_diagram, render_trace, solve
from .spatial import SpatialIndex, build_index

__version__ = "0.1.0"

__all__ = [
    "Bezier",
    "CharacteristicLengths",
    "Circle",
    "DerivedObject",
    "Diagnostic",
    "DiagramError",
    "DiagraphError",
    "EndpointMarker",
    "EngineConfig",
    "EvalEnv",
    "GER_NAMES",
    "GeometryError",
    "Grammar",
    "GrammarSyntaxError",
    "Line",
    "OrdinaryRule",
    "ParseEngineError",
    "ParseOutcome",
    "Point",
    "Polygon",
    "Rect",
    "SearchLimitError",
    "SetRule",
    "SpatialIndex",
    "TaggedSet",
    "Text",
    "build_index",
    "characteristic_lengths",
    "default_vocabulary",
    "ger_partition",
    "ger_relation",
    "leaf_tags",
    "load_config",
    "normalize_diagram",
    "parse_diagram",
    "parse_grammar",
    "pretty_print",
    "render_trace",
    "rule_metadata",
    "solve",
    "validate_grammar",
]
