"""Exception hierarchy shared across the engine."""


class DiagraphError(Exception):
    """Base class for all engine errors."""


class GeometryError(DiagraphError):
    """A geometric operation was applied to an unsuitable object."""


class DiagramError(DiagraphError):
    """A diagram file or primitive record is malformed."""


class IndexError_(DiagraphError):
    """Spatial-index contract violation (duplicate/unknown tag, bad coords)."""


class GrammarSyntaxError(DiagraphError):
    """Source-level grammar error, with position information."""

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class ParseEngineError(DiagraphError):
    """Parse-time contract violation (unknown start symbol, bad slot expr)."""


class SearchLimitError(ParseEngineError):
    """The tuple-examination cap was exceeded while solving a rule."""
