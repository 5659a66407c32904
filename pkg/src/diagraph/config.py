"""Engine configuration: thresholds, tolerances and index parameters.

Every length threshold is expressed in terms of the two characteristic
lengths of a diagram (smallest text height h, diagram width W) so that the
same grammar classifies diagrams of any scale.  The multipliers here are
engine defaults and can be overridden from a key=value config file.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from .errors import DiagramError

CONFIG_ENV_VAR = "DIAGRAPH_CONFIG"


@dataclass(frozen=True)
class EngineConfig:
    angle_tol_deg: float = 5.0     # horizp / vertp / rectanglep tolerance
    short_mult: float = 3.0        # short/small: dimension <= short_mult * h
    long_mult: float = 10.0        # long: length >= max(long_mult*h, long_frac*W)
    long_frac: float = 0.25
    tiny: float | None = None      # default: max(h/2, 2 grid cells)
    very_long: float | None = None  # default: 0.5 * W
    align_level: int = 6           # pyramid level used by alignment relations
    levels: int = 7                # pyramid depth (2^0 .. 2^(levels-1) grids)
    strict_touch: bool = False     # touch also requires bbox intersection
    search_cap: int = 1_000_000    # tuples examined before a rule solve aborts

    def resolved_tiny(self, h: float, cell_size: float) -> float:
        if self.tiny is not None:
            return self.tiny
        return max(h / 2.0, 2.0 * cell_size)

    def resolved_very_long(self, width: float) -> float:
        if self.very_long is not None:
            return self.very_long
        return 0.5 * width


_FLOAT_KEYS = {
    "tiny": "tiny",
    "very_long": "very_long",
    "short_mult": "short_mult",
    "long_mult": "long_mult",
    "long_frac": "long_frac",
    "angle_tol_deg": "angle_tol_deg",
}
_INT_KEYS = {"align_level": "align_level", "levels": "levels", "search_cap": "search_cap"}
_BOOL_KEYS = {"strict_touch": "strict_touch"}


def load_config(path: str | Path, base: EngineConfig | None = None) -> EngineConfig:
    """Read `key = value` overrides from a text file.

    Blank lines and lines starting with `#` are ignored.  Unknown keys are an
    error so that typos do not silently fall back to defaults.
    """
    config = base or EngineConfig()
    overrides: dict[str, object] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" in line:
            key, _, value = line.partition("=")
        else:
            parts = line.split(None, 1)
            if len(parts) != 2:
                raise DiagramError(f"config line {lineno}: expected 'key = value'")
            key, value = parts
        key = key.strip().lower()
        value = value.strip()
        try:
            if key in _FLOAT_KEYS:
                overrides[_FLOAT_KEYS[key]] = float(value)
            elif key in _INT_KEYS:
                overrides[_INT_KEYS[key]] = int(value)
            elif key in _BOOL_KEYS:
                overrides[_BOOL_KEYS[key]] = value.lower() in ("1", "true", "t", "yes")
            else:
                raise DiagramError(f"config line {lineno}: unknown key '{key}'")
        except ValueError as exc:
            raise DiagramError(f"config line {lineno}: bad value for '{key}': {value}") from exc
    return replace(config, **overrides)
