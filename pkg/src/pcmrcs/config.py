"""JSON run configuration: strict parsing into domain objects.

Units at the boundary are mm and GHz. Unknown keys anywhere are an error.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .geometry import Handedness, Material, StackUp, UnitCellGeometry, build_unit_cell
from .solver import SolverConfig

BLOCKS = ("geometry", "stack", "solver", "layout", "sweep", "optimize", "output")

_KEYS = {
    "geometry": {"period", "major_axis", "minor_axis", "handedness"},
    "stack": {"material", "eps_r", "tan_delta", "h", "t_m"},
    "solver": {f.name for f in fields(SolverConfig)},
    "layout": {"tiles_x", "tiles_y", "cells_per_tile", "antenna_region", "converter"},
    "sweep": {"band", "n_freq", "freq", "incident_pol", "theta_step", "phi_step", "theta_max", "samples_per_cell"},
    "optimize": {"band", "threshold", "budget", "engine", "rel_bounds", "bounds", "n_freq"},
    "output": {"dir"},
}
_REQUIRED = {
    "geometry": {"period", "major_axis", "minor_axis"},
    "stack": {"eps_r", "h"},
    "layout": {"tiles_x", "tiles_y"},
}

BUILTIN = {"paper": "paper.json"}


@dataclass(frozen=True)
class RunConfig:
    raw: dict

    def has(self, block: str) -> bool:
        return block in self.raw

    def block(self, name: str) -> dict:
        if name not in self.raw:
            raise ConfigError(f"config needs a '{name}' block for this command")
        return self.raw[name]

    def require(self, *names: str) -> None:
        for n in names:
            self.block(n)

    @property
    def content_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.raw).encode()).hexdigest()

    def stack(self) -> StackUp:
        s = self.block("stack")
        try:
            mat = Material(s.get("material", "substrate"), float(s["eps_r"]), float(s.get("tan_delta", 0.0)))
            return StackUp(mat, float(s["h"]), float(s.get("t_m", 0.0)))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"stack: {e}") from None

    def cell(self) -> UnitCellGeometry:
        """Unit cell; geometry errors (FIT_ERROR, AXIS_ERROR) propagate as computation errors."""
        g = self.block("geometry")
        try:
            hand = Handedness(g.get("handedness", "UNIT"))
        except ValueError:
            raise ConfigError(f"geometry.handedness must be UNIT or MIRROR, got {g.get('handedness')!r}") from None
        return build_unit_cell(float(g["period"]), float(g["major_axis"]), float(g["minor_axis"]), self.stack(), hand)

    def solver(self) -> SolverConfig:
        try:
            return SolverConfig(**self.raw.get("solver", {}))
        except TypeError as e:
            raise ConfigError(f"solver: {e}") from None

    def sweep(self) -> dict:
        return self.raw.get("sweep", {})

    def output_dir(self, override: str | None = None) -> Path:
        if override:
            return Path(override)
        return Path(self.raw.get("output", {}).get("dir", "pcmrcs-out"))

    def is_paper_reference(self) -> bool:
        ref = load_builtin("paper").raw
        return all(self.raw.get(b) == ref.get(b) for b in ("geometry", "stack"))


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def validate_doc(doc) -> None:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    for name, block in doc.items():
        if name not in _KEYS:
            raise ConfigError(f"unknown config block '{name}' (allowed: {', '.join(BLOCKS)})")
        if not isinstance(block, dict):
            raise ConfigError(f"block '{name}' must be an object")
        extra = set(block) - _KEYS[name]
        if extra:
            raise ConfigError(f"unknown key(s) in '{name}': {', '.join(sorted(extra))}")
        missing = _REQUIRED.get(name, set()) - set(block)
        if missing:
            raise ConfigError(f"missing key(s) in '{name}': {', '.join(sorted(missing))}")


def parse(doc: dict) -> RunConfig:
    validate_doc(doc)
    return RunConfig(doc)


def load_builtin(name: str) -> RunConfig:
    text = resources.files("pcmrcs").joinpath("data", BUILTIN[name]).read_text()
    return parse(json.loads(text))


def load(path: str) -> RunConfig:
    """Load a config file; ``paper`` (or ``paper.json`` when absent on disk) names the bundled example."""
    p = Path(path)
    if not p.exists():
        stem = p.name.removesuffix(".json")
        if stem in BUILTIN and p.parent == Path("."):
            return load_builtin(stem)
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from None
    return parse(doc)
