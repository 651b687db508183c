"""Scenario configuration: one self-describing JSON document per CLI run.

Flags on the command line only override output paths and the seed; every
numerical knob lives in the config so scenarios can be archived as fixtures.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .convex import SlopeLattice
from .geometry import ClosedSetSpec, Window

__all__ = ["ConfigError", "ScenarioConfig", "load_config", "config_digest"]


class ConfigError(ValueError):
    """A scenario config failed validation; the message names the offending field."""


@dataclass(frozen=True)
class ScenarioConfig:
    dimension: int
    window: Window
    grid_resolution: int
    lattice: SlopeLattice
    set_spec: ClosedSetSpec | None = None
    field_name: str | None = None
    tie_tolerance: float = 1e-9
    separation: float = 1e-6
    coverage_tolerance: float = 1e-6
    fd_step: float = 1e-5
    partial_step: float = 1e-4
    refine_tol: float = 1e-8
    jump_fraction: float = 0.25
    cover_axes: tuple[int, ...] = ()
    cover_cap: int = 64
    cover_rest_resolution: int = 9
    decompose_radius: float = 1.0
    decompose_samples: int = 1000
    fault_offset: float = 0.0
    seed: int = 0
    outputs: dict = field(default_factory=dict)


def _require(condition: bool, name: str, message: str) -> None:
    if not condition:
        raise ConfigError(f"{name}: {message}")


def _get_number(data: dict, name: str, default, *, positive=False, minimum=None):
    value = data.get(name, default)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    if positive and value <= 0:
        raise ConfigError(f"{name}: must be > 0, got {value}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{name}: must be >= {minimum}, got {value}")
    return value


def _load_set(entry, base_dir: Path) -> ClosedSetSpec:
    if isinstance(entry, str):
        path = Path(entry)
        if not path.is_absolute():
            path = base_dir / path
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"set: cannot read {path}: {exc}") from None
        try:
            return ClosedSetSpec.from_json(text)
        except (ValueError, json.JSONDecodeError) as exc:
            raise ConfigError(f"set ({path}): {exc}") from None
    try:
        return ClosedSetSpec.from_dict(entry)
    except ValueError as exc:
        raise ConfigError(f"set: {exc}") from None


def parse_config(data: dict, base_dir: Path | None = None) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a JSON object")
    base_dir = base_dir or Path.cwd()

    set_spec = _load_set(data["set"], base_dir) if "set" in data else None
    field_name = data.get("field")
    if field_name is not None and not isinstance(field_name, str):
        raise ConfigError(f"field: expected a string, got {field_name!r}")

    if "dimension" in data:
        dimension = data["dimension"]
        _require(isinstance(dimension, int) and not isinstance(dimension, bool), "dimension", "must be an integer")
        if set_spec is not None:
            _require(dimension == set_spec.dimension, "dimension", f"does not match the set ({set_spec.dimension})")
    elif set_spec is not None:
        dimension = set_spec.dimension
    else:
        raise ConfigError("dimension: required when no set is given")
    _require(dimension in (1, 2, 3), "dimension", f"must be 1, 2 or 3, got {dimension}")

    window_data = data.get("window", {"lower": [-2.0] * dimension, "upper": [2.0] * dimension})
    if not isinstance(window_data, dict) or "lower" not in window_data or "upper" not in window_data:
        raise ConfigError("window: needs 'lower' and 'upper' corner arrays")
    try:
        window = Window(window_data["lower"], window_data["upper"])
    except ValueError as exc:
        raise ConfigError(f"window: {exc}") from None
    _require(window.dimension == dimension, "window", f"dimension {window.dimension} != {dimension}")

    resolution = _get_number(data, "grid_resolution", 64, minimum=8)
    _require(float(resolution).is_integer(), "grid_resolution", "must be an integer")

    lattice_data = data.get("lattice", {})
    if not isinstance(lattice_data, dict):
        raise ConfigError("lattice: expected an object with 'step' and 'bound'")
    step = _get_number(lattice_data, "step", 0.125, positive=True)
    bound = _get_number(lattice_data, "bound", 64.0, positive=True)
    try:
        lattice = SlopeLattice(step=float(step), bound=float(bound))
    except ValueError as exc:
        raise ConfigError(f"lattice: {exc}") from None

    tol = data.get("tolerances", {})
    if not isinstance(tol, dict):
        raise ConfigError("tolerances: expected an object")
    tie = _get_number(tol, "tie", 1e-9, positive=True)
    separation = _get_number(tol, "separation", 1e-6, positive=True)
    coverage = _get_number(tol, "coverage", 1e-6, positive=True)
    fd_step = _get_number(tol, "fd_step", 1e-5, positive=True)
    partial_step = _get_number(tol, "partial_step", 1e-4, positive=True)
    refine = _get_number(tol, "refine", 1e-8, positive=True)
    jump_fraction = _get_number(tol, "jump_fraction", 0.25, positive=True)

    cover = data.get("cover", {})
    if not isinstance(cover, dict):
        raise ConfigError("cover: expected an object")
    axes = cover.get("axes", list(range(dimension)))
    if not isinstance(axes, list) or not all(isinstance(a, int) and 0 <= a < dimension for a in axes):
        raise ConfigError(f"cover.axes: expected a list of axis indices in [0, {dimension - 1}]")
    cap = _get_number(cover, "cap", 64, minimum=1)
    rest_resolution = _get_number(cover, "rest_resolution", 9, minimum=1)

    decompose = data.get("decompose", {})
    if not isinstance(decompose, dict):
        raise ConfigError("decompose: expected an object")
    radius = _get_number(decompose, "radius", 1.0, positive=True)
    dec_samples = _get_number(decompose, "samples", 1000, minimum=1)

    seed = data.get("seed", 0)
    _require(isinstance(seed, int) and not isinstance(seed, bool), "seed", "must be an integer")

    fault_offset = _get_number(data, "fault_offset", 0.0)

    outputs = data.get("outputs", {})
    if not isinstance(outputs, dict) or not all(isinstance(v, str) for v in outputs.values()):
        raise ConfigError("outputs: expected an object mapping names to paths")

    return ScenarioConfig(
        dimension=dimension,
        window=window,
        grid_resolution=int(resolution),
        lattice=lattice,
        set_spec=set_spec,
        field_name=field_name,
        tie_tolerance=float(tie),
        separation=float(separation),
        coverage_tolerance=float(coverage),
        fd_step=float(fd_step),
        partial_step=float(partial_step),
        refine_tol=float(refine),
        jump_fraction=float(jump_fraction),
        cover_axes=tuple(axes),
        cover_cap=int(cap),
        cover_rest_resolution=int(rest_resolution),
        decompose_radius=float(radius),
        decompose_samples=int(dec_samples),
        fault_offset=float(fault_offset),
        seed=int(seed),
        outputs=dict(outputs),
    )


def load_config(path) -> tuple[ScenarioConfig, dict]:
    """Parse a scenario config file; returns the config and the raw document."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"config file: cannot read {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return parse_config(data, base_dir=path.parent), data


def config_digest(raw: dict) -> str:
    """Stable digest of the raw config document, recorded in every report."""
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()
