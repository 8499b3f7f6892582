"""Run configuration and file formats shared by the CLI."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .excitations import WeightSet, read_excitations, steered, taper, uniform
from .geometry import LTROMINO, Clustering, GridSpec, TileShape, validate_clustering
from .mask import Mask
from .pattern import ElementPattern, power_pattern_from_weights, reference_mask


class ConfigError(ValueError):
    pass


_NUMBER = {"type": "number"}
_POS_INT = {"type": "integer", "minimum": 1}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["grid", "mask", "reference"],
    "properties": {
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["rows", "cols"],
            "properties": {"rows": _POS_INT, "cols": _POS_INT,
                           "dx": {"type": "number", "exclusiveMinimum": 0},
                           "dy": {"type": "number", "exclusiveMinimum": 0}},
        },
        "shape": {"enum": ["ltromino", "square"]},
        "order": _POS_INT,
        "q_max": _POS_INT,
        "mask": {"oneOf": [{"type": "string"}, {"type": "object"}]},
        "mask_margin_db": _NUMBER,
        "reference": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "generator": {"enum": ["uniform", "taper"]},
                "power": {"type": "number", "minimum": 0},
                "pedestal": {"type": "number", "minimum": 0, "maximum": 1},
                "power_y": {"type": "number", "minimum": 0},
                "pedestal_y": {"type": "number", "minimum": 0, "maximum": 1},
                "steer_u": _NUMBER,
                "steer_v": _NUMBER,
                "csv": {"type": "string"},
            },
        },
        "element": {"type": ["string", "null"]},
        "resolution": {"type": "integer", "minimum": 64},
        "output": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "phase_mode": {"enum": ["arithmetic", "circular"]},
        "workers": _POS_INT,
        "enumeration": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"threshold": _POS_INT, "sample_budget": _POS_INT,
                           "raise_order": {"type": "boolean"}},
        },
        "scan": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"theta_max_deg": {"type": "number", "minimum": 0, "maximum": 90},
                           "theta0_deg": _NUMBER, "phi0_deg": _NUMBER,
                           "n_theta": _POS_INT, "n_phi": _POS_INT,
                           "resolution": {"type": "integer", "minimum": 64}},
        },
    },
}


@dataclass
class RunConfig:
    grid: GridSpec
    mask: Mask
    reference: WeightSet
    shape: TileShape = LTROMINO
    order: int = 2
    q_max: int | None = None
    element: ElementPattern | None = None
    resolution: int = 301
    output: Path = Path("out")
    seed: int = 0
    phase_mode: str = "arithmetic"
    workers: int = 1
    enumeration: dict = field(default_factory=dict)
    scan: dict = field(default_factory=dict)

    def rtam(self):
        from .rtam import RtamConfig

        if self.q_max is None:
            raise ConfigError("q_max: required for synthesis")
        e = self.enumeration
        return RtamConfig(self.grid, self.order, self.q_max, self.mask, self.reference, self.shape,
                          self.element, self.resolution, e.get("threshold", 100_000),
                          e.get("sample_budget", 10_000), self.seed, self.phase_mode,
                          e.get("raise_order", False), self.workers)


def _path(base: Path, value: str, key: str) -> Path:
    p = Path(value)
    if not p.is_absolute():
        p = base / p
    if not p.exists():
        raise ConfigError(f"{key}: file not found: {value}")
    return p


def _reference(spec: dict, grid: GridSpec, base: Path) -> WeightSet:
    if "csv" in spec:
        if "generator" in spec:
            raise ConfigError("reference: give either 'csv' or 'generator', not both")
        return read_excitations(_path(base, spec["csv"], "reference.csv"), grid)
    gen = spec.get("generator", "taper")
    if gen == "uniform":
        ref = uniform(grid)
    else:
        ref = taper(grid, spec.get("power", 2.0), spec.get("pedestal", 0.0),
                    spec.get("power_y"), spec.get("pedestal_y"))
    us, vs = spec.get("steer_u", 0.0), spec.get("steer_v", 0.0)
    if us or vs:
        try:
            ref = steered(ref, us, vs)
        except ValueError as exc:
            raise ConfigError(f"reference.steer_u/steer_v: {exc}") from None
    return ref


def config_from_dict(d: dict, base: Path = Path(".")) -> RunConfig:
    """Validate a configuration mapping and build a :class:`RunConfig`.

    The mask is a path to a mask file, an inline mask object, or the string
    ``"reference"`` to derive the mask from the reference pattern itself.
    """
    try:
        jsonschema.validate(d, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    g = d["grid"]
    grid = GridSpec(g["rows"], g["cols"], g.get("dx", 0.5), g.get("dy", 0.5))
    shape = TileShape.parse(d.get("shape", "ltromino"))
    q_max = d.get("q_max")
    if q_max is not None and q_max > grid.size // shape.cell_count(1):
        raise ConfigError(f"q_max: {q_max} exceeds the {grid.size // shape.cell_count(1)} "
                          f"order-1 tiles that fit on the grid")
    try:
        reference = _reference(d["reference"], grid, base)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"reference: {exc}") from None
    element = None
    if d.get("element"):
        element = ElementPattern.load(_path(base, d["element"], "element"))
    resolution = d.get("resolution", 301)
    m = d["mask"]
    try:
        if m == "reference":
            p = power_pattern_from_weights(reference.weights, grid, element, resolution)
            mask = reference_mask(p, d.get("mask_margin_db", 0.0))
        elif isinstance(m, str):
            mask = Mask.load(_path(base, m, "mask"))
        else:
            mask = Mask.from_dict(m)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise ConfigError(f"mask: {exc}") from None
    out = Path(d.get("output", "out"))
    return RunConfig(grid, mask, reference, shape, d.get("order", 2), q_max, element, resolution,
                     out if out.is_absolute() else base / out, d.get("seed", 0),
                     d.get("phase_mode", "arithmetic"), d.get("workers", 1),
                     d.get("enumeration", {}), d.get("scan", {}))


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        d = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return config_from_dict(d, path.parent)


# -- clustering CSV ------------------------------------------------------------------

def write_clustering(path, c: Clustering) -> None:
    """``m,n,q`` rows, 1-based, row-major."""
    labels = c.labels()
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["m", "n", "q"])
        for m in range(c.grid.rows):
            for n in range(c.grid.cols):
                out.writerow([m + 1, n + 1, int(labels[m, n])])


def read_clustering(path, grid: GridSpec, shape: TileShape = LTROMINO) -> Clustering:
    labels = np.zeros((grid.rows, grid.cols), dtype=np.int64)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            m, n = int(row["m"]) - 1, int(row["n"]) - 1
            if not grid.contains((m, n)):
                raise ValueError(f"{path}: element ({m + 1}, {n + 1}) outside the grid")
            labels[m, n] = int(row["q"])
    c = Clustering.from_labels(grid, labels, shape)
    if not validate_clustering(c).ok:
        raise ValueError(f"{path}: clustering is not an exact partition of the grid")
    return c


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_pareto(path, pairs) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["Q", "gamma"])
        for q, g in pairs:
            out.writerow([q, repr(float(g))])
