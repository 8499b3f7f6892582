"""Upper-bound power masks over the ``(u, v)`` plane."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


def db_to_lin(db):
    return 10.0 ** (np.asarray(db, float) / 10.0)


def lin_to_db(x, floor: float = -300.0):
    x = np.asarray(x, float)
    with np.errstate(divide="ignore"):
        return np.maximum(10.0 * np.log10(x), floor)


@dataclass(frozen=True)
class Rect:
    u_min: float
    u_max: float
    v_min: float
    v_max: float
    level_db: float

    def contains(self, u, v):
        return (u >= self.u_min) & (u <= self.u_max) & (v >= self.v_min) & (v <= self.v_max)

    def to_dict(self):
        return {"shape": "rect", "u_min": self.u_min, "u_max": self.u_max,
                "v_min": self.v_min, "v_max": self.v_max, "level_db": self.level_db}


@dataclass(frozen=True)
class Annulus:
    center_u: float
    center_v: float
    r_min: float
    r_max: float
    level_db: float

    def contains(self, u, v):
        r = np.hypot(u - self.center_u, v - self.center_v)
        return (r >= self.r_min) & (r <= self.r_max)

    def to_dict(self):
        return {"shape": "annulus", "center_u": self.center_u, "center_v": self.center_v,
                "r_min": self.r_min, "r_max": self.r_max, "level_db": self.level_db}


@dataclass(frozen=True)
class Mask:
    """Mainlobe rectangle at 0 dB, then ordered regions (first match wins), then a default level."""

    center_u: float = 0.0
    center_v: float = 0.0
    bw_u: float = 0.5
    bw_v: float = 0.5
    regions: tuple = field(default_factory=tuple)
    default_level_db: float = -25.0

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        for level in [self.default_level_db] + [r.level_db for r in self.regions]:
            if level > 0:
                raise ValueError("mask levels must not exceed 0 dB")
        if self.bw_u <= 0 or self.bw_v <= 0:
            raise ValueError("mainlobe widths must be positive")

    def in_mainlobe(self, u, v, center=None):
        cu, cv = center if center is not None else (self.center_u, self.center_v)
        return (np.abs(u - cu) <= self.bw_u / 2) & (np.abs(v - cv) <= self.bw_v / 2)

    def __call__(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        out = np.full(u.shape, float(db_to_lin(self.default_level_db)))
        done = self.in_mainlobe(u, v)
        out[done] = 1.0
        for region in self.regions:
            hit = region.contains(u, v) & ~done
            out[hit] = db_to_lin(region.level_db)
            done |= hit
        return out

    def to_dict(self):
        return {"center_u": self.center_u, "center_v": self.center_v, "bw_u": self.bw_u,
                "bw_v": self.bw_v, "regions": [r.to_dict() for r in self.regions],
                "default_level_db": self.default_level_db}

    @classmethod
    def from_dict(cls, d: dict) -> Mask:
        allowed = {"center_u", "center_v", "bw_u", "bw_v", "regions", "default_level_db"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown mask keys: {sorted(unknown)}")
        for key in ("bw_u", "bw_v"):
            if key not in d:
                raise ValueError(f"mask is missing required key '{key}'")
        regions = []
        for i, r in enumerate(d.get("regions", [])):
            r = dict(r)
            kind = r.pop("shape", None)
            try:
                if kind == "rect":
                    regions.append(Rect(**r))
                elif kind == "annulus":
                    regions.append(Annulus(**r))
                else:
                    raise ValueError(f"shape must be 'rect' or 'annulus', got {kind!r}")
            except TypeError as exc:
                raise ValueError(f"regions[{i}]: {exc}") from None
        return cls(float(d.get("center_u", 0.0)), float(d.get("center_v", 0.0)),
                   float(d["bw_u"]), float(d["bw_v"]), tuple(regions),
                   float(d.get("default_level_db", -25.0)))

    @classmethod
    def load(cls, path) -> Mask:
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def stepped_mask(center=(0.0, 0.0), bw=(0.5, 0.5), levels_db=(-25.0,), widths=()) -> Mask:
    """Mainlobe plus nested rectangular sidelobe bands.

    ``levels_db[i]`` applies inside a rectangle ``widths[i]`` times the
    mainlobe size (for all but the last level, which is the default).
    """
    cu, cv = center
    regions = []
    for level, scale in zip(levels_db[:-1], widths):
        hu, hv = bw[0] * scale / 2, bw[1] * scale / 2
        regions.append(Rect(cu - hu, cu + hu, cv - hv, cv + hv, level))
    return Mask(cu, cv, bw[0], bw[1], tuple(regions), levels_db[-1])
