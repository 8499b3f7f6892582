"""Rep-tile aperture synthesis: pick the best single-order tiling, then split tiles greedily.

Each iteration splits the splittable tile whose matched weight deviates most
from its members' reference weights, re-matches every cluster and records
the mask-matching index, so the whole run doubles as a (Q, Gamma) trade-off
curve.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cardinality import count_tilings_formula
from .exact_cover import CoverInstance, EnumerationLimits, build_cover_instance, enumerate_exact_covers
from .excitations import WeightSet, cluster_excitations, expand, matching_residual, stm
from .geometry import (
    LTROMINO,
    Clustering,
    Family,
    GridSpec,
    TileShape,
    check_tileability,
    subdivide,
)
from .mask import Mask
from .pattern import DEFAULT_RESOLUTION, ElementPattern, gamma, power_pattern_from_weights

log = logging.getLogger(__name__)

GAMMA_ZERO = 1e-12


class RtamError(ValueError):
    pass


class NoSplittableTile(RtamError):
    pass


@dataclass
class RtamConfig:
    grid: GridSpec
    order: int
    q_max: int
    mask: Mask
    reference: WeightSet
    shape: TileShape = LTROMINO
    element: ElementPattern | None = None
    resolution: int = DEFAULT_RESOLUTION
    enum_threshold: int = 100_000
    sample_budget: int = 10_000
    seed: int = 0
    phase_mode: str = "arithmetic"
    raise_order: bool = False  # climb to R+1 while the order-R space is too large
    workers: int = 1

    def __post_init__(self):
        self.shape = TileShape.parse(self.shape)
        if self.order < 1:
            raise RtamError("tile order must be at least 1")
        limit = self.grid.size // self.shape.cell_count(1)
        if not 1 <= self.q_max <= limit:
            raise RtamError(f"q_max must lie in [1, {limit}] for a {self.grid.rows}x{self.grid.cols} grid")
        if self.reference.grid != self.grid:
            raise RtamError("reference weights are defined on a different grid")
        if self.resolution < 64:
            raise RtamError("resolution must be at least 64")


@dataclass(frozen=True)
class Iteration:
    h: int
    clustering: Clustering
    weights: np.ndarray
    gamma: float
    stm: np.ndarray
    residual: float
    split_tile: int | None  # 1-based id of the tile split to reach this state

    @property
    def Q(self) -> int:
        return self.clustering.Q

    @property
    def histogram(self) -> dict[int, int]:
        return self.clustering.order_histogram()

    @property
    def delta_trm(self) -> float:
        return 1.0 - self.Q / self.clustering.grid.size

    def summary(self) -> dict:
        return {
            "h": self.h,
            "Q": self.Q,
            "Q_r": {str(k): v for k, v in self.histogram.items()},
            "gamma": self.gamma,
            "split_tile": self.split_tile,
            "delta_trm": self.delta_trm,
            "residual": self.residual,
        }


@dataclass
class InitialSelection:
    clustering: Clustering
    gamma: float
    order: int
    candidates: int
    exhaustive: bool
    space_size: int | None


@dataclass
class SynthesisTrace:
    config: RtamConfig
    initial: InitialSelection
    iterations: list[Iteration] = field(default_factory=list)
    stop_reason: str = ""

    @property
    def H(self) -> int:
        return self.iterations[-1].h

    @property
    def final(self) -> Iteration:
        return self.iterations[-1]

    def q_sequence(self) -> list[int]:
        return [it.Q for it in self.iterations]

    def pareto(self) -> list[tuple[int, float]]:
        return [(it.Q, it.gamma) for it in self.iterations]

    def to_dict(self) -> dict:
        return {
            "grid": {"rows": self.config.grid.rows, "cols": self.config.grid.cols,
                     "dx": self.config.grid.dx, "dy": self.config.grid.dy},
            "shape": self.config.shape.family.value,
            "order": self.initial.order,
            "q_max": self.config.q_max,
            "initial": {"candidates": self.initial.candidates, "exhaustive": self.initial.exhaustive,
                        "space_size": self.initial.space_size, "gamma": self.initial.gamma},
            "H": self.H,
            "stop_reason": self.stop_reason,
            "iterations": [it.summary() for it in self.iterations],
        }


# -- evaluation ------------------------------------------------------------------

def matched_weights(ref: WeightSet, c: Clustering, phase_mode: str = "arithmetic") -> np.ndarray:
    alpha, beta = cluster_excitations(ref, c, phase_mode)
    return alpha * np.exp(1j * beta)


def clustering_gamma(cfg: RtamConfig, c: Clustering, w_q=None) -> float:
    if w_q is None:
        w_q = matched_weights(cfg.reference, c, cfg.phase_mode)
    p = power_pattern_from_weights(expand(c, w_q), cfg.grid, cfg.element, cfg.resolution)
    return gamma(p, cfg.mask)


# -- step 1 ---------------------------------------------------------------------------

def tiling_space_size(grid: GridSpec, shape: TileShape, order: int) -> int:
    """Number of single-order tilings (closed form for L-trominoes)."""
    if shape.family is Family.SQUARE:
        return 1 if check_tileability(grid, order, shape).tileable else 0
    l = shape.side(order)
    m, n = grid.rows // l, grid.cols // l
    if m > n:
        m, n = n, m
    return count_tilings_formula(m, n)


def _shuffled(inst: CoverInstance, seed: int) -> CoverInstance:
    perm = np.random.default_rng(seed).permutation(len(inst.rows))
    return CoverInstance(inst.grid, tuple(inst.rows[i] for i in perm),
                         tuple(inst.row_columns[i] for i in perm))


def initial_tiling(cfg: RtamConfig) -> InitialSelection:
    """Best order-R tiling by Gamma: exhaustive when small, else a seeded sample."""
    order = cfg.order
    verdict = check_tileability(cfg.grid, order, cfg.shape)
    if not verdict.tileable:
        raise RtamError(f"grid {cfg.grid.rows}x{cfg.grid.cols} cannot be tiled at order {order} "
                        f"({verdict.reason.value}); choose a different tile order")
    size = tiling_space_size(cfg.grid, cfg.shape, order)
    while cfg.raise_order and size > cfg.enum_threshold:
        nxt = check_tileability(cfg.grid, order + 1, cfg.shape)
        if not nxt.tileable:
            break
        order += 1
        size = tiling_space_size(cfg.grid, cfg.shape, order)
        log.info("raised initial tile order to %d (%d tilings)", order, size)

    inst = build_cover_instance(cfg.grid, cfg.shape, [order])
    exhaustive = size <= cfg.enum_threshold
    if exhaustive:
        limits = EnumerationLimits()
    else:
        inst = _shuffled(inst, cfg.seed)
        limits = EnumerationLimits(max_solutions=cfg.sample_budget)
        log.info("%d tilings exceed the threshold; sampling %d", size, cfg.sample_budget)

    candidates: list[Clustering] = []
    enumerate_exact_covers(inst, limits, lambda sol: candidates.append(inst.clustering(sol)))
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            gammas = list(pool.map(lambda c: clustering_gamma(cfg, c), candidates))
    else:
        gammas = [clustering_gamma(cfg, c) for c in candidates]
    best = int(np.argmin(gammas))  # first minimum wins ties
    return InitialSelection(candidates[best], float(gammas[best]), order, len(candidates), exhaustive, size)


# -- split loop -----------------------------------------------------------------------

def select_tile(c: Clustering, xi) -> int:
    """0-based index of the splittable tile with the largest metric (lowest index on ties)."""
    xi = np.asarray(xi, float)
    splittable = np.array([t.order >= 2 for t in c.tiles])
    if not splittable.any():
        raise NoSplittableTile("every tile is already order 1")
    return int(np.argmax(np.where(splittable, xi, -np.inf)))


def _snapshot(cfg: RtamConfig, c: Clustering, h: int, split: int | None) -> Iteration:
    w_q = matched_weights(cfg.reference, c, cfg.phase_mode)
    return Iteration(h, c, w_q, clustering_gamma(cfg, c, w_q), stm(cfg.reference, c, w_q),
                     matching_residual(cfg.reference, c, w_q), split)


def rtam_step(cfg: RtamConfig, it: Iteration) -> Iteration:
    """Split the worst-matched splittable tile in place and re-match every cluster."""
    q_hat = select_tile(it.clustering, it.stm)
    c = it.clustering.replace(q_hat, subdivide(it.clustering.tiles[q_hat]))
    return _snapshot(cfg, c, it.h + 1, q_hat + 1)


def run(cfg: RtamConfig, initial: InitialSelection | None = None) -> SynthesisTrace:
    initial = initial or initial_tiling(cfg)
    trace = SynthesisTrace(cfg, initial)
    it = _snapshot(cfg, initial.clustering, 0, None)
    trace.iterations.append(it)
    split_gain = cfg.shape.split_factor - 1
    while True:
        if it.gamma < GAMMA_ZERO:
            trace.stop_reason = "mask satisfied"
            break
        if it.Q >= cfg.q_max or it.Q + split_gain > cfg.q_max:
            trace.stop_reason = "cluster budget reached"
            break
        if all(t.order < 2 for t in it.clustering.tiles):
            trace.stop_reason = "no splittable tile"
            break
        it = rtam_step(cfg, it)
        trace.iterations.append(it)
        log.debug("h=%d Q=%d gamma=%.4g", it.h, it.Q, it.gamma)
    return trace
