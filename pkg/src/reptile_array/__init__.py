"""Rep-tile clustered phased arrays: L-tromino geometry, tiling enumeration and counting,
pattern evaluation and the greedy split optimizer."""

from .cardinality import count_tilings_formula
from .exact_cover import EnumerationLimits, build_cover_instance, count_exact_covers, enumerate_exact_covers
from .excitations import WeightSet, cluster_excitations, steering_phases, taper, uniform
from .geometry import LTROMINO, SQUARE, Clustering, GridSpec, TilePlacement, check_tileability, subdivide
from .mask import Mask
from .pattern import ElementPattern, gamma, pattern_metrics, power_pattern
from .rtam import RtamConfig, run

__all__ = [
    "LTROMINO", "SQUARE", "Clustering", "ElementPattern", "EnumerationLimits", "GridSpec", "Mask",
    "RtamConfig", "TilePlacement", "WeightSet", "build_cover_instance", "check_tileability",
    "cluster_excitations", "count_exact_covers", "count_tilings_formula", "enumerate_exact_covers",
    "gamma", "pattern_metrics", "power_pattern", "run", "steering_phases", "subdivide", "taper", "uniform",
]
