"""Reference excitations and sub-array excitation matching."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .geometry import Clustering, GridSpec

TWO_PI = 2 * np.pi


def wrap_phase(beta):
    """Map phases into ``(-pi, pi]``."""
    beta = np.asarray(beta, dtype=float)
    return beta - TWO_PI * np.ceil((beta - np.pi) / TWO_PI)


@dataclass
class WeightSet:
    """Per-element reference weights on a grid, stored as a complex ``(rows, cols)`` array."""

    grid: GridSpec
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=complex).reshape(self.grid.rows, self.grid.cols)

    @property
    def amplitude(self) -> np.ndarray:
        return np.abs(self.weights)

    @property
    def phase(self) -> np.ndarray:
        return wrap_phase(np.angle(self.weights))

    @classmethod
    def from_polar(cls, grid: GridSpec, amplitude, phase=0.0) -> WeightSet:
        amplitude = np.broadcast_to(np.asarray(amplitude, float), (grid.rows, grid.cols))
        phase = np.broadcast_to(np.asarray(phase, float), (grid.rows, grid.cols))
        if np.any(amplitude < 0):
            raise ValueError("amplitudes must be non-negative")
        return cls(grid, amplitude * np.exp(1j * phase))

    def scaled(self, factor: float) -> WeightSet:
        return WeightSet(self.grid, self.weights * factor)


def uniform(grid: GridSpec) -> WeightSet:
    return WeightSet(grid, np.ones((grid.rows, grid.cols), complex))


def raised_cosine(n: int, power: float = 2.0, pedestal: float = 0.0) -> np.ndarray:
    """1-D taper ``pedestal + (1 - pedestal) cos(pi t / 2) ** power`` over ``t`` in ``(-1, 1)``."""
    t = (2 * np.arange(n) - (n - 1)) / n
    return pedestal + (1 - pedestal) * np.cos(np.pi * t / 2) ** power


def taper(grid: GridSpec, power: float = 2.0, pedestal: float = 0.0,
          power_y: float | None = None, pedestal_y: float | None = None) -> WeightSet:
    """Separable raised-cosine-power amplitude taper with zero phase."""
    ax = raised_cosine(grid.cols, power, pedestal)
    ay = raised_cosine(grid.rows, power if power_y is None else power_y,
                       pedestal if pedestal_y is None else pedestal_y)
    return WeightSet(grid, np.outer(ay, ax).astype(complex))


def steering_phases(grid: GridSpec, u_s: float, v_s: float, wrap: bool = True) -> np.ndarray:
    """Progressive phases pointing the beam at ``(u_s, v_s)``."""
    if u_s * u_s + v_s * v_s > 1 + 1e-12:
        raise ValueError(f"steering direction ({u_s}, {v_s}) lies outside the visible disc")
    x, y = grid.positions()
    beta = -TWO_PI * (x * u_s + y * v_s)
    return wrap_phase(beta) if wrap else beta


def steered(ws: WeightSet, u_s: float, v_s: float) -> WeightSet:
    return WeightSet.from_polar(ws.grid, ws.amplitude, steering_phases(ws.grid, u_s, v_s))


def direction_cosines(theta_deg, phi_deg):
    th, ph = np.radians(theta_deg), np.radians(phi_deg)
    return np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph)


def _labels(c) -> np.ndarray:
    return c.labels() if isinstance(c, Clustering) else np.asarray(c)


def cluster_excitations(ref: WeightSet, c, phase_mode: str = "arithmetic") -> tuple[np.ndarray, np.ndarray]:
    """Per-cluster amplitude and phase by averaging the members' reference values.

    ``phase_mode="arithmetic"`` averages wrapped phases literally;
    ``"circular"`` takes the angle of the summed unit phasors instead.
    """
    labels = _labels(c).ravel()
    if labels.min() < 1:
        raise ValueError("clustering leaves elements unassigned")
    q = labels.max()
    counts = np.bincount(labels, minlength=q + 1)[1:]
    if np.any(counts == 0):
        raise ValueError("empty cluster in clustering vector")
    alpha = np.bincount(labels, ref.amplitude.ravel(), minlength=q + 1)[1:] / counts
    if phase_mode == "arithmetic":
        beta = np.bincount(labels, ref.phase.ravel(), minlength=q + 1)[1:] / counts
    elif phase_mode == "circular":
        z = np.exp(1j * ref.phase.ravel())
        re = np.bincount(labels, z.real, minlength=q + 1)[1:]
        im = np.bincount(labels, z.imag, minlength=q + 1)[1:]
        beta = np.arctan2(im, re)
    else:
        raise ValueError(f"unknown phase_mode {phase_mode!r}")
    return alpha, beta


def cluster_weights(ref: WeightSet, c, phase_mode: str = "arithmetic") -> np.ndarray:
    alpha, beta = cluster_excitations(ref, c, phase_mode)
    return alpha * np.exp(1j * beta)


def expand(c, w_q) -> np.ndarray:
    """Element-level weights ``w[c_mn]`` as a ``(rows, cols)`` array."""
    labels = _labels(c)
    return np.asarray(w_q, complex)[labels - 1]


def matching_residual(ref: WeightSet, c, w_q) -> float:
    return float(np.sum(np.abs(ref.weights - expand(c, w_q)) ** 2))


def stm(ref: WeightSet, c, w_q) -> np.ndarray:
    """Substitution metric per cluster: summed modulus of member deviations."""
    labels = _labels(c).ravel()
    dev = np.abs(ref.weights.ravel() - np.asarray(w_q, complex)[labels - 1])
    return np.bincount(labels, dev, minlength=len(w_q) + 1)[1:]


# -- CSV ---------------------------------------------------------------------

def write_excitations(path, grid: GridSpec, weights) -> None:
    """``m,n,amplitude,phase_deg`` rows, 1-based indices, row-major."""
    w = np.asarray(weights, complex).reshape(grid.rows, grid.cols)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["m", "n", "amplitude", "phase_deg"])
        for m in range(grid.rows):
            for n in range(grid.cols):
                out.writerow([m + 1, n + 1, repr(float(abs(w[m, n]))),
                              repr(float(np.degrees(wrap_phase(np.angle(w[m, n])))))])


def read_excitations(path, grid: GridSpec) -> WeightSet:
    amp = np.full((grid.rows, grid.cols), np.nan)
    ph = np.zeros((grid.rows, grid.cols))
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            m, n = int(row["m"]) - 1, int(row["n"]) - 1
            if not grid.contains((m, n)):
                raise ValueError(f"{path}: element ({m + 1}, {n + 1}) outside the {grid.rows}x{grid.cols} grid")
            amp[m, n] = float(row["amplitude"])
            ph[m, n] = np.radians(float(row.get("phase_deg") or 0.0))
    if np.isnan(amp).any():
        raise ValueError(f"{path}: excitation file does not cover every element")
    return WeightSet.from_polar(grid, amp, ph)
