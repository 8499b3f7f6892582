"""Far-field evaluation: array factor, power pattern, mask matching and pattern metrics.

Positions are in wavelengths, so the wavenumber is ``2*pi``.  Pattern grids
are indexed ``P[i, j] = P(u[i], v[j])``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import interpolate, optimize, special

from .excitations import expand, wrap_phase
from .geometry import Clustering, GridSpec, TilePlacement
from .mask import Mask, lin_to_db

K = 2 * np.pi
DEFAULT_RESOLUTION = 301


class PatternError(ValueError):
    pass


# -- element pattern ----------------------------------------------------------

@dataclass
class ElementPattern:
    """Embedded element pattern; isotropic unless a ``(theta, phi)`` table is given."""

    theta_deg: np.ndarray | None = None
    phi_deg: np.ndarray | None = None
    table: np.ndarray | None = None
    _interp: object = field(default=None, init=False, repr=False)

    @property
    def kind(self) -> str:
        return "isotropic" if self.table is None else "tabulated"

    def __post_init__(self):
        if self.table is None:
            return
        th = np.asarray(self.theta_deg, float)
        ph = np.asarray(self.phi_deg, float)
        tab = np.asarray(self.table, complex).reshape(th.size, ph.size)
        if th.min() > 0 or th.max() < 90:
            raise PatternError("element table must span theta 0..90 deg")
        if ph.min() < 0 or ph.max() >= 360:
            raise PatternError("element table phi must lie in [0, 360)")
        # close the phi period so interpolation wraps cleanly
        ph_ext = np.concatenate([ph, [ph[0] + 360.0]])
        tab_ext = np.concatenate([tab, tab[:, :1]], axis=1)
        self.theta_deg, self.phi_deg, self.table = th, ph, tab
        self._interp = interpolate.RegularGridInterpolator(
            (th, ph_ext), tab_ext, method="linear", bounds_error=False, fill_value=None
        )

    def __call__(self, u, v) -> np.ndarray:
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        if self.table is None:
            return np.ones(u.shape, complex)
        rho = np.hypot(u, v)
        theta = np.degrees(np.arcsin(np.clip(rho, 0, 1)))
        phi = np.degrees(np.arctan2(v, u)) % 360.0
        phi = np.where(phi < self.phi_deg[0], phi + 360.0, phi)
        out = self._interp(np.stack([theta.ravel(), phi.ravel()], axis=-1)).reshape(u.shape)
        return np.where(rho <= 1, out, 0)

    @classmethod
    def load(cls, path) -> ElementPattern:
        """Read ``theta_deg,phi_deg,magnitude[,phase_deg]`` samples on a full grid."""
        samples = {}
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                mag = float(row["magnitude"])
                ph = float(row.get("phase_deg") or 0.0)
                samples[(float(row["theta_deg"]), float(row["phi_deg"]))] = mag * np.exp(1j * np.radians(ph))
        th = np.array(sorted({k[0] for k in samples}))
        ph = np.array(sorted({k[1] for k in samples}))
        try:
            tab = np.array([[samples[(t, p)] for p in ph] for t in th])
        except KeyError as exc:
            raise PatternError(f"{path}: missing sample at theta/phi {exc.args[0]}") from None
        return cls(th, ph, tab)


ISOTROPIC = ElementPattern()


# -- array factor ---------------------------------------------------------------

def _tile_xy(tile: TilePlacement, grid: GridSpec):
    cells = np.array(sorted(tile.cells))
    return cells[:, 1] * grid.dx, cells[:, 0] * grid.dy


def tile_center(tile: TilePlacement, grid: GridSpec) -> tuple[float, float]:
    """Phase centre of a tile: centroid of its element positions."""
    x, y = _tile_xy(tile, grid)
    return float(x.mean()), float(y.mean())


def space_factor(tile: TilePlacement, grid: GridSpec, u, v) -> np.ndarray:
    """Sum of member phasors relative to the tile's phase centre."""
    x, y = _tile_xy(tile, grid)
    xc, yc = x.mean(), y.mean()
    u = np.asarray(u, float)[..., None]
    v = np.asarray(v, float)[..., None]
    return np.exp(1j * K * ((x - xc) * u + (y - yc) * v)).sum(axis=-1)


def array_factor(c: Clustering, w_q, grid: GridSpec, u, v) -> np.ndarray:
    """Array factor assembled tile by tile from space factors and phase centres."""
    w_q = np.asarray(w_q, complex)
    if w_q.shape != (c.Q,):
        raise PatternError(f"expected {c.Q} cluster weights, got shape {w_q.shape}")
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    total = np.zeros(np.broadcast(u, v).shape, complex)
    for w, tile in zip(w_q, c.tiles):
        xc, yc = tile_center(tile, grid)
        total += w * space_factor(tile, grid, u, v) * np.exp(1j * K * (xc * u + yc * v))
    return total


def element_sum(weights, grid: GridSpec, u, v) -> np.ndarray:
    """Array factor from per-element weights at arbitrary points."""
    W = np.asarray(weights, complex).reshape(grid.rows, grid.cols)
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    shape = u.shape
    u, v = u.ravel(), v.ravel()
    xs = np.arange(grid.cols) * grid.dx
    ys = np.arange(grid.rows) * grid.dy
    out = np.empty(u.size, complex)
    for s in range(0, u.size, 8192):
        eu = np.exp(1j * K * np.outer(xs, u[s : s + 8192]))  # (cols, P)
        ev = np.exp(1j * K * np.outer(ys, v[s : s + 8192]))  # (rows, P)
        out[s : s + 8192] = np.einsum("mp,mp->p", ev, W @ eu)
    return out.reshape(shape)


def array_factor_grid(weights, grid: GridSpec, u_axis, v_axis) -> np.ndarray:
    """Array factor on the tensor grid ``u_axis x v_axis`` (separable sum)."""
    W = np.asarray(weights, complex).reshape(grid.rows, grid.cols)
    eu = np.exp(1j * K * np.outer(np.asarray(u_axis, float), np.arange(grid.cols) * grid.dx))
    ev = np.exp(1j * K * np.outer(np.arange(grid.rows) * grid.dy, np.asarray(v_axis, float)))
    return eu @ W.T @ ev


# -- power pattern ----------------------------------------------------------------

@dataclass
class PatternSource:
    """What is needed to evaluate the pattern anywhere: element weights, grid, element pattern."""

    weights: np.ndarray
    grid: GridSpec
    element: ElementPattern = ISOTROPIC

    def power(self, u, v) -> np.ndarray:
        af = element_sum(self.weights, self.grid, u, v)
        return np.abs(self.element(u, v) * af) ** 2


@dataclass
class PatternGrid:
    u: np.ndarray
    v: np.ndarray
    power: np.ndarray  # normalised to the visible peak
    visible: np.ndarray
    peak_power: float  # un-normalised peak used for normalisation
    source: PatternSource | None = None

    @property
    def UV(self):
        return np.meshgrid(self.u, self.v, indexing="ij")

    @property
    def step(self) -> tuple[float, float]:
        return float(self.u[1] - self.u[0]), float(self.v[1] - self.v[0])

    def db(self) -> np.ndarray:
        return lin_to_db(self.power)

    def peak(self) -> tuple[float, float]:
        """Visible sample of maximum power; flat ridges resolve to the sample nearest broadside."""
        vals = np.where(self.visible, self.power, -1.0)
        U, V = self.UV
        top = vals >= vals.max() * (1 - 1e-12)
        i, j = np.unravel_index(np.argmin(np.where(top, U**2 + V**2, np.inf)), vals.shape)
        return float(self.u[i]), float(self.v[j])

    def evaluate(self, u, v) -> np.ndarray:
        """Normalised pattern at arbitrary points (needs ``source``)."""
        if self.source is None:
            raise PatternError("pattern has no source for off-grid evaluation")
        return self.source.power(u, v) / self.peak_power


def uv_axes(resolution: int = DEFAULT_RESOLUTION) -> np.ndarray:
    if resolution < 64:
        raise PatternError("pattern sampling needs at least 64 points per axis")
    ax = np.linspace(-1.0, 1.0, resolution)
    return (ax - ax[::-1]) / 2  # exactly antisymmetric, so visibility is symmetric too


def power_pattern_from_weights(weights, grid: GridSpec, element: ElementPattern | None = None,
                               resolution: int = DEFAULT_RESOLUTION) -> PatternGrid:
    element = element or ISOTROPIC
    axis = uv_axes(resolution)
    U, V = np.meshgrid(axis, axis, indexing="ij")
    visible = U**2 + V**2 <= 1.0
    af = array_factor_grid(weights, grid, axis, axis)
    if element.table is not None:
        af = af * element(U, V)
    p = np.where(visible, np.abs(af) ** 2, 0.0)
    peak = float(p.max())
    if not peak > 0:
        raise PatternError("pattern is identically zero; cannot normalise")
    return PatternGrid(axis, axis.copy(), p / peak, visible, peak,
                       PatternSource(np.asarray(weights, complex).reshape(grid.rows, grid.cols), grid, element))


def power_pattern(c, w_q, grid: GridSpec, element: ElementPattern | None = None,
                  resolution: int = DEFAULT_RESOLUTION) -> PatternGrid:
    """Normalised power pattern of a clustered array with per-cluster weights ``w_q``."""
    return power_pattern_from_weights(expand(c, w_q), grid, element, resolution)


def gamma(p: PatternGrid, mask: Mask) -> float:
    """Mask matching index: integrated excess over the mask, relative to the mask integral."""
    U, V = p.UV
    psi = mask(U, V)
    vis = p.visible
    excess = p.power[vis] - psi[vis]
    return float(np.sum(np.where(excess > 0, excess, 0.0)) / np.sum(psi[vis]))


# -- metrics --------------------------------------------------------------------------

@dataclass
class PatternMetrics:
    sll_db: float | None
    directivity_db: float | None
    hpbw_az_deg: float | None
    hpbw_el_deg: float | None
    peak_u: float
    peak_v: float

    def to_dict(self):
        return asdict(self)


def sidelobe_level(p: PatternGrid, mask: Mask, center=None) -> float | None:
    U, V = p.UV
    outside = p.visible & ~mask.in_mainlobe(U, V, center)
    if not outside.any():
        return None
    return float(lin_to_db(p.power[outside].max()))


def _refine_peak(p: PatternGrid) -> tuple[float, float, float]:
    u0, v0 = p.peak()
    if p.source is None:
        return u0, v0, 1.0
    du, dv = p.step

    def neg(x):
        if x[0] ** 2 + x[1] ** 2 > 1:
            return 0.0
        return -float(p.evaluate(x[0], x[1]))

    res = optimize.minimize(neg, [u0, v0], method="Nelder-Mead",
                            options={"xatol": 1e-9, "fatol": 1e-14, "initial_simplex":
                                     [[u0, v0], [u0 + du / 2, v0], [u0, v0 + dv / 2]]})
    best = max(1.0, -res.fun)
    if -res.fun >= 1.0:
        return float(res.x[0]), float(res.x[1]), best
    return u0, v0, best


def directivity(source: PatternSource, peak_power: float | None = None,
                n_theta: int | None = None, n_phi: int | None = None) -> float:
    """Peak directivity (linear) of the pattern radiated into the upper hemisphere.

    Integrates ``P sin(theta)`` with Gauss-Legendre nodes in theta and a
    periodic trapezoid rule in phi.
    """
    g = source.grid
    extent = max(g.cols * g.dx, g.rows * g.dy, 1.0)
    n_theta = n_theta or int(max(64, 10 * extent))
    n_phi = n_phi or int(max(128, 20 * math.ceil(math.pi * extent)))
    x, wts = special.roots_legendre(n_theta)
    theta = (x + 1) * np.pi / 4
    wts = wts * np.pi / 4
    phi = np.arange(n_phi) * (2 * np.pi / n_phi)
    TH, PH = np.meshgrid(theta, phi, indexing="ij")
    P = source.power(np.sin(TH) * np.cos(PH), np.sin(TH) * np.sin(PH))
    integral = float(np.sum(wts[:, None] * np.sin(TH) * P) * (2 * np.pi / n_phi))
    if peak_power is None:
        peak_power = float(P.max())
    return 4 * np.pi * peak_power / integral


def _half_power_width(f, start: float, step: float, limit: float) -> float | None:
    """Distance from ``start`` to the first -3 dB crossing of ``f`` in direction ``sign(step)``."""
    a = start
    fa = f(a)
    while True:
        b = a + step
        if abs(b) > limit:
            return None
        fb = f(b)
        if fb < 0.5:
            return optimize.brentq(lambda t: f(t) - 0.5, a, b, xtol=1e-12)
        a, fa = b, fb


def half_power_beamwidths(p: PatternGrid, peak=None) -> tuple[float | None, float | None]:
    """-3 dB widths in degrees along the u cut (azimuth) and v cut (elevation) through the peak."""
    if p.source is None:
        raise PatternError("half-power beamwidth needs an evaluable pattern")
    u0, v0, pk = peak if peak is not None else _refine_peak(p)
    g = p.source.grid
    out = []
    for axis in ("u", "v"):
        if axis == "u":
            f = lambda t: float(p.evaluate(t, v0)) / pk  # noqa: E731
            start, other, n = u0, v0, g.cols * g.dx
        else:
            f = lambda t: float(p.evaluate(u0, t)) / pk  # noqa: E731
            start, other, n = v0, u0, g.rows * g.dy
        lim = math.sqrt(max(0.0, 1 - other**2))
        step = 0.05 / n
        hi = _half_power_width(f, start, step, lim)
        lo = _half_power_width(f, start, -step, lim)
        if hi is None or lo is None:
            out.append(None)
            continue
        s = math.sqrt(max(1e-300, 1 - other**2))
        out.append(math.degrees(math.asin(min(1, hi / s)) - math.asin(max(-1, lo / s))))
    return out[0], out[1]


def pattern_metrics(p: PatternGrid, mask: Mask, center=None) -> PatternMetrics:
    """SLL outside the mask mainlobe, hemisphere directivity and principal-cut HPBWs."""
    sll = sidelobe_level(p, mask, center)
    if p.source is None:
        u0, v0 = p.peak()
        return PatternMetrics(sll, None, None, None, u0, v0)
    u0, v0, pk = _refine_peak(p)
    d = directivity(p.source, pk * p.peak_power)
    az, el = half_power_beamwidths(p, (u0, v0, pk))
    return PatternMetrics(sll, float(10 * np.log10(d)), az, el, u0, v0)


# -- scan analysis -------------------------------------------------------------------------

@dataclass
class ScanMap:
    theta_deg: np.ndarray
    phi_deg: np.ndarray
    sll_db: np.ndarray  # (n_theta, n_phi)

    def stats(self, theta_max_deg: float | None = None) -> dict:
        sel = np.ones_like(self.sll_db, bool)
        if theta_max_deg is not None:
            sel &= (self.theta_deg <= theta_max_deg + 1e-9)[:, None]
        vals = self.sll_db[sel]
        vals = vals[np.isfinite(vals)]
        return {"sll_max_db": float(vals.max()), "sll_avg_db": float(vals.mean()), "samples": int(vals.size)}


def scan_sll_map(c, amplitudes, grid: GridSpec, mask: Mask, theta0_deg: float = 0.0,
                 phi0_deg: float = 0.0, theta_max_deg: float = 30.0, n_theta: int = 7,
                 n_phi: int = 12, resolution: int = 181, element: ElementPattern | None = None,
                 phase_mode: str = "arithmetic") -> ScanMap:
    """SLL of the clustered array while the beam is re-pointed around ``(theta0, phi0)``.

    Each sample rebuilds steering phases for the offset direction, re-matches
    the cluster phases and measures the SLL outside a mainlobe rectangle of
    the mask's size centred on the new pointing direction.
    """
    from .excitations import WeightSet, cluster_excitations, direction_cosines, steering_phases

    amplitudes = np.asarray(amplitudes, float).reshape(grid.rows, grid.cols)
    thetas = np.linspace(0.0, theta_max_deg, n_theta)
    phis = np.arange(n_phi) * (360.0 / n_phi)
    out = np.full((n_theta, n_phi), np.nan)
    for i, ts in enumerate(thetas):
        for j, ps in enumerate(phis):
            us, vs = direction_cosines(theta0_deg + ts, phi0_deg + ps)
            ref = WeightSet.from_polar(grid, amplitudes, steering_phases(grid, us, vs))
            alpha, beta = cluster_excitations(ref, c, phase_mode)
            p = power_pattern(c, alpha * np.exp(1j * beta), grid, element, resolution)
            sll = sidelobe_level(p, mask, (us, vs))
            out[i, j] = np.nan if sll is None else sll
    return ScanMap(thetas, phis, out)


def write_pattern_csv(path, p: PatternGrid) -> None:
    U, V = p.UV
    db = p.db()
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["u", "v", "P_db"])
        for i, j in zip(*np.nonzero(p.visible)):
            out.writerow([f"{U[i, j]:.6f}", f"{V[i, j]:.6f}", f"{db[i, j]:.6f}"])


def principal_cuts(p: PatternGrid, n: int = 1001, through=None):
    """Normalised dB cuts along u (at the peak's v) and along v (at the peak's u)."""
    u0, v0 = through if through is not None else p.peak()
    t = np.linspace(-1, 1, n)
    if p.source is not None:
        cu = np.where(t**2 + v0**2 <= 1, p.evaluate(t, np.full_like(t, v0)), np.nan)
        cv = np.where(t**2 + u0**2 <= 1, p.evaluate(np.full_like(t, u0), t), np.nan)
    else:
        i = int(np.argmin(np.abs(p.u - u0)))
        j = int(np.argmin(np.abs(p.v - v0)))
        t = p.u
        cu = np.where(p.visible[:, j], p.power[:, j], np.nan)
        cv = np.where(p.visible[i, :], p.power[i, :], np.nan)
    return t, lin_to_db(cu), lin_to_db(cv)


def write_cut_csv(path, axis_name: str, t, db) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow([axis_name, "P_db"])
        for a, b in zip(t, db):
            if np.isfinite(b):
                out.writerow([f"{a:.6f}", f"{b:.6f}"])


__all__ = [
    "ElementPattern", "ISOTROPIC", "PatternGrid", "PatternMetrics", "PatternSource", "ScanMap",
    "array_factor", "array_factor_grid", "directivity", "element_sum", "gamma",
    "half_power_beamwidths", "pattern_metrics", "power_pattern", "power_pattern_from_weights",
    "principal_cuts", "reference_mask", "first_null_halfwidths", "scan_sll_map", "sidelobe_level", "space_factor", "tile_center", "wrap_phase",
]


def first_null_halfwidths(p: PatternGrid, step: float = 1e-3) -> tuple[float, float]:
    """Distance from the peak to the first pattern minimum along the u and v cuts."""
    if p.source is None:
        raise PatternError("first-null search needs an evaluable pattern")
    u0, v0 = p.peak()
    out = []
    for axis in (0, 1):
        widths = []
        for sign in (1, -1):
            t = np.arange(1, int(2 / step)) * step * sign
            cu = u0 + t if axis == 0 else np.full_like(t, u0)
            cv = v0 + t if axis == 1 else np.full_like(t, v0)
            ok = cu**2 + cv**2 <= 1
            vals = p.evaluate(cu[ok], cv[ok])
            rising = np.nonzero(np.diff(vals) > 0)[0]
            widths.append(abs(t[rising[0]]) if rising.size else abs(t[ok][-1]))
        out.append(min(widths))
    return out[0], out[1]


def reference_mask(p: PatternGrid, margin_db: float = 0.0) -> Mask:
    """Mask that the pattern ``p`` itself satisfies.

    The mainlobe rectangle spans the first nulls along both cuts and the
    sidelobe bound is the pattern's own SLL outside it, plus ``margin_db``.
    """
    hu, hv = first_null_halfwidths(p)
    u0, v0 = p.peak()
    box = Mask(u0, v0, 2 * hu, 2 * hv, (), 0.0)
    sll = sidelobe_level(p, box)
    level = 0.0 if sll is None else min(0.0, sll + margin_db)
    return Mask(u0, v0, float(2 * hu), float(2 * hv), (), float(level))
