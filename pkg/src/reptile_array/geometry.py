"""Rep-tile alphabet, cell geometry and clustering containers.

Cells are ``(row, col)`` pairs with row 0 at the top of the aperture.  An
order-``r`` L-tromino has side parameter ``l = 2**(r-1)`` and occupies the
``2l x 2l`` bounding box minus one ``l x l`` quadrant.  Orientation ``b``
counts clockwise quarter turns from the canonical shape, which is missing its
top-right quadrant.  Squares have a single orientation and side ``2**r``.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

MAX_ORDER = 6

Cell = tuple[int, int]


class GeometryError(ValueError):
    """Invalid tile parameters or an impossible geometric request."""


class Family(str, enum.Enum):
    LTROMINO = "ltromino"
    SQUARE = "square"


@dataclass(frozen=True)
class TileShape:
    family: Family

    @property
    def base_cells(self) -> int:
        return 3 if self.family is Family.LTROMINO else 4

    @property
    def split_factor(self) -> int:
        return 4

    @property
    def orientations(self) -> int:
        return 4 if self.family is Family.LTROMINO else 1

    def cell_count(self, order: int) -> int:
        """Number of elements of an order-``order`` tile."""
        return self.split_factor ** (order - 1) * self.base_cells

    def box_side(self, order: int) -> int:
        """Side of the square bounding box of an order-``order`` tile."""
        return 2**order

    def side(self, order: int) -> int:
        """Side length ``l`` used by the covering theorem (``I = 3 l**2`` for L-trominoes)."""
        if self.family is Family.LTROMINO:
            return 2 ** (order - 1)
        return 2**order

    @classmethod
    def parse(cls, name: str | Family | TileShape) -> TileShape:
        if isinstance(name, TileShape):
            return name
        return cls(Family(str(getattr(name, "value", name)).lower()))


LTROMINO = TileShape(Family.LTROMINO)
SQUARE = TileShape(Family.SQUARE)


@dataclass(frozen=True)
class GridSpec:
    """Regular ``rows x cols`` lattice; spacings are in wavelengths."""

    rows: int
    cols: int
    dx: float = 0.5
    dy: float = 0.5

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise GeometryError(f"grid must be at least 1x1, got {self.rows}x{self.cols}")
        if self.dx <= 0 or self.dy <= 0:
            raise GeometryError("element spacing must be positive")

    @property
    def size(self) -> int:
        return self.rows * self.cols

    def positions(self) -> tuple[np.ndarray, np.ndarray]:
        """Element coordinates ``(x, y)`` in wavelengths, each shaped ``(rows, cols)``.

        ``x`` grows with the column index and ``y`` with the row index.
        """
        m, n = np.meshgrid(np.arange(self.rows), np.arange(self.cols), indexing="ij")
        return n * self.dx, m * self.dy

    def contains(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.rows and 0 <= cell[1] < self.cols


def _rotate_cw(cell: Cell, side: int) -> Cell:
    r, c = cell
    return c, side - 1 - r


@lru_cache(maxsize=None)
def _canonical_cells(family: Family, order: int, orientation: int) -> frozenset[Cell]:
    if family is Family.SQUARE:
        s = 2**order
        return frozenset((r, c) for r in range(s) for c in range(s))
    l = 2 ** (order - 1)
    side = 2 * l
    cells = {(r, c) for r in range(side) for c in range(side) if not (r < l and c >= l)}
    for _ in range(orientation):
        cells = {_rotate_cw(cell, side) for cell in cells}
    return frozenset(cells)


def _check(shape: TileShape, order: int, orientation: int) -> None:
    if not 1 <= order <= MAX_ORDER:
        raise GeometryError(f"tile order must be in [1, {MAX_ORDER}], got {order}")
    if not 0 <= orientation < shape.orientations:
        raise GeometryError(
            f"orientation {orientation} invalid for {shape.family.value} "
            f"(expected 0..{shape.orientations - 1})"
        )


def tromino_cells(shape: TileShape, order: int, orientation: int, anchor: Cell = (0, 0)) -> frozenset[Cell]:
    """Cells covered by one tile whose bounding box starts at ``anchor``.

    Works for both families despite the name; squares ignore nothing but
    only accept orientation 0.
    """
    shape = TileShape.parse(shape)
    _check(shape, order, orientation)
    r0, c0 = anchor
    return frozenset((r0 + r, c0 + c) for r, c in _canonical_cells(shape.family, order, orientation))


@dataclass(frozen=True)
class TilePlacement:
    shape: TileShape
    order: int
    orientation: int
    anchor: Cell

    def __post_init__(self):
        _check(self.shape, self.order, self.orientation)

    @property
    def cells(self) -> frozenset[Cell]:
        return tromino_cells(self.shape, self.order, self.orientation, self.anchor)

    @property
    def letter(self) -> tuple[int, int]:
        """Alphabet letter ``(order, orientation)`` of this tile."""
        return self.order, self.orientation

    @property
    def size(self) -> int:
        return self.shape.cell_count(self.order)

    def fits(self, grid: GridSpec) -> bool:
        s = self.shape.box_side(self.order)
        r0, c0 = self.anchor
        return r0 >= 0 and c0 >= 0 and r0 + s <= grid.rows and c0 + s <= grid.cols


# child (row, col) offsets in units of half the parent's side parameter, and
# orientation offsets, for a parent in orientation 0
_LTROMINO_CHILDREN = ((0, 0, 1), (1, 1, 0), (2, 0, 0), (2, 2, 3))


def subdivide(p: TilePlacement) -> list[TilePlacement]:
    """Split an order-``r`` tile into its four order-``r-1`` children."""
    if p.order < 2:
        raise GeometryError("an order-1 tile cannot be split")
    box = p.shape.box_side(p.order)
    child_box = p.shape.box_side(p.order - 1)
    r0, c0 = p.anchor
    children = []
    if p.shape.family is Family.SQUARE:
        for dr in (0, child_box):
            for dc in (0, child_box):
                children.append(TilePlacement(p.shape, p.order - 1, 0, (r0 + dr, c0 + dc)))
        return children
    unit = child_box // 2
    for ur, uc, db in _LTROMINO_CHILDREN:
        cr, cc = ur * unit, uc * unit
        for _ in range(p.orientation):
            # top-left corner of the rotated child box
            cr, cc = cc, box - child_box - cr
        children.append(
            TilePlacement(p.shape, p.order - 1, (db + p.orientation) % 4, (r0 + cr, c0 + cc))
        )
    return children


def identify_tile(shape: TileShape, cells) -> TilePlacement | None:
    """Recover the placement whose cell set equals ``cells``, or ``None``."""
    cells = frozenset(cells)
    n = len(cells)
    order = None
    for r in range(1, MAX_ORDER + 1):
        if shape.cell_count(r) == n:
            order = r
            break
    if order is None:
        return None
    anchor = (min(c[0] for c in cells), min(c[1] for c in cells))
    for b in range(shape.orientations):
        if tromino_cells(shape, order, b, anchor) == cells:
            return TilePlacement(shape, order, b, anchor)
    return None


class Reason(str, enum.Enum):
    THREE_BY_EVEN = "ThreeByEven"
    DIVISIBLE_CASE = "DivisibleCase"
    NOT_DIVISIBLE_BY_SIDE = "NotDivisibleBySide"
    THREE_BY_ODD = "ThreeByOdd"
    AREA_NOT_DIVISIBLE = "AreaNotDivisible"
    TOO_SMALL = "TooSmall"


@dataclass(frozen=True)
class TileabilityVerdict:
    tileable: bool
    reason: Reason


def check_tileability(grid: GridSpec, order: int, shape: TileShape = LTROMINO) -> TileabilityVerdict:
    """Whether ``grid`` admits an exact cover by order-``order`` tiles only."""
    shape = TileShape.parse(shape)
    l = shape.side(order)
    if grid.rows % l or grid.cols % l:
        return TileabilityVerdict(False, Reason.NOT_DIVISIBLE_BY_SIDE)
    mh, nh = sorted((grid.rows // l, grid.cols // l))
    if shape.family is Family.SQUARE:
        # side here is the full square side, so divisibility is the whole story
        return TileabilityVerdict(True, Reason.DIVISIBLE_CASE)
    if mh < 2:
        return TileabilityVerdict(False, Reason.TOO_SMALL)
    if mh == 3:
        if nh % 2 == 0:
            return TileabilityVerdict(True, Reason.THREE_BY_EVEN)
        return TileabilityVerdict(False, Reason.THREE_BY_ODD)
    if (grid.rows * grid.cols) % shape.cell_count(order) == 0:
        return TileabilityVerdict(True, Reason.DIVISIBLE_CASE)
    return TileabilityVerdict(False, Reason.AREA_NOT_DIVISIBLE)


@dataclass
class ValidationReport:
    exact_partition: bool
    overlaps: list[Cell] = field(default_factory=list)
    gaps: list[Cell] = field(default_factory=list)
    out_of_bounds: list[Cell] = field(default_factory=list)
    malformed_tiles: list[int] = field(default_factory=list)
    order_histogram: dict[int, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.exact_partition and not self.malformed_tiles


@dataclass(frozen=True)
class Clustering:
    """An ordered list of tiles on a grid; tile ``i`` has cluster id ``q = i + 1``."""

    grid: GridSpec
    tiles: tuple[TilePlacement, ...]

    def __post_init__(self):
        object.__setattr__(self, "tiles", tuple(self.tiles))

    @property
    def Q(self) -> int:
        return len(self.tiles)

    def order_histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(t.order for t in self.tiles).items()))

    def labels(self) -> np.ndarray:
        """Clustering vector as a ``(rows, cols)`` array of 1-based ids (0 = uncovered)."""
        out = np.zeros((self.grid.rows, self.grid.cols), dtype=np.int64)
        for q, tile in enumerate(self.tiles, start=1):
            for r, c in tile.cells:
                if self.grid.contains((r, c)):
                    out[r, c] = q
        return out

    def vector(self) -> list[int]:
        """Row-major clustering vector."""
        return self.labels().ravel().tolist()

    def replace(self, index: int, new_tiles) -> Clustering:
        tiles = list(self.tiles)
        tiles[index : index + 1] = list(new_tiles)
        return Clustering(self.grid, tuple(tiles))

    @classmethod
    def from_labels(cls, grid: GridSpec, labels, shape: TileShape = LTROMINO) -> Clustering:
        """Rebuild tiles from a clustering vector; raises if any cluster is not a tile."""
        labels = np.asarray(labels).reshape(grid.rows, grid.cols)
        q_max = int(labels.max()) if labels.size else 0
        tiles = []
        for q in range(1, q_max + 1):
            rows, cols = np.nonzero(labels == q)
            tile = identify_tile(shape, zip(rows.tolist(), cols.tolist()))
            if tile is None:
                raise GeometryError(f"cluster {q} is not a valid {shape.family.value} tile")
            tiles.append(tile)
        return cls(grid, tuple(tiles))


def validate_clustering(c: Clustering, labels=None) -> ValidationReport:
    """Check that ``c`` is an exact partition of its grid.

    When ``labels`` (a clustering vector) is given, it is validated instead
    of the tile list, with the tile shapes inferred from ``c.tiles[0].shape``
    or the L-tromino family.
    """
    grid = c.grid
    hits = np.zeros((grid.rows, grid.cols), dtype=np.int64)
    report = ValidationReport(exact_partition=False)
    if labels is not None:
        labels = np.asarray(labels).reshape(grid.rows, grid.cols)
        shape = c.tiles[0].shape if c.tiles else LTROMINO
        hist: Counter = Counter()
        for q in np.unique(labels):
            if q <= 0:
                continue
            rows, cols = np.nonzero(labels == q)
            tile = identify_tile(shape, zip(rows.tolist(), cols.tolist()))
            if tile is None:
                report.malformed_tiles.append(int(q))
            else:
                hist[tile.order] += 1
        report.gaps = [tuple(map(int, rc)) for rc in zip(*np.nonzero(labels <= 0))]
        report.order_histogram = dict(sorted(hist.items()))
        report.exact_partition = not report.gaps and not report.malformed_tiles
        return report

    for q, tile in enumerate(c.tiles, start=1):
        if tile.size != len(tile.cells):
            report.malformed_tiles.append(q)
        for cell in tile.cells:
            if grid.contains(cell):
                hits[cell] += 1
            else:
                report.out_of_bounds.append(cell)
    report.overlaps = [tuple(map(int, rc)) for rc in zip(*np.nonzero(hits > 1))]
    report.gaps = [tuple(map(int, rc)) for rc in zip(*np.nonzero(hits == 0))]
    report.order_histogram = c.order_histogram()
    report.exact_partition = not (report.overlaps or report.gaps or report.out_of_bounds)
    return report
