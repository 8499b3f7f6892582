"""Algorithm X with dancing links, and the tiling enumerator built on top of it.

The search itself runs in a numba-compiled, resumable kernel: all solver
state (links, column sizes, the selection stack) lives in numpy arrays, so a
run can pause whenever its solution buffer fills, hand the batch to a Python
visitor, and pick up where it left off.  Column choice is minimum remaining
candidates with ties going to the lowest column id, which makes the visiting
order fully deterministic.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numba
import numpy as np

from .geometry import MAX_ORDER, GeometryError, GridSpec, TilePlacement, TileShape

_UNLIMITED = np.iinfo(np.int64).max // 4

# state slots
_K, _PHASE, _NODES, _SOLUTIONS, _DONE, _TRUNCATED, _CELLS_LEFT, _FLOOR = range(8)
_DESCEND, _BACKTRACK = 0, 1


@dataclass(frozen=True)
class CoverInstance:
    """Exact-cover matrix whose rows are tile placements and columns are grid cells."""

    grid: GridSpec
    rows: tuple[TilePlacement, ...]
    row_columns: tuple[tuple[int, ...], ...]

    @property
    def n_columns(self) -> int:
        return self.grid.size

    @property
    def columns(self) -> range:
        return range(self.grid.size)

    def orders(self) -> list[int]:
        return sorted({p.order for p in self.rows})

    def clustering(self, row_ids: Iterable[int]):
        from .geometry import Clustering

        return Clustering(self.grid, tuple(self.rows[i] for i in row_ids))


@dataclass(frozen=True)
class EnumerationLimits:
    max_solutions: int | None = None
    max_nodes: int | None = None
    composition: dict[int, int] | None = None

    def __post_init__(self):
        for name in ("max_solutions", "max_nodes"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be positive")
        if self.composition is not None and any(v < 0 for v in self.composition.values()):
            raise ValueError("composition counts must be non-negative")


@dataclass
class EnumerationResult:
    count: int
    truncated: bool = False
    nodes: int = 0
    solutions: list[tuple[int, ...]] | None = field(default=None, repr=False)


def build_cover_instance(grid: GridSpec, shape: TileShape, allowed_orders) -> CoverInstance:
    """Every in-bounds placement of the allowed orders, in (order, row, col, orientation) order."""
    shape = TileShape.parse(shape)
    orders = sorted(set(allowed_orders))
    if not orders:
        raise GeometryError("allowed_orders must not be empty")
    if orders[0] < 1 or orders[-1] > MAX_ORDER:
        raise GeometryError(f"tile orders must lie in [1, {MAX_ORDER}]")
    rows, cols = [], []
    for order in orders:
        side = shape.box_side(order)
        for r0 in range(grid.rows - side + 1):
            for c0 in range(grid.cols - side + 1):
                for b in range(shape.orientations):
                    p = TilePlacement(shape, order, b, (r0, c0))
                    rows.append(p)
                    cols.append(tuple(sorted(r * grid.cols + c for r, c in p.cells)))
    return CoverInstance(grid, tuple(rows), tuple(cols))


# ---------------------------------------------------------------------------
# numba kernel


@numba.njit(cache=True, nogil=True)
def _cover(c, L, R, U, D, C, S):
    L[R[c]] = L[c]
    R[L[c]] = R[c]
    i = D[c]
    while i != c:
        j = R[i]
        while j != i:
            U[D[j]] = U[j]
            D[U[j]] = D[j]
            S[C[j]] -= 1
            j = R[j]
        i = D[i]


@numba.njit(cache=True, nogil=True)
def _uncover(c, L, R, U, D, C, S):
    i = U[c]
    while i != c:
        j = L[i]
        while j != i:
            S[C[j]] += 1
            U[D[j]] = j
            D[U[j]] = j
            j = L[j]
        i = U[i]
    L[R[c]] = c
    R[L[c]] = c


@numba.njit(cache=True, nogil=True)
def _select(r, L, R, U, D, C, S):
    j = R[r]
    while j != r:
        _cover(C[j], L, R, U, D, C, S)
        j = R[j]


@numba.njit(cache=True, nogil=True)
def _unselect(r, L, R, U, D, C, S):
    j = L[r]
    while j != r:
        _uncover(C[j], L, R, U, D, C, S)
        j = L[j]


@numba.njit(cache=True, nogil=True)
def _search(L, R, U, D, C, S, ROW, row_kind, kind_size, remaining, constrained,
            stack_c, stack_r, state, out, out_depth, max_nodes, max_solutions, record):
    """Run Algorithm X until done, the node budget is spent or ``out`` is full.

    Returns the number of solutions written into ``out`` during this call.
    """
    root = S.shape[0]
    cap = out.shape[0]
    n_out = 0
    k = state[_K]
    phase = state[_PHASE]
    floor = state[_FLOOR]
    n_kinds = remaining.shape[0]
    while True:
        r = -1
        c = -1
        if phase == _DESCEND:
            if R[root] == root:
                ok = True
                if constrained:
                    for t in range(n_kinds):
                        if remaining[t] != 0:
                            ok = False
                if ok:
                    state[_SOLUTIONS] += 1
                    if record:
                        for t in range(k):
                            out[n_out, t] = ROW[stack_r[t]]
                        out_depth[n_out] = k
                        n_out += 1
                phase = _BACKTRACK
                if (record and n_out == cap) or state[_SOLUTIONS] >= max_solutions:
                    state[_K] = k
                    state[_PHASE] = phase
                    if state[_SOLUTIONS] >= max_solutions:
                        state[_DONE] = 1
                        state[_TRUNCATED] = 1
                    return n_out
                continue
            if constrained:
                capacity = 0
                for t in range(n_kinds):
                    capacity += remaining[t] * kind_size[t]
                if capacity != state[_CELLS_LEFT]:
                    phase = _BACKTRACK
                    continue
            best = R[root]
            j = R[best]
            while j != root:
                if S[j] < S[best]:
                    best = j
                j = R[j]
            if S[best] == 0:
                phase = _BACKTRACK
                continue
            c = best
            _cover(c, L, R, U, D, C, S)
            stack_c[k] = c
            r = D[c]
        else:
            if k <= floor:
                state[_DONE] = 1
                state[_K] = k
                state[_PHASE] = phase
                return n_out
            k -= 1
            r = stack_r[k]
            c = stack_c[k]
            _unselect(r, L, R, U, D, C, S)
            kind = row_kind[ROW[r]]
            remaining[kind] += 1
            state[_CELLS_LEFT] += kind_size[kind]
            r = D[r]
        # advance to the next row of column c that still fits the budget
        while r != c and remaining[row_kind[ROW[r]]] == 0:
            r = D[r]
        if r == c:
            _uncover(c, L, R, U, D, C, S)
            phase = _BACKTRACK
            continue
        if state[_NODES] >= max_nodes:
            state[_DONE] = 1
            state[_TRUNCATED] = 1
            state[_K] = k
            return n_out
        state[_NODES] += 1
        stack_r[k] = r
        _select(r, L, R, U, D, C, S)
        kind = row_kind[ROW[r]]
        remaining[kind] -= 1
        state[_CELLS_LEFT] -= kind_size[kind]
        k += 1
        phase = _DESCEND


class DancingLinks:
    """Mutable solver state for one exact-cover instance."""

    def __init__(self, inst: CoverInstance, composition: dict[int, int] | None = None):
        self.inst = inst
        n_cols = inst.n_columns
        n_nodes = n_cols + 1 + sum(len(cols) for cols in inst.row_columns)
        L = np.empty(n_nodes, np.int64)
        R = np.empty(n_nodes, np.int64)
        U = np.arange(n_nodes, dtype=np.int64)
        D = np.arange(n_nodes, dtype=np.int64)
        C = np.full(n_nodes, -1, np.int64)
        ROW = np.full(n_nodes, -1, np.int64)
        S = np.zeros(n_cols, np.int64)
        root = n_cols
        for h in range(n_cols + 1):
            L[h] = h - 1 if h > 0 else root
            R[h] = h + 1 if h < root else 0
        node = n_cols + 1
        for row_id, cols in enumerate(inst.row_columns):
            first = node
            for col in cols:
                C[node] = col
                ROW[node] = row_id
                U[node] = U[col]
                D[node] = col
                D[U[col]] = node
                U[col] = node
                S[col] += 1
                L[node] = node - 1
                R[node] = node + 1
                node += 1
            L[first] = node - 1
            R[node - 1] = first
        self.L, self.R, self.U, self.D, self.C, self.S, self.ROW = L, R, U, D, C, S, ROW

        orders = sorted({p.order for p in inst.rows}) or [1]
        kind_of = {o: i for i, o in enumerate(orders)}
        self.orders = orders
        self.row_kind = np.array([kind_of[p.order] for p in inst.rows] or [0], np.int64)
        shape = inst.rows[0].shape if inst.rows else None
        self.kind_size = np.array(
            [shape.cell_count(o) if shape else 1 for o in orders], np.int64
        )
        self.constrained = composition is not None
        if composition is None:
            self.remaining = np.full(len(orders), _UNLIMITED, np.int64)
        else:
            self.remaining = np.array([int(composition.get(o, 0)) for o in orders], np.int64)
            extra = {o: v for o, v in composition.items() if o not in kind_of and v}
            if extra:
                # a required order with no candidate rows can never be satisfied
                self._impossible = True
        depth = max(n_cols, 1) + 1
        self.stack_c = np.zeros(depth, np.int64)
        self.stack_r = np.zeros(depth, np.int64)
        self.state = np.zeros(8, np.int64)
        self.state[_CELLS_LEFT] = n_cols

    @property
    def root_candidates(self) -> list[int]:
        """Row ids of the column Algorithm X branches on first."""
        best, best_size = None, None
        for col in range(self.inst.n_columns):
            if best_size is None or self.S[col] < best_size:
                best, best_size = col, self.S[col]
        if best is None:
            return []
        out = []
        r = self.D[best]
        while r != best:
            out.append(int(self.ROW[r]))
            r = self.D[r]
        return out

    def force_first(self, row_id: int) -> None:
        """Restrict the search to covers containing ``row_id`` from the root column."""
        n_cols = self.inst.n_columns
        best = min(range(n_cols), key=lambda col: (self.S[col], col))
        r = self.D[best]
        while r != best and self.ROW[r] != row_id:
            r = self.D[r]
        if r == best:
            raise ValueError(f"row {row_id} is not a candidate of the root column")
        kind = self.row_kind[row_id]
        _cover(best, self.L, self.R, self.U, self.D, self.C, self.S)
        _select(r, self.L, self.R, self.U, self.D, self.C, self.S)
        self.stack_c[0] = best
        self.stack_r[0] = r
        self.remaining[kind] -= 1
        self.state[_CELLS_LEFT] -= self.kind_size[kind]
        self.state[_K] = 1
        self.state[_FLOOR] = 1
        self.state[_NODES] = 1
        if self.remaining[kind] < 0:
            self.state[_DONE] = 1

    def run(self, batch: int, max_nodes: int, max_solutions: int, record: bool = True):
        """Advance the search; yields arrays of solution row ids, one batch at a time."""
        width = self.inst.n_columns + 1
        out = np.zeros((batch if record else 1, width), np.int64)
        depth = np.zeros(out.shape[0], np.int64)
        if getattr(self, "_impossible", False):
            self.state[_DONE] = 1
        while not self.state[_DONE]:
            n = _search(self.L, self.R, self.U, self.D, self.C, self.S, self.ROW,
                        self.row_kind, self.kind_size, self.remaining, self.constrained,
                        self.stack_c, self.stack_r, self.state, out, depth,
                        max_nodes, max_solutions, record)
            if n:
                yield [tuple(sorted(out[i, : depth[i]].tolist())) for i in range(n)]

    @property
    def solutions(self) -> int:
        return int(self.state[_SOLUTIONS])

    @property
    def nodes(self) -> int:
        return int(self.state[_NODES])

    @property
    def truncated(self) -> bool:
        return bool(self.state[_TRUNCATED])


def enumerate_exact_covers(
    inst: CoverInstance,
    limits: EnumerationLimits | None = None,
    visitor: Callable[[tuple[int, ...]], object] | None = None,
    batch: int = 4096,
) -> EnumerationResult:
    """Visit every exact cover of ``inst`` once, in deterministic order.

    ``visitor`` receives each solution as a sorted tuple of row ids.  The
    returned count covers every visited solution; ``truncated`` is set when a
    node or solution budget stopped the search early.
    """
    limits = limits or EnumerationLimits()
    dl = DancingLinks(inst, limits.composition)
    max_nodes = limits.max_nodes or _UNLIMITED
    max_solutions = limits.max_solutions or _UNLIMITED
    if visitor is None:
        for _ in dl.run(1, max_nodes, max_solutions, record=False):
            pass
    else:
        for chunk in dl.run(batch, max_nodes, max_solutions):
            for sol in chunk:
                visitor(sol)
    return EnumerationResult(dl.solutions, dl.truncated, dl.nodes)


def collect_exact_covers(inst: CoverInstance, limits: EnumerationLimits | None = None) -> EnumerationResult:
    sols: list[tuple[int, ...]] = []
    res = enumerate_exact_covers(inst, limits, sols.append)
    res.solutions = sols
    return res


def _count_branch(inst, composition, row_id, max_nodes):
    dl = DancingLinks(inst, composition)
    dl.force_first(row_id)
    for _ in dl.run(1, max_nodes, _UNLIMITED, record=False):
        pass
    return dl.solutions, dl.truncated, dl.nodes


def count_exact_covers(
    inst: CoverInstance,
    composition: dict[int, int] | None = None,
    workers: int = 1,
    max_nodes: int | None = None,
) -> EnumerationResult:
    """Count covers, optionally splitting the root branch across threads.

    ``max_nodes`` applies per branch when ``workers > 1``.
    """
    max_nodes = max_nodes or _UNLIMITED
    if workers <= 1:
        dl = DancingLinks(inst, composition)
        for _ in dl.run(1, max_nodes, _UNLIMITED, record=False):
            pass
        return EnumerationResult(dl.solutions, dl.truncated, dl.nodes)
    branches = DancingLinks(inst, composition).root_candidates
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda r: _count_branch(inst, composition, r, max_nodes), branches))
    return EnumerationResult(
        sum(p[0] for p in parts), any(p[1] for p in parts), sum(p[2] for p in parts)
    )


def count_all_mixed_tilings(grid: GridSpec, shape: TileShape, allowed_orders, workers: int = 1,
                            max_nodes: int | None = None) -> EnumerationResult:
    """Number of exact covers of ``grid`` using any mix of the allowed tile orders."""
    return count_exact_covers(build_cover_instance(grid, shape, allowed_orders), None, workers, max_nodes)


def dump_solutions(path, inst: CoverInstance, limits: EnumerationLimits | None = None,
                   max_records: int = 100_000) -> EnumerationResult:
    """Write one line of space-separated sorted row ids per cover (debug aid)."""
    limits = limits or EnumerationLimits()
    cap = min(limits.max_solutions or max_records, max_records)
    limits = EnumerationLimits(cap, limits.max_nodes, limits.composition)
    with open(path, "w") as fh:
        return enumerate_exact_covers(inst, limits, lambda s: fh.write(" ".join(map(str, s)) + "\n"))


def count_covers_memo(inst: CoverInstance) -> int:
    """Independent counter: first-empty-cell recursion memoised on the occupancy mask.

    Slow-ish but shares no code with the dancing-links search, which is what
    it is for.
    """
    n = inst.n_columns
    rows, ncols = inst.grid.rows, inst.grid.cols
    if ncols > rows:
        # sweep along the long axis so the live frontier stays narrow
        def bit(col):
            return (col % ncols) * rows + col // ncols
    else:
        def bit(col):
            return col
    by_first: list[list[int]] = [[] for _ in range(n)]
    for cols in inst.row_columns:
        bits = [bit(col) for col in cols]
        mask = 0
        for b in bits:
            mask |= 1 << b
        by_first[min(bits)].append(mask)
    full = (1 << n) - 1
    memo: dict[int, int] = {}

    def go(occupied: int) -> int:
        if occupied == full:
            return 1
        got = memo.get(occupied)
        if got is not None:
            return got
        free = ~occupied & full
        first = (free & -free).bit_length() - 1
        total = 0
        for mask in by_first[first]:
            if not mask & occupied:
                total += go(occupied | mask)
        memo[occupied] = total
        return total

    import sys

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * n + 100))
    try:
        return go(0)
    finally:
        sys.setrecursionlimit(limit)


def significant(x: float, digits: int = 3) -> float:
    """Round ``x`` to ``digits`` significant figures."""
    if x == 0:
        return 0.0
    return round(x, digits - 1 - int(math.floor(math.log10(abs(x)))))
