"""Closed-form counts of single-order L-tromino tilings via the block transfer matrix.

``G_m`` is built from three block families with exact Python integers::

    G_m = [[S_{m-1}, H_{m-1}], [G_{m-1}, S_{m-1}]]
    S_m = [[Z_{m-1}, G_{m-1}], [Z_{m-1}, Z_{m-1}]]
    H_m = [[G_{m-1}, 2 S_{m-1}], [Z_{m-1}, G_{m-1}]]

with ``G_0 = 1`` and ``S_0 = H_0 = 0``.  The number of tilings of an
``m x n`` board (in units of the tile side) is entry ``(1, 2**m)`` of
``G_m ** (n - 1)``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

MAX_ROWS = 20


class CardinalityError(ValueError):
    pass


def _check(m: int) -> None:
    if not 1 <= m <= MAX_ROWS:
        raise CardinalityError(f"board height must lie in [1, {MAX_ROWS}], got {m}")


@lru_cache(maxsize=None)
def _blocks(m: int) -> tuple[dict, dict, dict]:
    """Sparse ``(G, S, H)`` at size ``2**m`` as ``{row: {col: value}}`` dicts."""
    if m == 0:
        return {0: {0: 1}}, {}, {}
    G, S, H = _blocks(m - 1)
    h = 1 << (m - 1)

    def place(dst, src, dr, dc, scale=1):
        for r, row in src.items():
            target = dst.setdefault(r + dr, {})
            for c, v in row.items():
                target[c + dc] = target.get(c + dc, 0) + scale * v

    g, s, hh = {}, {}, {}
    place(g, S, 0, 0)
    place(g, H, 0, h)
    place(g, G, h, 0)
    place(g, S, h, h)
    place(s, G, 0, h)
    place(hh, G, 0, 0)
    place(hh, S, 0, h, 2)
    place(hh, G, h, h)
    return g, s, hh


def build_G(m: int) -> np.ndarray:
    """Dense transfer matrix ``G_m`` (object dtype, exact integers)."""
    _check(m)
    if m > 12:
        raise CardinalityError("dense G is only materialised up to m = 12; use the sparse path")
    n = 1 << m
    out = np.zeros((n, n), dtype=object)
    for r, row in _blocks(m)[0].items():
        for c, v in row.items():
            out[r, c] = v
    return out


def matrix_power(a: np.ndarray, e: int) -> np.ndarray:
    """Exact binary exponentiation of a square integer matrix."""
    if e < 0:
        raise CardinalityError("negative exponent")
    result = np.identity(a.shape[0], dtype=object)
    base = a.astype(object)
    while e:
        if e & 1:
            result = result.dot(base)
        e >>= 1
        if e:
            base = base.dot(base)
    return result


def count_tilings_formula(m: int, n: int) -> int:
    """Exact number of tilings of an ``m x n`` board (tile-side units).

    Propagates the first basis row through ``n - 1`` sparse products, which
    gives the same entry as the full matrix power at a fraction of the cost.
    """
    _check(m)
    if n < 1:
        raise CardinalityError(f"board width must be positive, got {n}")
    G = _blocks(m)[0]
    vec = {0: 1}
    for _ in range(n - 1):
        nxt: dict[int, int] = {}
        for r, v in vec.items():
            for c, g in G.get(r, {}).items():
                nxt[c] = nxt.get(c, 0) + v * g
        vec = {k: v for k, v in nxt.items() if v}
        if not vec:
            return 0
    return vec.get((1 << m) - 1, 0)


def count_tilings_power(m: int, n: int) -> int:
    """Same count via dense matrix exponentiation; practical for ``m <= 9``."""
    return int(matrix_power(build_G(m), n - 1)[0, (1 << m) - 1])


def scientific(x: int, digits: int = 3) -> str:
    """Format ``x`` as ``d.dd×10^k`` with ``digits`` significant figures."""
    if x == 0:
        return "0"
    s = f"{x:.{digits - 1}e}"
    mant, exp = s.split("e")
    return f"{mant}x10^{int(exp)}"
