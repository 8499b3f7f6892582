import itertools

import pytest

from reptile_array.exact_cover import (
    EnumerationLimits,
    build_cover_instance,
    collect_exact_covers,
    count_covers_memo,
    count_exact_covers,
    dump_solutions,
    enumerate_exact_covers,
    significant,
)
from reptile_array.geometry import LTROMINO, SQUARE, GeometryError, GridSpec, check_tileability, validate_clustering


def brute_force_placements(rows, cols):
    """Every (anchor, orientation) of an order-1 L inside the grid, by direct shape checks."""
    shapes = [
        {(0, 0), (1, 0), (1, 1)},
        {(0, 0), (0, 1), (1, 0)},
        {(0, 0), (0, 1), (1, 1)},
        {(0, 1), (1, 0), (1, 1)},
    ]
    found = set()
    for r, c in itertools.product(range(rows), range(cols)):
        for s in shapes:
            cells = frozenset((r + a, c + b) for a, b in s)
            if all(0 <= a < rows and 0 <= b < cols for a, b in cells):
                found.add(cells)
    return found


def test_2x3_rows_match_brute_force():
    inst = build_cover_instance(GridSpec(2, 3), LTROMINO, [1])
    assert inst.n_columns == 6
    assert {p.cells for p in inst.rows} == brute_force_placements(2, 3)
    assert len(inst.rows) == 8


def test_row_sizes():
    inst = build_cover_instance(GridSpec(4, 4), LTROMINO, [2])
    assert inst.rows and all(len(cols) == 12 for cols in inst.row_columns)
    mixed = build_cover_instance(GridSpec(6, 6), LTROMINO, [1, 2])
    assert all(len(cols) == p.size for p, cols in zip(mixed.rows, mixed.row_columns))


def test_empty_orders_rejected():
    with pytest.raises(GeometryError):
        build_cover_instance(GridSpec(2, 3), LTROMINO, [])


@pytest.mark.parametrize("rows,cols,orders,expected", [
    ((2, 3, [1], 2)),
    ((4, 6, [1], 18)),
    ((2, 2, [1], 0)),
    ((8, 12, [2], 18)),
    ((6, 6, [1], 162)),
    ((4, 6, [2], 2)),
])
def test_known_counts(rows, cols, orders, expected):
    inst = build_cover_instance(GridSpec(rows, cols), LTROMINO, orders)
    assert enumerate_exact_covers(inst).count == expected
    assert count_covers_memo(inst) == expected


def test_composition_count_8x12():
    inst = build_cover_instance(GridSpec(8, 12), LTROMINO, [1, 2])
    res = count_exact_covers(inst, {2: 6, 1: 8})
    assert res.count == 6248 and not res.truncated


def test_composition_requiring_missing_order():
    inst = build_cover_instance(GridSpec(4, 6), LTROMINO, [1])
    assert enumerate_exact_covers(inst, EnumerationLimits(composition={2: 1, 1: 4})).count == 0


def test_composition_filter_matches_post_filter():
    inst = build_cover_instance(GridSpec(6, 6), LTROMINO, [1, 2])
    everything = collect_exact_covers(inst).solutions
    by_comp = {}
    for sol in everything:
        n2 = sum(inst.rows[i].order == 2 for i in sol)
        by_comp[n2] = by_comp.get(n2, 0) + 1
    for n2, n in by_comp.items():
        comp = {2: n2, 1: (36 - 12 * n2) // 3}
        assert enumerate_exact_covers(inst, EnumerationLimits(composition=comp)).count == n


def test_solutions_are_exact_unique_and_deterministic():
    inst = build_cover_instance(GridSpec(6, 6), LTROMINO, [1, 2])
    a = collect_exact_covers(inst).solutions
    b = collect_exact_covers(inst).solutions
    assert a == b
    assert len(set(a)) == len(a)
    for sol in a:
        assert validate_clustering(inst.clustering(sol)).ok


def test_limits_truncate():
    inst = build_cover_instance(GridSpec(6, 6), LTROMINO, [1])
    res = enumerate_exact_covers(inst, EnumerationLimits(max_solutions=5))
    assert res.count == 5 and res.truncated
    res = enumerate_exact_covers(inst, EnumerationLimits(max_nodes=3))
    assert res.truncated
    with pytest.raises(ValueError):
        EnumerationLimits(max_nodes=0)


def test_branch_split_counts_agree():
    inst = build_cover_instance(GridSpec(6, 9), LTROMINO, [1])
    assert count_exact_covers(inst, workers=3).count == count_exact_covers(inst).count == 4312


def test_square_family_single_tiling():
    inst = build_cover_instance(GridSpec(8, 8), SQUARE, [2])
    assert enumerate_exact_covers(inst).count == 1


def test_dump(tmp_path):
    inst = build_cover_instance(GridSpec(4, 6), LTROMINO, [1])
    res = dump_solutions(tmp_path / "s.txt", inst)
    lines = (tmp_path / "s.txt").read_text().splitlines()
    assert res.count == len(lines) == 18


@pytest.mark.parametrize("mh", range(1, 6))
@pytest.mark.parametrize("nh", range(1, 6))
@pytest.mark.parametrize("order", [1, 2])
def test_theorem_agrees_with_search(mh, nh, order):
    l = LTROMINO.side(order)
    grid = GridSpec(mh * l, nh * l)
    found = enumerate_exact_covers(build_cover_instance(grid, LTROMINO, [order]),
                                   EnumerationLimits(max_solutions=1)).count
    assert check_tileability(grid, order).tileable == (found >= 1)


def test_significant():
    assert significant(59_150_048) == 5.92e7
    assert significant(0) == 0
