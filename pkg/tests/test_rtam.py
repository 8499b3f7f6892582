import numpy as np
import pytest

from reptile_array.excitations import taper, uniform
from reptile_array.geometry import LTROMINO, SQUARE, Clustering, GridSpec, TilePlacement, validate_clustering
from reptile_array.pattern import power_pattern_from_weights, reference_mask
from reptile_array.rtam import (
    NoSplittableTile,
    RtamConfig,
    RtamError,
    initial_tiling,
    run,
    select_tile,
)


def config(rows, cols, order, q_max, **kw):
    g = GridSpec(rows, cols)
    ref = kw.pop("reference", None) or taper(g)
    res = kw.pop("resolution", 121)
    mask = reference_mask(power_pattern_from_weights(ref.weights, g, resolution=res))
    return RtamConfig(g, order, q_max, mask, ref, resolution=res, **kw)


@pytest.fixture(scope="module")
def trace_8x12():
    return run(config(8, 12, 2, 14))


def test_select_tile_rules():
    g = GridSpec(12, 16)
    tiles = [TilePlacement(LTROMINO, 3, 0, (0, 0)), TilePlacement(LTROMINO, 3, 0, (0, 8)),
             TilePlacement(LTROMINO, 2, 0, (8, 0)), TilePlacement(LTROMINO, 1, 0, (8, 8))]
    c = Clustering(g, tiles)
    assert select_tile(c, [0.4, 1.0, 0.7, 0.2]) == 1
    assert select_tile(c, [0.5, 0.5, 0.5, 0.5]) == 0
    assert select_tile(c, [0.1, 0.2, 0.3, 9.0]) == 2
    with pytest.raises(NoSplittableTile):
        select_tile(Clustering(g, tiles[3:]), [1.0])


def test_8x12_trace(trace_8x12):
    t = trace_8x12
    assert t.initial.candidates == 18 and t.initial.exhaustive
    assert t.q_sequence() == [8, 11, 14] and t.H == 2
    assert t.final.histogram == {1: 8, 2: 6}


def test_trace_invariants(trace_8x12):
    grid = trace_8x12.config.grid
    prev = None
    for it in trace_8x12.iterations:
        assert validate_clustering(it.clustering).ok
        assert sum(n * LTROMINO.cell_count(r) for r, n in it.histogram.items()) == grid.size
        assert it.delta_trm == pytest.approx(1 - it.Q / grid.size)
        if prev is not None:
            assert it.Q - prev.Q == 3
            assert it.residual <= prev.residual + 1e-12
            assert it.split_tile is not None
        prev = it


def test_determinism(trace_8x12):
    again = run(config(8, 12, 2, 14))
    assert again.to_dict() == trace_8x12.to_dict()
    for a, b in zip(again.iterations, trace_8x12.iterations):
        assert a.clustering == b.clustering
        assert np.array_equal(a.weights, b.weights)


def test_12x16_sequence_and_bookkeeping():
    t = run(config(12, 16, 3, 13))
    assert t.initial.candidates == 4
    assert t.q_sequence() == [4, 7, 10, 13]
    assert t.iterations[1].histogram == {2: 4, 3: 3}


def test_budget_below_one_split():
    t = run(config(8, 12, 2, 10))
    assert t.q_sequence() == [8] and t.stop_reason == "cluster budget reached"


def test_stops_when_mask_met():
    t = run(config(8, 12, 2, 32, reference=uniform(GridSpec(8, 12))))
    # the uniform reference makes every tiling match perfectly
    assert t.q_sequence() == [8] and t.final.gamma < 1e-12 and t.stop_reason == "mask satisfied"


def test_stops_without_splittable_tiles():
    t = run(config(4, 6, 2, 8))
    # Q_max equals the number of order-1 tiles, so the budget and the alphabet run out together
    assert t.final.histogram == {1: 8} and t.q_sequence() == [2, 5, 8]


def test_untileable_order():
    with pytest.raises(RtamError, match="order"):
        initial_tiling(config(12, 20, 3, 20))


def test_config_validation():
    with pytest.raises(RtamError):
        config(8, 12, 2, 33)
    good = config(8, 12, 2, 14)
    with pytest.raises(RtamError):
        RtamConfig(good.grid, 2, 14, good.mask, good.reference, resolution=32)
    with pytest.raises(RtamError):
        RtamConfig(good.grid, 2, 14, good.mask, taper(GridSpec(8, 8)))


def test_sampling_fallback_is_seeded():
    a = initial_tiling(config(8, 12, 1, 32, enum_threshold=100, sample_budget=25, seed=3))
    b = initial_tiling(config(8, 12, 1, 32, enum_threshold=100, sample_budget=25, seed=3))
    c = initial_tiling(config(8, 12, 1, 32, enum_threshold=100, sample_budget=25, seed=4))
    assert not a.exhaustive and a.candidates == 25 and a.space_size > 100
    assert a.clustering == b.clustering
    assert validate_clustering(c.clustering).ok


def test_raise_order_option():
    sel = initial_tiling(config(8, 12, 1, 32, enum_threshold=100, raise_order=True))
    assert sel.order == 2 and sel.exhaustive and sel.candidates == 18


def test_square_family():
    g = GridSpec(16, 16)
    cfg = config(16, 16, 3, 16, shape=SQUARE)
    t = run(cfg)
    assert t.initial.candidates == 1
    assert t.q_sequence()[:2] == [4, 7]
    assert all(validate_clustering(it.clustering).ok for it in t.iterations)
    assert g == cfg.grid


def test_delta_trm_bookkeeping():
    g = GridSpec(24, 36)
    tiles = tuple(TilePlacement(LTROMINO, 1, 0, (0, 0)) for _ in range(150))
    from reptile_array.rtam import Iteration

    it = Iteration(0, Clustering(g, tiles), np.ones(150), 0.0, np.zeros(150), 0.0, None)
    assert it.delta_trm == pytest.approx(0.826, abs=5e-4)
