import numpy as np
import pytest

from reptile_array.excitations import (
    WeightSet,
    cluster_excitations,
    direction_cosines,
    expand,
    matching_residual,
    raised_cosine,
    read_excitations,
    steering_phases,
    stm,
    taper,
    uniform,
    wrap_phase,
    write_excitations,
)
from reptile_array.geometry import Clustering, GridSpec

FIG3 = np.array([1, 1, 2, 2, 1, 3, 4, 2, 3, 3, 4, 4]).reshape(3, 4)


def test_wrap_phase_range():
    x = np.linspace(-20, 20, 2001)
    w = wrap_phase(x)
    assert np.all(w > -np.pi) and np.all(w <= np.pi)
    assert np.allclose(np.exp(1j * w), np.exp(1j * x))
    assert wrap_phase(-np.pi) == pytest.approx(np.pi)


def test_cluster_mean_hand_example():
    g = GridSpec(1, 3)
    ref = WeightSet.from_polar(g, [[1, 1, 4]])
    alpha, beta = cluster_excitations(ref, np.array([[1, 1, 1]]))
    assert alpha.tolist() == [2.0] and beta.tolist() == [0.0]


def test_uniform_and_single_cluster():
    g = GridSpec(3, 4)
    alpha, beta = cluster_excitations(uniform(g), FIG3)
    assert np.all(alpha == 1) and np.all(beta == 0)
    t = taper(g)
    alpha, _ = cluster_excitations(t, np.ones((3, 4), int))
    assert alpha[0] == pytest.approx(t.amplitude.mean())


def test_arithmetic_vs_circular_phase_mean():
    g = GridSpec(1, 2)
    ref = WeightSet.from_polar(g, 1.0, [[np.pi - 0.1, -np.pi + 0.1]])
    _, lit = cluster_excitations(ref, np.array([[1, 1]]))
    _, circ = cluster_excitations(ref, np.array([[1, 1]]), "circular")
    assert lit[0] == pytest.approx(0.0, abs=1e-12)  # the wrap pathology, kept on purpose
    assert abs(circ[0]) == pytest.approx(np.pi)
    with pytest.raises(ValueError):
        cluster_excitations(ref, np.array([[1, 1]]), "median")


def test_unassigned_element_rejected():
    g = GridSpec(1, 2)
    with pytest.raises(ValueError):
        cluster_excitations(uniform(g), np.array([[1, 0]]))


def test_stm_hand_example_and_homogeneity():
    g = GridSpec(1, 3)
    ref = WeightSet.from_polar(g, [[1, 1, 4]])
    labels = np.array([[1, 1, 1]])
    assert stm(ref, labels, [2.0]).tolist() == [4.0]
    assert stm(ref, labels, [1.0, ][:1] * 1).tolist() == [3.0]
    ref2 = ref.scaled(2.0)
    assert stm(ref2, labels, [4.0]).tolist() == [8.0]
    assert stm(WeightSet(g, np.full((1, 3), 2 + 1j)), labels, [2 + 1j]).tolist() == [0.0]


def test_steering():
    g = GridSpec(4, 5)
    assert np.all(steering_phases(g, 0, 0) == 0)
    a = steering_phases(g, 0.1, -0.05, wrap=False)
    b = steering_phases(g, 0.2, -0.1, wrap=False)
    assert np.allclose(b, 2 * a)
    with pytest.raises(ValueError):
        steering_phases(g, 0.9, 0.9)
    u, v = direction_cosines(30.0, 90.0)
    assert u == pytest.approx(0, abs=1e-15) and v == pytest.approx(0.5)


def test_raised_cosine_symmetric_and_positive():
    for n in (4, 7, 12):
        t = raised_cosine(n)
        assert np.allclose(t, t[::-1])
        assert np.all(t > 0) and t.max() <= 1


def test_expand_and_residual():
    g = GridSpec(3, 4)
    c = Clustering.from_labels(g, FIG3)
    w = np.array([1, 2, 3, 4], complex)
    assert np.array_equal(expand(c, w), FIG3.astype(complex))
    assert matching_residual(WeightSet(g, FIG3), c, w) == 0


def test_csv_round_trip(tmp_path, rng):
    g = GridSpec(5, 7)
    ws = WeightSet.from_polar(g, rng.uniform(0, 2, (5, 7)), rng.uniform(-np.pi, np.pi, (5, 7)))
    write_excitations(tmp_path / "e.csv", g, ws.weights)
    back = read_excitations(tmp_path / "e.csv", g)
    assert np.allclose(back.weights, ws.weights, rtol=1e-12, atol=0)
    assert np.allclose(back.amplitude, ws.amplitude, rtol=1e-12, atol=0)


def test_csv_incomplete(tmp_path):
    (tmp_path / "e.csv").write_text("m,n,amplitude,phase_deg\n1,1,1.0,0\n")
    with pytest.raises(ValueError):
        read_excitations(tmp_path / "e.csv", GridSpec(1, 2))
