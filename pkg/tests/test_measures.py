import numpy as np
import pytest

from topoflock import EmpiricalMeasure, GridDensity1D, ball_mass


def test_ball_mass_empirical_direct_count():
    mu = EmpiricalMeasure.from_points(np.array([[0.0], [1.0], [3.0]]))
    assert mu.ball_mass(0.0, 1.0) == pytest.approx(2.0 / 3.0)


def test_ball_mass_saturates():
    mu = EmpiricalMeasure.from_points(np.array([[0.0], [1.0], [3.0]]))
    assert mu.ball_mass(0.0, 100.0) == 1.0
    g = GridDensity1D.uniform(0.0, 1.0, 32)
    assert g.ball_mass(0.5, 10.0) == 1.0


def test_ball_mass_grid_symmetric_interval():
    g = GridDensity1D.uniform(0.0, 1.0, 64)
    assert g.ball_mass(0.5, 0.25) == pytest.approx(0.5, abs=1e-12)


def test_ball_mass_closed_ball_inclusive():
    mu = EmpiricalMeasure.from_points(np.array([[0.0], [1.0]]))
    # atom exactly on the boundary counts
    assert mu.ball_mass(0.0, 1.0) == 1.0
    assert mu.ball_mass(0.0, 1.0 - 1e-12) == 0.5


def test_module_level_dispatch():
    mu = EmpiricalMeasure.from_points(np.array([[0.0], [2.0]]))
    g = GridDensity1D.uniform(0.0, 1.0, 8)
    assert ball_mass(mu, 0.0, 0.5) == 0.5
    assert ball_mass(g, 0.0, 0.5) == pytest.approx(0.5)


def test_empirical_validation():
    with pytest.raises(ValueError):
        EmpiricalMeasure.from_points(np.zeros((2, 1)), np.array([0.4, 0.4]))
    with pytest.raises(ValueError):
        EmpiricalMeasure.from_points(np.array([[np.inf]]))


def test_empirical_is_uniform():
    mu = EmpiricalMeasure.from_points(np.zeros((4, 1)))
    assert mu.is_uniform
    nu = EmpiricalMeasure.from_points(np.zeros((4, 1)), np.array([0.4, 0.2, 0.2, 0.2]))
    assert not nu.is_uniform


def test_empirical_csv_round_trip(tmp_path, rng):
    pts = rng.normal(size=(5, 2))
    w = rng.random(5)
    mu = EmpiricalMeasure.from_points(pts, w / w.sum())
    path = tmp_path / "measure.csv"
    mu.to_csv(path)
    header = path.read_text().split("\n")[0]
    assert header == "x0,x1,w"
    back = EmpiricalMeasure.from_csv(path)
    assert np.array_equal(back.points, mu.points)
    assert np.array_equal(back.weights, mu.weights)


def test_grid_density_mass_and_cdf():
    g = GridDensity1D.raised_cosine(0.0, 1.0, 128)
    assert abs(np.sum(g.values) * g.dx - 1.0) <= 1e-10
    assert g.cdf(g.x_min) == 0.0
    assert g.cdf(g.x_max) == 1.0
    x = np.linspace(0.0, 1.0, 33)
    c = g.cdf(x)
    assert np.all(np.diff(c) >= 0.0)


def test_raised_cosine_cdf_matches_antiderivative():
    g = GridDensity1D.raised_cosine(0.0, 1.0, 256)
    # F(s) = s - sin(2 pi s) / (2 pi)
    s = np.array([0.1, 0.37, 0.5, 0.93])
    expected = s - np.sin(2.0 * np.pi * s) / (2.0 * np.pi)
    assert np.abs(g.cdf(s) - expected).max() <= 1e-4


def test_grid_sampling_inverse_cdf(rng):
    g = GridDensity1D.uniform(2.0, 3.0, 16)
    pts = g.sample(rng, 2000)
    assert pts.min() >= 2.0 and pts.max() <= 3.0
    assert abs(pts.mean() - 2.5) <= 4.0 / np.sqrt(2000)


def test_grid_json_round_trip(tmp_path):
    g = GridDensity1D.raised_cosine(-1.0, 2.0, 32)
    path = tmp_path / "grid.json"
    g.to_json(path)
    back = GridDensity1D.from_json(path)
    assert back.x_min == g.x_min and back.x_max == g.x_max
    assert np.array_equal(back.values, g.values)


def test_grid_from_function_normalizes():
    g = GridDensity1D.from_function(lambda x: np.exp(-x), 0.0, 2.0, 64)
    assert abs(np.sum(g.values) * g.dx - 1.0) <= 1e-10


def test_grid_validation():
    with pytest.raises(ValueError):
        GridDensity1D(1.0, 0.0, np.ones(4))
    with pytest.raises(ValueError):
        GridDensity1D(0.0, 1.0, np.full(4, 0.5))  # mass 0.5, not normalized
    with pytest.raises(ValueError):
        GridDensity1D(0.0, 1.0, -np.ones(4))
