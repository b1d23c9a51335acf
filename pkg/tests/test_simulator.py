"""Measurement synthesis against a scalar-loop reference."""

import numpy as np
import pytest

from hhsar import (ConfigError, FrequencyGrid, ImagingRegion, JitterSpec,
                   Scene, generate_handheld_aperture, scene_from_spec,
                   scene_grid, scene_star, simulate_measurement)

from oracles import born_cube


@pytest.fixture(scope="module")
def tiny():
    freqs = FrequencyGrid(12.0e9, 15.0e9, 4)
    ap = generate_handheld_aperture(2, 2, 0.04, JitterSpec(0.005, 3e-4), seed=5)
    scene = Scene(
        positions=np.array([[0.01, -0.005, 0.08], [-0.012, 0.02, 0.11]]),
        reflectivity=np.array([1.0 + 0.5j, -0.7 + 0.2j]))
    return freqs, ap, scene


def test_measurement_matches_scalar_loop(tiny):
    freqs, ap, scene = tiny
    cube = simulate_measurement(scene, ap, freqs)
    want = born_cube(scene.positions, scene.reflectivity, ap.elements,
                     freqs.frequencies)
    assert np.max(np.abs(cube.values - want)) < 1e-12 * np.abs(want).max()


def test_measurement_is_linear_in_the_scene(tiny):
    freqs, ap, scene = tiny
    one = simulate_measurement(
        Scene(positions=scene.positions[:1], reflectivity=scene.reflectivity[:1]),
        ap, freqs)
    two = simulate_measurement(
        Scene(positions=scene.positions[1:], reflectivity=scene.reflectivity[1:]),
        ap, freqs)
    both = simulate_measurement(scene, ap, freqs)
    assert np.allclose(both.values, one.values + two.values, rtol=0, atol=1e-13)


def test_empty_scene_measures_zero(tiny):
    freqs, ap, _ = tiny
    empty = Scene(positions=np.zeros((0, 3)), reflectivity=np.zeros(0, dtype=complex))
    cube = simulate_measurement(empty, ap, freqs)
    assert np.all(cube.values == 0)


def test_scatterer_on_an_element_is_rejected(tiny):
    freqs, ap, _ = tiny
    scene = Scene(positions=ap.elements[:1].copy(),
                  reflectivity=np.ones(1, dtype=complex))
    with pytest.raises(ConfigError):
        simulate_measurement(scene, ap, freqs)


# ----------------------------------------------------------------- scene shapes

def test_scene_grid_lattice_positions():
    s = scene_grid((3, 1, 2), 0.05, (0.1, -0.2, 0.5))
    assert s.n_scatterers == 6
    assert np.allclose(np.unique(s.positions[:, 0]), [0.05, 0.1, 0.15])
    assert np.allclose(np.unique(s.positions[:, 1]), [-0.2])
    assert np.allclose(np.unique(s.positions[:, 2]), [0.475, 0.525])


def test_scene_star_lies_in_its_disk():
    s = scene_star(0.2, 8, 5, (0.0, 0.0, 0.3))
    assert s.n_scatterers == 40
    radii = np.linalg.norm(s.positions[:, :2], axis=1)
    assert radii.max() <= 0.1 + 1e-12
    assert np.all(s.positions[:, 2] == 0.3)


def test_scene_from_spec_round_trips_each_kind():
    grid = scene_from_spec({"kind": "grid", "shape": [2, 2, 1],
                            "spacing": 0.02, "center": [0, 0, 0.3]})
    assert grid.n_scatterers == 4
    star = scene_from_spec({"kind": "star", "diameter": 0.1, "spokes": 4,
                            "points_per_spoke": 3, "center": [0, 0, 0.3]})
    assert star.n_scatterers == 12
    pts = scene_from_spec({"kind": "points",
                           "positions": [[0, 0, 0.3], [0.01, 0, 0.31]],
                           "reflectivity": [1.0, 2.0]})
    assert pts.n_scatterers == 2
    assert np.allclose(pts.reflectivity, [1.0, 2.0])


def test_scene_from_spec_rejects_unknown_kind_and_fields():
    with pytest.raises(ConfigError, match="kind"):
        scene_from_spec({"kind": "blob"})
    with pytest.raises(ConfigError, match="spacng"):
        scene_from_spec({"kind": "grid", "shape": [1, 1, 1],
                         "center": [0, 0, 0.3], "spacing": 0.01,
                         "spacng": 0.01})
    with pytest.raises(ConfigError):
        scene_from_spec({"kind": "grid", "shape": [1, 1, 1],
                         "center": [0, 0, 0.3]})


def test_scene_from_spec_enforces_region_containment():
    region = ImagingRegion(-0.05, 0.05, -0.05, 0.05, 0.25, 0.35)
    ok = scene_from_spec({"kind": "grid", "shape": [2, 2, 1], "spacing": 0.02,
                          "center": [0, 0, 0.3]}, region)
    assert ok.n_scatterers == 4
    with pytest.raises(ConfigError, match="outside"):
        scene_from_spec({"kind": "grid", "shape": [2, 2, 1], "spacing": 0.2,
                         "center": [0, 0, 0.3]}, region)


def test_cube_shape_validation():
    freqs = FrequencyGrid(12.0e9, 15.0e9, 4)
    ap = generate_handheld_aperture(2, 2, 0.04, seed=5)
    from hhsar import DataCube
    with pytest.raises(ConfigError):
        DataCube(values=np.zeros((3, 4), dtype=complex), aperture=ap, freqs=freqs)
    with pytest.raises(ConfigError):
        DataCube(values=np.full((4, 4), np.nan, dtype=complex), aperture=ap,
                 freqs=freqs)
