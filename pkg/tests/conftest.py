"""Shared fixtures: the desk-scale pipeline and small fast geometries."""

import time
from types import SimpleNamespace

import numpy as np
import pytest

from hhsar import (FfbpParams, FrequencyGrid, ImagingRegion, JitterSpec,
                   bpa_reconstruct, generate_handheld_aperture,
                   hhffbpa_reconstruct, range_compress, scene_grid,
                   simulate_measurement)

# Desk-scale setup: a 33x33 jittered scan over 0.15 m, 16 frequencies
# spanning 12-15 GHz, a 3x3x3 scatterer lattice imaged on 65x65x33
# voxels. Mirrors configs/desk.json.
DESK_CENTER = (0.0, 0.0, 0.13333333333333333)
DESK_EXTENTS = (0.16666666666666666,) * 3
DESK_SPACING = 0.05833333333333333
DESK_DIMS = (65, 65, 33)
DESK_SEED = 7


def desk_frequencies():
    return FrequencyGrid(12.0e9, 15.0e9, 16)


def desk_aperture(side=33):
    """The desk scan, optionally rescaled to another side at fixed pitch."""
    sigma = (side - 1) / 32
    return generate_handheld_aperture(
        side, side, 0.15 * sigma,
        JitterSpec(depth_amplitude=0.08 / 3 * sigma,
                   lateral_sigma=0.0005 * sigma),
        DESK_SEED)


def desk_region(scale=1.0):
    return ImagingRegion.from_center(
        tuple(c * scale for c in DESK_CENTER),
        tuple(e * scale for e in DESK_EXTENTS))


def desk_scene(scale=1.0):
    return scene_grid((3, 3, 3), DESK_SPACING * scale,
                      tuple(c * scale for c in DESK_CENTER))


@pytest.fixture(scope="session")
def warm_kernels():
    """Compile the jitted kernels once so timed runs stay honest."""
    freqs = desk_frequencies()
    ap = generate_handheld_aperture(4, 4, 0.02, JitterSpec(), 1)
    region = ImagingRegion(-0.01, 0.01, -0.01, 0.01, 0.03, 0.06)
    cube = simulate_measurement(scene_grid((1, 1, 1), 0.0, (0.0, 0.0, 0.045)),
                                ap, freqs)
    bpa_reconstruct(cube, region, dims=(5, 5, 5))
    hhffbpa_reconstruct(cube, region, final_dims=(5, 5, 5),
                        params=FfbpParams(levels=2))


@pytest.fixture(scope="session")
def desk(warm_kernels):
    """Timed desk-scale run: reference and factorized volumes."""
    freqs = desk_frequencies()
    aperture = desk_aperture()
    region = desk_region()
    scene = desk_scene()

    t0 = time.perf_counter()
    cube = simulate_measurement(scene, aperture, freqs)
    t_simulate = time.perf_counter() - t0

    t0 = time.perf_counter()
    reference = bpa_reconstruct(cube, region, dims=DESK_DIMS)
    t_reference = time.perf_counter() - t0

    t0 = time.perf_counter()
    fast = hhffbpa_reconstruct(cube, region, final_dims=DESK_DIMS,
                               params=FfbpParams(levels=4, gamma=1.4,
                                                 kernel="linear"))
    t_fast = time.perf_counter() - t0

    return SimpleNamespace(freqs=freqs, aperture=aperture, region=region,
                           scene=scene, cube=cube, reference=reference,
                           fast=fast, t_simulate=t_simulate,
                           t_reference=t_reference, t_fast=t_fast)


@pytest.fixture(scope="session")
def small():
    """Quarter-scale geometry (9x9 aperture): cheap module-test input."""
    freqs = desk_frequencies()
    aperture = desk_aperture(side=9)
    region = desk_region(scale=0.25)
    scene = desk_scene(scale=0.25)
    cube = simulate_measurement(scene, aperture, freqs)
    profiles = range_compress(cube, 8)
    return SimpleNamespace(freqs=freqs, aperture=aperture, region=region,
                           scene=scene, cube=cube, profiles=profiles)


@pytest.fixture(scope="session")
def medium(warm_kernels):
    """Half-scale geometry (17x17 aperture) with its reference volume."""
    freqs = desk_frequencies()
    aperture = desk_aperture(side=17)
    region = desk_region(scale=0.5)
    scene = desk_scene(scale=0.5)
    cube = simulate_measurement(scene, aperture, freqs)
    reference = bpa_reconstruct(cube, region, dims=(33, 33, 17))
    return SimpleNamespace(freqs=freqs, aperture=aperture, region=region,
                           scene=scene, cube=cube, reference=reference,
                           dims=(33, 33, 17))


def rel_rms(a, b):
    """Relative RMS difference between two complex arrays."""
    return float(np.sqrt(np.mean(np.abs(a - b) ** 2)
                         / np.mean(np.abs(b) ** 2)))
