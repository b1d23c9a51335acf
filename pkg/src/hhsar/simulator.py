"""First-order Born signal synthesis.

For each aperture element p' and wavenumber k the measured sample is
the superposition sum(reflectivity * exp(-2j k |p - p'|)) over the
scene's point scatterers. No propagation loss, no antenna pattern,
no multiple scattering. Double precision throughout so reconstructions
can be checked against an exact forward model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .model import FrequencyGrid, ImagingRegion, Scene, SyntheticAperture


@dataclass(frozen=True)
class DataCube:
    """Measured signal s(p', k) indexed by (element, frequency)."""

    values: np.ndarray
    aperture: SyntheticAperture
    freqs: FrequencyGrid

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        expected = (self.aperture.n_elements, self.freqs.count)
        if v.shape != expected:
            raise ConfigError(f"cube shape {v.shape} does not match "
                              f"aperture x frequency shape {expected}")
        if not np.all(np.isfinite(v)):
            raise ConfigError("cube values must be finite")
        v = np.ascontiguousarray(v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def simulate_measurement(scene: Scene, aperture: SyntheticAperture,
                         freqs: FrequencyGrid) -> DataCube:
    """Synthesize the stepped-frequency measurement of a point scene.

    Parameters
    ----------
    scene : Scene
        May be empty, producing an all-zero cube.
    aperture : SyntheticAperture
    freqs : FrequencyGrid

    Returns
    -------
    DataCube

    Raises
    ------
    ConfigError
        If any scatterer coincides with an element position.
    """
    k = freqs.k_samples
    values = np.zeros((aperture.n_elements, freqs.count), dtype=complex)
    for pos, refl in zip(scene.positions, scene.reflectivity):
        d = np.linalg.norm(aperture.elements - pos, axis=1)
        if np.any(d < 1e-12):
            raise ConfigError(f"scatterer at {tuple(pos)} coincides with an "
                              "aperture element")
        values += refl * np.exp(-2j * np.outer(d, k))
    return DataCube(values=values, aperture=aperture, freqs=freqs)


def scene_grid(shape, spacing: float, center, reflectivity: complex = 1.0) -> Scene:
    """Regular lattice of identical point scatterers.

    Parameters
    ----------
    shape : (int, int, int)
        Scatterer counts per axis.
    spacing : float
        Lattice pitch [m], identical on all axes.
    center : (float, float, float)
        Lattice center [m].
    """
    shape = tuple(int(s) for s in shape)
    if any(s < 1 for s in shape):
        raise ConfigError("grid shape entries must be at least 1")
    if spacing < 0:
        raise ConfigError("grid spacing must be non-negative")
    axes = [(np.arange(s) - (s - 1) / 2) * spacing + c
            for s, c in zip(shape, center)]
    g = np.meshgrid(*axes, indexing="ij")
    pos = np.stack([a.ravel() for a in g], axis=-1)
    return Scene(positions=pos, reflectivity=np.full(pos.shape[0], reflectivity,
                                                     dtype=complex))


def scene_star(diameter: float, spokes: int, points_per_spoke: int,
               center, reflectivity: complex = 1.0) -> Scene:
    """Radial-spoke resolution target as a dense point cloud.

    Each spoke carries points_per_spoke scatterers from just outside
    the hub to the rim, so the total count is spokes*points_per_spoke.
    """
    if diameter <= 0 or spokes < 1 or points_per_spoke < 1:
        raise ConfigError("star needs positive diameter, spokes, and density")
    radii = np.linspace(diameter / (2 * (points_per_spoke + 1)), diameter / 2,
                        points_per_spoke)
    angles = np.arange(spokes) * (2 * np.pi / spokes)
    cx, cy, cz = center
    pos = np.array([(cx + r * np.cos(a), cy + r * np.sin(a), cz)
                    for a in angles for r in radii])
    return Scene(positions=pos, reflectivity=np.full(pos.shape[0], reflectivity,
                                                     dtype=complex))


def scene_from_spec(spec: dict, region: ImagingRegion | None = None) -> Scene:
    """Build a scene from a config mapping.

    Recognized kinds: ``grid`` (shape, spacing, center), ``star``
    (diameter, spokes, points_per_spoke, center), and ``points``
    (positions, reflectivity). A ``reflectivity`` scalar is accepted by
    the generator kinds. When a region is supplied every scatterer must
    lie inside it.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("scene spec must be a mapping with a 'kind' entry")
    kind = spec["kind"]
    known = {
        "grid": {"kind", "shape", "spacing", "center", "reflectivity"},
        "star": {"kind", "diameter", "spokes", "points_per_spoke", "center",
                 "reflectivity"},
        "points": {"kind", "positions", "reflectivity"},
    }
    if kind not in known:
        raise ConfigError(f"unknown scene kind '{kind}'")
    unknown = set(spec) - known[kind]
    if unknown:
        raise ConfigError(f"unknown scene fields: {sorted(unknown)}")
    try:
        if kind == "grid":
            scene = scene_grid(spec["shape"], spec["spacing"], spec["center"],
                               complex(spec.get("reflectivity", 1.0)))
        elif kind == "star":
            scene = scene_star(spec["diameter"], spec["spokes"],
                               spec["points_per_spoke"], spec["center"],
                               complex(spec.get("reflectivity", 1.0)))
        else:
            pos = np.asarray(spec["positions"], dtype=float)
            refl = spec.get("reflectivity", [1.0] * len(pos))
            if np.isscalar(refl):
                refl = [refl] * len(pos)
            scene = Scene(positions=pos, reflectivity=np.asarray(refl, dtype=complex))
    except KeyError as exc:
        raise ConfigError(f"scene spec missing field {exc}") from exc
    if region is not None and scene.n_scatterers:
        inside = region.contains(scene.positions)
        if not np.all(inside):
            bad = scene.positions[~inside][0]
            raise ConfigError(f"scatterer at {tuple(bad)} lies outside the "
                              "imaging region")
    return scene
