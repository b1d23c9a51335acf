"""Reference backprojection reconstruction.

The oracle every fast path is judged against: for each output point,
sum the delay-matched profile samples of the chosen elements. Exact up
to profile interpolation, embarrassingly parallel, and additive over
any disjoint element partition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import backproject_gather
from .errors import ConfigError, NumericDomainError
from .model import C_LIGHT, ImagingRegion, Subarray, validate_geometry
from .rangecomp import RangeProfileSet, range_compress
from .simulator import DataCube


@dataclass(frozen=True)
class ImageVolume:
    """Complex reflectivity samples on a uniform Cartesian grid.

    Attributes
    ----------
    values : ndarray, shape (nx, ny, nz)
        Indexed [ix, iy, iz].
    origin : ndarray, shape (3,)
        Position of voxel (0, 0, 0) [m].
    step : ndarray, shape (3,)
        Voxel pitch per axis [m]; equals the full extent on axes with a
        single sample.
    provenance : dict
        Algorithm name and parameters that produced the volume.
    """

    values: np.ndarray
    origin: np.ndarray
    step: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 3:
            raise ConfigError("volume values must be a 3-D array")
        if not np.all(np.isfinite(v)):
            raise ConfigError("volume values must be finite")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float))
        object.__setattr__(self, "step", np.asarray(self.step, dtype=float))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.values.shape

    def axis_coords(self, axis: int) -> np.ndarray:
        """Sample coordinates [m] along one axis (0=x, 1=y, 2=z)."""
        return self.origin[axis] + self.step[axis] * np.arange(self.dims[axis])

    def grid_points(self) -> np.ndarray:
        """All voxel centers as an (nx*ny*nz, 3) array in C order."""
        g = np.meshgrid(*(self.axis_coords(a) for a in range(3)), indexing="ij")
        return np.stack([a.ravel() for a in g], axis=-1)

    def same_grid(self, other: "ImageVolume") -> bool:
        return (self.dims == other.dims
                and np.allclose(self.origin, other.origin, atol=1e-12)
                and np.allclose(self.step, other.step, atol=1e-12))


def region_grid(region: ImagingRegion, dims) -> tuple[np.ndarray, np.ndarray]:
    """Uniform grid (origin, step) spanning the region edge to edge."""
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or any(d < 1 for d in dims):
        raise ConfigError("grid dims must be three integers >= 1")
    los = np.array([region.x_min, region.y_min, region.z_min])
    his = np.array([region.x_max, region.y_max, region.z_max])
    origin = np.where(np.array(dims) > 1, los, (los + his) / 2)
    step = np.where(np.array(dims) > 1, (his - los) / np.maximum(np.array(dims) - 1, 1),
                    his - los)
    return origin, step


def _element_block(profiles: RangeProfileSet, elements):
    """Resolve an element selection to (positions, envelope rows)."""
    if isinstance(elements, Subarray):
        sel = slice(elements.start, elements.stop)
    elif isinstance(elements, slice):
        sel = elements
    else:
        sel = np.asarray(elements, dtype=int)
    return profiles.aperture.elements[sel], profiles.envelopes[sel]


def backproject(profiles: RangeProfileSet, elements, points: np.ndarray) -> np.ndarray:
    """Backproject a subset of elements onto arbitrary points.

    Parameters
    ----------
    profiles : RangeProfileSet
    elements : Subarray, slice, or index array
        Which aperture elements contribute.
    points : ndarray, shape (n, 3)

    Returns
    -------
    complex ndarray, shape (n,)

    Raises
    ------
    NumericDomainError
        If any implied delay falls outside the profile window.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    el_pos, env = _element_block(profiles, elements)
    if el_pos.shape[0] == 0:
        return np.zeros(points.shape[0], dtype=complex)
    values, oow = backproject_gather(points, el_pos, env, profiles.t0,
                                     profiles.dt, profiles.k_ref)
    bad = int(oow.sum())
    if bad:
        raise NumericDomainError(
            f"{bad} point-element delays fell outside the profile window; "
            "enlarge the upsampled profile or shrink the geometry")
    return values


def check_delay_window(profiles: RangeProfileSet, region: ImagingRegion) -> None:
    """Verify every element-to-region delay fits the profile window."""
    corners = region.corners()
    d = np.linalg.norm(corners[None, :, :] - profiles.aperture.elements[:, None, :],
                       axis=2)
    tau_max = 2.0 * d.max() / C_LIGHT
    lo, hi = profiles.window
    if tau_max > hi or 0.0 < lo:
        raise NumericDomainError(
            f"max round-trip delay {tau_max:.3e} s exceeds the alias-free "
            f"profile window [{lo:.3e}, {hi:.3e}]; the frequency step is too "
            "coarse for this geometry")


def bpa_reconstruct(cube: DataCube, region: ImagingRegion, dims=None,
                    upsample: int = 8) -> ImageVolume:
    """Full-aperture backprojection onto a uniform Cartesian grid.

    Parameters
    ----------
    cube : DataCube
    region : ImagingRegion
    dims : (nx, ny, nz), optional
        Defaults to the resolution-limit grid for the band.
    upsample : int
        Range-compression upsampling factor.

    Returns
    -------
    ImageVolume
    """
    from .spectrum import default_grid_dims

    validate_geometry(cube.aperture, region)
    if dims is None:
        dims = default_grid_dims(region, cube.freqs)
    dims = tuple(int(d) for d in dims)
    origin, step = region_grid(region, dims)
    profiles = range_compress(cube, upsample)
    check_delay_window(profiles, region)
    axes = [origin[a] + step[a] * np.arange(dims[a]) for a in range(3)]
    g = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([a.ravel() for a in g], axis=-1)
    values = backproject(profiles, slice(None), pts)
    return ImageVolume(values=values.reshape(dims), origin=origin, step=step,
                       provenance={"algorithm": "bpa", "upsample": upsample,
                                   "dims": list(dims)})
