"""Core geometric and configuration types.

Everything downstream consumes the objects defined here: the frequency
grid with its wavenumber view, the scanned synthetic aperture, the
imaging region, the scatterer scene, and the binary subarray partition
tree used by the factorized reconstructor.

All types are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

C_LIGHT = 299792458.0
"""Propagation speed used for every wavenumber and delay conversion [m/s]."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FrequencyGrid:
    """Equidistant stepped-frequency sampling of the transmit band.

    Parameters
    ----------
    f_min, f_max : float
        Band edges in Hz, f_min < f_max.
    count : int
        Number of samples, at least 2.
    """

    f_min: float
    f_max: float
    count: int

    def __post_init__(self):
        if not (self.f_min > 0 and np.isfinite(self.f_min) and np.isfinite(self.f_max)):
            raise ConfigError("frequency band edges must be positive and finite")
        if self.f_min >= self.f_max:
            raise ConfigError("f_min must be strictly below f_max")
        if int(self.count) != self.count or self.count < 2:
            raise ConfigError("frequency count must be an integer >= 2")

    @property
    def frequencies(self) -> np.ndarray:
        """Sample frequencies [Hz], equidistant including both edges."""
        return np.linspace(self.f_min, self.f_max, self.count)

    @property
    def k_samples(self) -> np.ndarray:
        """Wavenumbers 2*pi*f/c [rad/m] for each frequency sample."""
        return 2.0 * np.pi * self.frequencies / C_LIGHT

    @property
    def k_min(self) -> float:
        return 2.0 * np.pi * self.f_min / C_LIGHT

    @property
    def k_max(self) -> float:
        return 2.0 * np.pi * self.f_max / C_LIGHT


@dataclass(frozen=True)
class JitterSpec:
    """Trajectory uncertainty model for a handheld scan.

    depth_amplitude bounds the smooth z' fluctuation along the scan
    path (the realized |z'| maximum equals the bound exactly when it is
    nonzero); lateral_sigma is the standard deviation of independent
    per-element x'/y' position noise.
    """

    depth_amplitude: float = 0.0
    lateral_sigma: float = 0.0

    def __post_init__(self):
        if self.depth_amplitude < 0 or self.lateral_sigma < 0:
            raise ConfigError("jitter amplitudes must be non-negative")


@dataclass(frozen=True)
class SyntheticAperture:
    """Ordered antenna phase-center positions of one scan.

    Attributes
    ----------
    elements : ndarray, shape (n, 3)
        Positions (x', y', z') in meters, row-major over scan rows
        (y' slow, x' fast). Read-only.
    nx, ny : int
        Nominal scan lattice shape; nx*ny == n.
    """

    elements: np.ndarray
    nx: int
    ny: int

    def __post_init__(self):
        e = np.asarray(self.elements, dtype=float)
        if e.ndim != 2 or e.shape[1] != 3 or e.shape[0] == 0:
            raise ConfigError("aperture needs a non-empty (n, 3) element array")
        if not np.all(np.isfinite(e)):
            raise ConfigError("aperture element coordinates must be finite")
        if self.nx * self.ny != e.shape[0]:
            raise ConfigError("scan lattice shape does not match element count")
        object.__setattr__(self, "elements", _readonly(e))

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def x_min(self) -> float:
        return float(self.elements[:, 0].min())

    @property
    def x_max(self) -> float:
        return float(self.elements[:, 0].max())

    @property
    def y_min(self) -> float:
        return float(self.elements[:, 1].min())

    @property
    def y_max(self) -> float:
        return float(self.elements[:, 1].max())

    @property
    def z_max(self) -> float:
        return float(self.elements[:, 2].max())

    @property
    def span(self) -> float:
        """Largest lateral side length of the scanned area [m]."""
        return max(self.x_max - self.x_min, self.y_max - self.y_min)


@dataclass(frozen=True)
class ImagingRegion:
    """Axis-aligned box to be imaged, strictly in front of the aperture."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    z_min: float
    z_max: float

    def __post_init__(self):
        for lo, hi, ax in ((self.x_min, self.x_max, "x"),
                           (self.y_min, self.y_max, "y"),
                           (self.z_min, self.z_max, "z")):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ConfigError(f"region {ax} extent must be positive and finite")

    @classmethod
    def from_center(cls, center, extents) -> "ImagingRegion":
        cx, cy, cz = center
        ex, ey, ez = extents
        return cls(cx - ex / 2, cx + ex / 2, cy - ey / 2, cy + ey / 2,
                   cz - ez / 2, cz + ez / 2)

    @property
    def extents(self) -> tuple[float, float, float]:
        return (self.x_max - self.x_min, self.y_max - self.y_min,
                self.z_max - self.z_min)

    @property
    def center(self) -> tuple[float, float, float]:
        return ((self.x_min + self.x_max) / 2, (self.y_min + self.y_max) / 2,
                (self.z_min + self.z_max) / 2)

    @property
    def volume(self) -> float:
        ex, ey, ez = self.extents
        return ex * ey * ez

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.extents))

    def corners(self) -> np.ndarray:
        """The eight box vertices, shape (8, 3)."""
        xs = (self.x_min, self.x_max)
        ys = (self.y_min, self.y_max)
        zs = (self.z_min, self.z_max)
        return np.array([(x, y, z) for x in xs for y in ys for z in zs])

    def boundary_lattice(self, per_axis: int = 5) -> np.ndarray:
        """Regular per_axis^3 lattice over the box, shape (per_axis^3, 3).

        Used to bound transformed coordinates; includes faces, edges,
        and interior points.
        """
        ax = [np.linspace(lo, hi, per_axis) for lo, hi in
              ((self.x_min, self.x_max), (self.y_min, self.y_max),
               (self.z_min, self.z_max))]
        g = np.meshgrid(*ax, indexing="ij")
        return np.stack([a.ravel() for a in g], axis=-1)

    def contains(self, points: np.ndarray, margin: float = 0.0) -> np.ndarray:
        """Boolean mask of points inside the box grown by margin
        (a fraction of each extent, applied symmetrically)."""
        p = np.asarray(points, dtype=float)
        ex, ey, ez = self.extents
        mx, my, mz = margin * ex, margin * ey, margin * ez
        return ((p[..., 0] >= self.x_min - mx) & (p[..., 0] <= self.x_max + mx)
                & (p[..., 1] >= self.y_min - my) & (p[..., 1] <= self.y_max + my)
                & (p[..., 2] >= self.z_min - mz) & (p[..., 2] <= self.z_max + mz))


@dataclass(frozen=True)
class Scene:
    """Point scatterers: positions (n, 3) [m] and complex reflectivities (n,)."""

    positions: np.ndarray
    reflectivity: np.ndarray

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if p.size == 0:
            p = p.reshape(0, 3)
        r = np.atleast_1d(np.asarray(self.reflectivity, dtype=complex))
        if p.ndim != 2 or p.shape[1] != 3:
            raise ConfigError("scene positions must have shape (n, 3)")
        if r.shape != (p.shape[0],):
            raise ConfigError("one reflectivity per scatterer required")
        if p.size and not np.all(np.isfinite(p)):
            raise ConfigError("scatterer positions must be finite")
        object.__setattr__(self, "positions", _readonly(p))
        object.__setattr__(self, "reflectivity", _readonly(r))

    @property
    def n_scatterers(self) -> int:
        return self.positions.shape[0]


def validate_geometry(aperture: SyntheticAperture, region: ImagingRegion) -> None:
    """Reject regions not strictly in front of every aperture element."""
    if region.z_min <= aperture.z_max:
        raise ConfigError(
            f"region z_min {region.z_min:g} must exceed the deepest aperture "
            f"element z' {aperture.z_max:g}")


def generate_handheld_aperture(nx: int, ny: int, extent: float,
                               jitter: JitterSpec | None = None,
                               seed: int = 0) -> SyntheticAperture:
    """Simulate a handheld raster scan over a square nominal aperture.

    The nominal lattice spans extent x extent centered on the origin in
    the z = 0 plane, scanned row-major (y' rows, x' within a row). The
    jitter model perturbs it two ways: independent Gaussian noise on
    each element's (x', y'), and a smooth random walk in z' along the
    scan path whose peak magnitude equals the requested depth bound.

    Parameters
    ----------
    nx, ny : int
        Lattice shape, each at least 1.
    extent : float
        Nominal aperture side length [m].
    jitter : JitterSpec, optional
        Defaults to no jitter (exact planar lattice).
    seed : int
        Seeds the generator; identical inputs give bit-identical output.

    Returns
    -------
    SyntheticAperture
    """
    if nx < 1 or ny < 1:
        raise ConfigError("aperture lattice shape must be at least 1x1")
    if not (extent > 0 and np.isfinite(extent)):
        raise ConfigError("aperture extent must be positive")
    jitter = jitter or JitterSpec()

    xs = np.linspace(-extent / 2, extent / 2, nx) if nx > 1 else np.zeros(1)
    ys = np.linspace(-extent / 2, extent / 2, ny) if ny > 1 else np.zeros(1)
    gx, gy = np.meshgrid(xs, ys)  # rows over y, x fast
    n = nx * ny
    elements = np.zeros((n, 3))
    elements[:, 0] = gx.ravel()
    elements[:, 1] = gy.ravel()

    rng = np.random.default_rng(seed)
    if jitter.lateral_sigma > 0:
        elements[:, :2] += rng.normal(0.0, jitter.lateral_sigma, (n, 2))
    if jitter.depth_amplitude > 0:
        walk = np.cumsum(rng.standard_normal(n))
        w = max(3, nx)
        kernel = np.ones(w) / w
        walk = np.convolve(np.pad(walk, w, mode="edge"), kernel, "same")[w:-w]
        walk -= walk.mean()
        peak = np.abs(walk).max()
        if peak > 0:
            elements[:, 2] = walk * (jitter.depth_amplitude / peak)
    return SyntheticAperture(elements=elements, nx=nx, ny=ny)


@dataclass(frozen=True)
class Subarray:
    """Contiguous scan-order slice [start, stop) of an aperture's elements."""

    start: int
    stop: int

    @property
    def size(self) -> int:
        return self.stop - self.start

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.start, self.stop)


@dataclass(frozen=True)
class SubarrayTree:
    """Binary merge hierarchy of contiguous subarrays.

    Level 1 (index 0 in `levels`) holds 2^(M-1) subarrays; each higher
    level pairs consecutive children, and level M is the whole
    aperture. Balanced splitting keeps sizes within 1 of each other
    for any element count.
    """

    aperture: SyntheticAperture
    levels: tuple = field(default_factory=tuple)

    @property
    def depth(self) -> int:
        return len(self.levels)

    def children(self, level: int, index: int) -> tuple[Subarray, Subarray]:
        """Children (one level finer) of subarray `index` at 1-based `level`."""
        if level < 2:
            raise ConfigError("level-1 subarrays have no children")
        finer = self.levels[level - 2]
        return finer[2 * index], finer[2 * index + 1]


def partition_subarrays(aperture: SyntheticAperture, levels: int) -> SubarrayTree:
    """Split the aperture into the binary subarray hierarchy.

    Parameters
    ----------
    aperture : SyntheticAperture
    levels : int
        Tree depth M >= 1; level 1 holds 2^(M-1) contiguous slices.

    Returns
    -------
    SubarrayTree

    Raises
    ------
    ConfigError
        If 2^(M-1) exceeds the element count.
    """
    n = aperture.n_elements
    if levels < 1:
        raise ConfigError("levels must be at least 1")
    n_leaves = 2 ** (levels - 1)
    if n_leaves > n:
        raise ConfigError(f"{levels} levels need at least {n_leaves} elements, "
                          f"aperture has {n}")
    # balanced contiguous split: first (n mod leaves) slices get one extra
    base, extra = divmod(n, n_leaves)
    bounds = [0]
    for i in range(n_leaves):
        bounds.append(bounds[-1] + base + (1 if i < extra else 0))
    tree_levels = [tuple(Subarray(bounds[i], bounds[i + 1]) for i in range(n_leaves))]
    while len(tree_levels[-1]) > 1:
        finer = tree_levels[-1]
        tree_levels.append(tuple(Subarray(finer[2 * i].start, finer[2 * i + 1].stop)
                                 for i in range(len(finer) // 2)))
    return SubarrayTree(aperture=aperture, levels=tuple(tree_levels))
