"""Fast factorized backprojection with analytic spectrum compression.

The aperture is split into 2^(M-1) contiguous subarrays. Each is
backprojected onto a small grid that samples its compressed (u, v, n)
coordinates at unity rate times an oversampling factor, which is far
coarser than the final image wherever the subarray is small. Sibling
subimages are then merged pairwise: the children are spatially
downconverted, interpolated at the parent's sample positions,
re-upconverted, and summed. Each merge doubles the effective aperture
and roughly doubles the per-subimage sample count, and the last merge
lands directly on the caller's uniform Cartesian grid. The closed-form
operation-count model for the whole pipeline lives here too.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import lattice_interpolate
from .bpa import ImageVolume, backproject, check_delay_window, region_grid
from .errors import ConfigError, NumericDomainError
from .model import (C_LIGHT, FrequencyGrid, ImagingRegion, Subarray,
                    SyntheticAperture, _readonly, partition_subarrays,
                    validate_geometry)
from .rangecomp import RangeProfileSet, range_compress
from .simulator import DataCube
from .spectrum import (SubarrayExtents, default_grid_dims, invert_lattice,
                       llt_forward, sdc_phase)

GRID_PAD = 2  # lattice steps added on every face beyond the region's image


def default_levels(aperture: SyntheticAperture) -> int:
    """Default factorization depth for an aperture: grows with the
    logarithm of the scan side, floored at 1."""
    side = min(aperture.nx, aperture.ny)
    return max(1, int(np.floor(np.log2(side))) - 2)


@dataclass(frozen=True)
class FfbpParams:
    """Tuning knobs for the factorized reconstruction.

    Parameters
    ----------
    levels : int, optional
        Tree depth M; None picks `default_levels` for the aperture.
    gamma : float
        Oversampling factor applied to the unity-rate lattice (>= 1).
    kernel : {'linear', 'cubic'}
        Interpolation kernel used in merges.
    margin : float
        Fractional region growth allowed for off-lattice positions.
    """

    levels: int | None = None
    gamma: float = 1.4
    kernel: str = "linear"
    margin: float = 0.25

    def __post_init__(self):
        if self.levels is not None and self.levels < 1:
            raise ConfigError("levels must be at least 1")
        if not self.gamma >= 1.0:
            raise ConfigError("oversampling factor must be at least 1")
        if self.kernel not in ("linear", "cubic"):
            raise ConfigError(f"unknown interpolation kernel '{self.kernel}'")
        if not 0.0 <= self.margin <= 1.0:
            raise ConfigError("margin must lie in [0, 1]")


@dataclass(frozen=True)
class SubimageGrid:
    """Uniform (u, v, n) lattice of one subarray with inverse positions.

    Parameters
    ----------
    subarray : Subarray or None
        Element slice this grid belongs to (None for synthetic grids).
    extents : SubarrayExtents
        Lateral bounding box generating the coordinate map.
    origin : ndarray (3,)
        (u, v, n) of lattice index (0, 0, 0).
    step : ndarray (3,)
        Lattice pitch per axis; at most 1 (unity rate or denser).
    positions : ndarray (nu, nv, nn, 3)
        Spatial preimage of each lattice point.
    valid : ndarray (nu, nv, nn) of bool
        False where no preimage inside the margin-grown region exists.
    core : tuple of (int, int) per axis, optional
        Inclusive index bounds of the region's image box: the lattice
        planes the region itself needs. The surrounding shell exists
        for interpolation support and legitimately loses points to
        unreachable coordinates, so the masked-fraction sanity check
        applies inside the core only. None means the whole lattice is
        core.
    """

    subarray: Subarray | None
    extents: SubarrayExtents
    origin: np.ndarray
    step: np.ndarray
    positions: np.ndarray
    valid: np.ndarray
    core: tuple | None = None

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=float).reshape(3)
        step = np.asarray(self.step, dtype=float).reshape(3)
        if np.any(step > 1.0 + 1e-12) or np.any(step <= 0.0):
            raise ConfigError("lattice step must lie in (0, 1]")
        pos = np.asarray(self.positions, dtype=float)
        valid = np.asarray(self.valid, dtype=bool)
        if pos.ndim != 4 or pos.shape[-1] != 3 or valid.shape != pos.shape[:3]:
            raise ConfigError("positions must be (nu, nv, nn, 3) with a "
                              "matching validity mask")
        core = self.core
        if core is None:
            core = tuple((0, n - 1) for n in valid.shape)
        else:
            core = tuple((int(a), int(b)) for a, b in core)
            for (a, b), n in zip(core, valid.shape):
                if not 0 <= a <= b < n:
                    raise ConfigError("core bounds must lie inside the lattice")
        sl = tuple(slice(a, b + 1) for a, b in core)
        masked = 1.0 - valid[sl].mean()
        if masked >= 0.5:
            raise NumericDomainError(
                f"{100 * masked:.0f}% of core lattice points have no valid "
                "inverse position; the region is incompatible with this "
                "subarray")
        object.__setattr__(self, "core", core)
        object.__setattr__(self, "origin", _readonly(origin))
        object.__setattr__(self, "step", _readonly(step))
        object.__setattr__(self, "positions", _readonly(pos))
        object.__setattr__(self, "valid", _readonly(valid))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.positions.shape[:3]

    @property
    def n_points(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_valid(self) -> int:
        return int(self.valid.sum())

    @property
    def masked_fraction(self) -> float:
        return 1.0 - self.valid.mean()

    def lattice_coords(self, uvn: np.ndarray) -> np.ndarray:
        """Fractional lattice indices of (u, v, n) values."""
        return (np.asarray(uvn, dtype=float) - self.origin) / self.step


@dataclass(frozen=True)
class Subimage:
    """Complex samples of one subarray's partial image on its grid."""

    grid: SubimageGrid
    values: np.ndarray
    downconverted: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.grid.dims:
            raise ConfigError(f"value shape {values.shape} does not match "
                              f"grid dims {self.grid.dims}")
        if not np.all(values[~self.grid.valid] == 0.0):
            raise ConfigError("masked lattice points must carry zero values")
        object.__setattr__(self, "values", _readonly(values))


def build_subimage_grid(aperture, subarray: Subarray | None,
                        region: ImagingRegion, kgrid: FrequencyGrid,
                        gamma: float = 1.4, margin: float = 0.25,
                        tol: float = 1e-9, max_iter: int = 50,
                        pad: int = GRID_PAD) -> SubimageGrid:
    """Lay a compressed-coordinate lattice over a region for one subarray.

    Bounds come from the coordinate map evaluated on a 5x5x5 boundary
    lattice of the region (the map is monotone per axis, so extrema sit
    on the boundary), padded by two steps per face so interpolation
    stencils near the region surface stay inside the lattice. Spatial
    positions are recovered by Newton inversion, marching plane by
    plane with warm starts from the previous plane.

    Parameters
    ----------
    aperture : SyntheticAperture or SubarrayExtents
        Source of the subarray's lateral extents.
    subarray : Subarray or None
        Element slice (None when `aperture` is already an extents box).
    region : ImagingRegion
    kgrid : FrequencyGrid
    gamma : float
        Oversampling factor; lattice step is 1/gamma per axis.
    margin : float
        Fraction of each region extent by which positions may overhang
        before being masked, on top of the pad shadow (the spatial
        footprint of the padded lattice shell, which legitimately
        reaches past the region).
    tol, max_iter
        Newton controls.
    pad : int
        Lattice steps added per face beyond the region's image. Points
        more than two steps out are never evaluated (they stay masked
        and zero); wider pads only extend the lattice so interpolation
        stencils anchored near the evaluated shell stay inside the
        hull instead of being flagged.

    Returns
    -------
    SubimageGrid

    Raises
    ------
    NumericDomainError
        When half or more of the lattice has no valid inverse.
    """
    if isinstance(aperture, SubarrayExtents):
        ext = aperture
    else:
        ext = SubarrayExtents.from_aperture(aperture, subarray)
    if not gamma >= 1.0:
        raise ConfigError("oversampling factor must be at least 1")
    if region.z_min <= 0.0:
        raise ConfigError("region must sit strictly in front of the array")
    if int(pad) != pad or pad < 1:
        raise ConfigError("pad must be an integer >= 1")
    pad = int(pad)
    boundary = region.boundary_lattice(5)
    uvn = llt_forward(ext, boundary, kgrid)
    lo = uvn.min(axis=0)
    hi = uvn.max(axis=0)
    step = np.full(3, 1.0 / gamma)
    origin = lo - pad * step
    counts = np.ceil((hi - lo) / step).astype(int) + 1 + 2 * pad
    # u and v are bounded by the anchor separation no matter how far a
    # point wanders, so pad planes beyond that open interval have no
    # inverse at all; drop them, keeping a single bracketing plane per
    # side so targets arbitrarily close to the bound still interpolate
    limit = np.array([kgrid.k_max / np.pi * ext.dx,
                      kgrid.k_max / np.pi * ext.dy, np.inf])
    for a in (0, 1):
        plane = origin[a] + step[a] * np.arange(counts[a])
        keep = np.abs(plane) < limit[a] + 2.0 * step[a]
        if keep.any() and not keep.all():
            first = int(np.argmax(keep))
            last = counts[a] - 1 - int(np.argmax(keep[::-1]))
            origin[a] += first * step[a]
            counts[a] = last - first + 1
    axes = [origin[a] + step[a] * np.arange(counts[a]) for a in range(3)]
    center = np.array(region.center)
    max_step = 0.5 * region.diagonal
    # pad points legitimately invert to positions outside the region
    # (that is their purpose: supporting interpolation stencils at the
    # region surface), so the containment test expands each extent by
    # the pad's spatial shadow, estimated from the mean axis slope
    extent = np.array([region.x_max - region.x_min,
                       region.y_max - region.y_min,
                       region.z_max - region.z_min])
    shadow = 3.0 * GRID_PAD * step * extent / np.maximum(hi - lo, 1e-12)
    slack = margin * extent + shadow
    nu, nv, nn = (int(c) for c in counts)
    uu, vv = np.meshgrid(axes[0], axes[1], indexing="ij")
    positions = np.empty((nu, nv, nn, 3))
    valid = np.empty((nu, nv, nn), dtype=bool)
    guesses = np.broadcast_to(center, (nu * nv, 3)).copy()
    for w in range(nn):
        targets = np.stack([uu.ravel(), vv.ravel(),
                            np.full(nu * nv, axes[2][w])], axis=-1)
        pos, ok, _ = invert_lattice(ext, targets, guesses, kgrid, tol=tol,
                                    max_iter=max_iter, max_step=max_step)
        positions[:, :, w, :] = pos.reshape(nu, nv, 3)
        valid[:, :, w] = ok.reshape(nu, nv)
        guesses = np.where(ok[:, None], pos, center)
    flat = positions.reshape(-1, 3)
    inside = np.ones(flat.shape[0], dtype=bool)
    for a, (lo_a, hi_a) in enumerate([(region.x_min, region.x_max),
                                      (region.y_min, region.y_max),
                                      (region.z_min, region.z_max)]):
        inside &= (flat[:, a] >= lo_a - slack[a]) & (flat[:, a] <= hi_a + slack[a])
    valid &= inside.reshape(valid.shape)
    # only the two rings nearest the region's image carry values; any
    # wider lattice shell exists purely as stencil headroom. The core
    # records the image box itself: the lattice planes the region needs
    # directly, which is where inversion health is judged.
    eps = 1e-9 * step
    core = []
    for a in range(3):
        near = (axes[a] >= lo[a] - GRID_PAD * step[a] - eps[a]) \
            & (axes[a] <= hi[a] + GRID_PAD * step[a] + eps[a])
        shape = [1, 1, 1]
        shape[a] = counts[a]
        valid &= near.reshape(shape)
        image = (axes[a] >= lo[a] - eps[a]) & (axes[a] <= hi[a] + eps[a])
        core.append((int(np.argmax(image)),
                     int(counts[a] - 1 - np.argmax(image[::-1]))))
    return SubimageGrid(subarray=subarray, extents=ext, origin=origin,
                        step=step, positions=positions, valid=valid,
                        core=tuple(core))


def level1_reconstruct(profiles: RangeProfileSet, subarray: Subarray,
                       grid: SubimageGrid) -> Subimage:
    """Backproject one subarray onto its compressed grid.

    Only valid lattice points are evaluated; masked points stay zero.
    Pad points whose positions sit so far outside the region that their
    round-trip delay leaves the profile window are masked as well (the
    bound uses the farthest corner of the subarray's bounding box, so
    it never passes a point the backprojection would reject).
    """
    flat = grid.positions.reshape(-1, 3)
    mask = grid.valid.ravel().copy()
    if mask.any():
        els = profiles.aperture.elements[subarray.start:subarray.stop]
        lo, hi = els.min(axis=0), els.max(axis=0)
        corners = np.stack([np.where(np.array(bits), hi, lo)
                            for bits in np.ndindex(2, 2, 2)])
        pts = flat[mask]
        dmax = np.linalg.norm(pts[:, None, :] - corners[None, :, :],
                              axis=2).max(axis=1)
        mask[mask] = 2.0 * dmax / C_LIGHT <= profiles.window[1]
    if not np.array_equal(mask, grid.valid.ravel()):
        grid = SubimageGrid(subarray=grid.subarray, extents=grid.extents,
                            origin=grid.origin, step=grid.step,
                            positions=grid.positions,
                            valid=mask.reshape(grid.dims), core=grid.core)
    values = np.zeros(flat.shape[0], dtype=complex)
    if mask.any():
        values[mask] = backproject(profiles, subarray, flat[mask])
    return Subimage(grid=grid, values=values.reshape(grid.dims),
                    downconverted=False)


def _downconvert_samples(sub: Subimage, kgrid: FrequencyGrid) -> np.ndarray:
    """Child values times exp(-j Phi) at their own sample positions."""
    if sub.downconverted:
        return np.asarray(sub.values)
    phase = sdc_phase(sub.grid.extents, sub.grid.positions, kgrid)
    return sub.values * np.exp(-1j * phase)


def _merge_onto_points(children, points: np.ndarray, kgrid: FrequencyGrid,
                       kernel: str) -> tuple[np.ndarray, int]:
    """Sum child subimages at arbitrary spatial points.

    Each child is downconverted samplewise, interpolated at the
    points' compressed coordinates, and re-upconverted with its own
    phase at the evaluation points. A point falling outside any
    child's lattice hull is zeroed and counted; clamping is never used.

    Returns (values, flagged_count).
    """
    points = np.asarray(points, dtype=float)
    total = np.zeros(points.shape[0], dtype=complex)
    good = np.ones(points.shape[0], dtype=bool)
    for sub in children:
        grid = sub.grid
        coords = grid.lattice_coords(llt_forward(grid.extents, points, kgrid))
        interp, ok = lattice_interpolate(_downconvert_samples(sub, kgrid),
                                         coords, kernel)
        total += np.where(ok, interp, 0.0) \
            * np.exp(1j * sdc_phase(grid.extents, points, kgrid))
        good &= ok
    total[~good] = 0.0
    return total, int((~good).sum())


def merge_pair(a: Subimage, b: Subimage, parent_grid: SubimageGrid,
               kgrid: FrequencyGrid,
               kernel: str = "linear") -> tuple[Subimage, int]:
    """Merge two sibling subimages onto their parent's grid.

    Parameters
    ----------
    a, b : Subimage
        Children covering adjacent element slices of the parent.
    parent_grid : SubimageGrid
    kgrid : FrequencyGrid
    kernel : {'linear', 'cubic'}

    Returns
    -------
    (Subimage, int)
        The raw (not downconverted) merged subimage and the count of
        parent points flagged for falling outside a child's hull.
    """
    parent = parent_grid.subarray
    if parent is not None:
        for child in (a, b):
            csa = child.grid.subarray
            if csa is not None and not (parent.start <= csa.start
                                        and csa.stop <= parent.stop):
                raise ConfigError("children must cover element slices inside "
                                  "the parent subarray")
    flat = parent_grid.positions.reshape(-1, 3)
    mask = parent_grid.valid.ravel()
    values = np.zeros(flat.shape[0], dtype=complex)
    flagged = 0
    if mask.any():
        merged, flagged = _merge_onto_points((a, b), flat[mask], kgrid, kernel)
        values[mask] = merged
    return (Subimage(grid=parent_grid, values=values.reshape(parent_grid.dims),
                     downconverted=False), flagged)


def hhffbpa_reconstruct(cube: DataCube, region: ImagingRegion,
                        final_dims=None, params: FfbpParams | None = None,
                        upsample: int = 8) -> ImageVolume:
    """Reconstruct a Cartesian volume by factorized backprojection.

    Range-compresses the cube, partitions the aperture into an M-level
    binary tree, backprojects level-1 subimages onto compressed grids,
    merges siblings level by level, and lands the final merge directly
    on the requested Cartesian grid. With M = 1 there is nothing to
    factorize: the full aperture is backprojected straight onto the
    final grid, which makes the result identical to the direct
    reference reconstruction.

    Parameters
    ----------
    cube : DataCube
    region : ImagingRegion
    final_dims : (nx, ny, nz), optional
        Defaults to the band's resolution-limit grid.
    params : FfbpParams, optional
    upsample : int
        Range-compression upsampling factor.

    Returns
    -------
    ImageVolume
        Provenance records per-level grid sizes and flagged fractions.
    """
    if params is None:
        params = FfbpParams()
    validate_geometry(cube.aperture, region)
    kgrid = cube.freqs
    if final_dims is None:
        final_dims = default_grid_dims(region, kgrid)
    final_dims = tuple(int(d) for d in final_dims)
    levels = params.levels if params.levels is not None \
        else default_levels(cube.aperture)
    profiles = range_compress(cube, upsample)
    check_delay_window(profiles, region)
    origin, step = region_grid(region, final_dims)
    axes = [origin[a] + step[a] * np.arange(final_dims[a]) for a in range(3)]
    mesh = np.meshgrid(*axes, indexing="ij")
    cart = np.stack([m.ravel() for m in mesh], axis=-1)
    n_final = int(np.prod(final_dims))

    if levels == 1:
        values = backproject(profiles, slice(None), cart)
        level_points = [[n_final]]
        merge_flags: list[int] = []
        final_flags = 0
    else:
        # intermediate grids carry one extra pad step: their padded
        # points are themselves interpolation targets one level up
        src_pad = GRID_PAD + (3 if params.kernel == "cubic" else 2)
        tree = partition_subarrays(cube.aperture, levels)
        subs = [level1_reconstruct(
                    profiles, sa,
                    build_subimage_grid(cube.aperture, sa, region, kgrid,
                                        params.gamma, params.margin,
                                        pad=src_pad))
                for sa in tree.levels[0]]
        level_points = [[s.grid.n_valid for s in subs]]
        merge_flags = []
        for m in range(2, levels):
            parents = tree.levels[m - 1]
            merged = []
            flags = 0
            for idx, parent in enumerate(parents):
                pgrid = build_subimage_grid(cube.aperture, parent, region,
                                            kgrid, params.gamma, params.margin,
                                            pad=src_pad)
                sub, fl = merge_pair(subs[2 * idx], subs[2 * idx + 1], pgrid,
                                     kgrid, params.kernel)
                merged.append(sub)
                flags += fl
            merge_flags.append(flags)
            level_points.append([s.grid.n_valid for s in merged])
            subs = merged
        values, final_flags = _merge_onto_points(tuple(subs), cart, kgrid,
                                                 params.kernel)
        level_points.append([n_final])

    merged_total = sum(sum(pts) for pts in level_points[1:])
    flagged_total = sum(merge_flags) + final_flags
    provenance = {
        "algorithm": "hhffbpa",
        "levels": levels,
        "gamma": params.gamma,
        "kernel": params.kernel,
        "margin": params.margin,
        "upsample": upsample,
        "dims": list(final_dims),
        "level_points": [[int(n) for n in pts] for pts in level_points],
        "merge_flags": [int(f) for f in merge_flags],
        "final_flags": int(final_flags),
        "flagged_fraction": (flagged_total / merged_total) if merged_total else 0.0,
    }
    return ImageVolume(values=values.reshape(final_dims), origin=origin,
                       step=step, provenance=provenance)


# ---------------------------------------------------------------------------
# operation-count model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OpCountReport:
    """Closed-form operation counts for one reconstruction setup.

    The measured route substitutes actual grid sizes; the analytic
    route uses the closed-form per-subimage sample count, which treats
    the region as centered at its mid depth under a square aperture.
    Totals are sums of the respective parts.
    """

    levels: int
    c1: float
    c2: float
    c3: float
    n_ops_rc: float
    n_ops_bpa: float
    n_ops_interp: float
    n_ops_bpa_direct: float
    level_points: tuple
    analytic_level_points: tuple
    n_ops_bpa_analytic: float
    n_ops_interp_analytic: float
    wall_times: dict = field(default_factory=dict)

    @property
    def n_ops_total(self) -> float:
        return self.n_ops_rc + self.n_ops_bpa + self.n_ops_interp

    @property
    def n_ops_total_analytic(self) -> float:
        return self.n_ops_rc + self.n_ops_bpa_analytic \
            + self.n_ops_interp_analytic

    @property
    def n_ops_total_direct(self) -> float:
        return self.n_ops_rc + self.n_ops_bpa_direct

    def to_dict(self) -> dict:
        return {
            "levels": self.levels,
            "c1": self.c1, "c2": self.c2, "c3": self.c3,
            "n_ops_rc": self.n_ops_rc,
            "n_ops_bpa": self.n_ops_bpa,
            "n_ops_interp": self.n_ops_interp,
            "n_ops_total": self.n_ops_total,
            "n_ops_bpa_direct": self.n_ops_bpa_direct,
            "n_ops_total_direct": self.n_ops_total_direct,
            "n_ops_bpa_analytic": self.n_ops_bpa_analytic,
            "n_ops_interp_analytic": self.n_ops_interp_analytic,
            "n_ops_total_analytic": self.n_ops_total_analytic,
            "level_points": [list(p) for p in self.level_points],
            "analytic_level_points": list(self.analytic_level_points),
            "wall_times": dict(self.wall_times),
        }


def analytic_subimage_count(level: int, levels: int, side: float,
                            z_mid: float, kgrid: FrequencyGrid,
                            volume: float) -> float:
    """Closed-form sample count of one subimage at a given level.

    Assumes a square aperture of the given side, a region of the given
    volume straddling depth z_mid, and subarrays that shrink only along
    one scan axis, so the subarray area at level m is side^2 / 2^(M-m).
    """
    k_min, k_max = kgrid.k_min, kgrid.k_max
    a = 2.0 ** (level - levels + 1) * side * side + 4.0 * z_mid * z_mid
    b = 2.0 ** (level - levels) * side * side + 4.0 * z_mid * z_mid
    bracket = k_max - 2.0 * k_min * z_mid / np.sqrt(a)
    return float(volume * side * side * k_max ** 2 * bracket
                 / (2.0 ** (levels - level - 2) * np.pi ** 3 * b))


def predict_op_count(aperture: SyntheticAperture, region: ImagingRegion,
                     kgrid: FrequencyGrid, params: FfbpParams | None = None,
                     final_dims=None, c1: float = 1.0, c2: float = 1.0,
                     c3: float = 1.0, wall_times: dict | None = None,
                     measured_level_points=None) -> OpCountReport:
    """Operation counts for the factorized and direct reconstructions.

    Parameters
    ----------
    aperture, region, kgrid
        Problem geometry.
    params : FfbpParams, optional
    final_dims : (nx, ny, nz), optional
        Final Cartesian grid; defaults to the resolution-limit grid.
    c1, c2, c3 : float
        Per-operation constants of range compression, backprojection,
        and interpolation.
    wall_times : dict, optional
        Measured {name: seconds} carried into the report.
    measured_level_points : sequence of sequences, optional
        Per-level per-subimage sample counts from a prior run (as in
        reconstruction provenance); grids are rebuilt when omitted.

    Returns
    -------
    OpCountReport
    """
    if params is None:
        params = FfbpParams()
    levels = params.levels if params.levels is not None \
        else default_levels(aperture)
    if final_dims is None:
        final_dims = default_grid_dims(region, kgrid)
    n_final = int(np.prod([int(d) for d in final_dims]))
    n_a = aperture.n_elements
    n_f = kgrid.count
    ops_rc = c1 * n_a * n_f * np.log2(n_f)
    ops_direct = c2 * n_a * n_final

    if levels == 1:
        level_points: list[list[int]] = [[n_final]]
        ops_bpa = c2 * n_a * n_final
        ops_interp = 0.0
    else:
        tree = partition_subarrays(aperture, levels)
        if measured_level_points is not None:
            level_points = [[int(n) for n in pts]
                            for pts in measured_level_points]
            if len(level_points) != levels:
                raise ConfigError(f"expected {levels} levels of measured "
                                  f"counts, got {len(level_points)}")
        else:
            level_points = []
            for m in range(1, levels):
                counts = [build_subimage_grid(aperture, sa, region, kgrid,
                                              params.gamma,
                                              params.margin).n_valid
                          for sa in tree.levels[m - 1]]
                level_points.append(counts)
            level_points.append([n_final])
        ops_bpa = sum(c2 * sa.size * pts for sa, pts
                      in zip(tree.levels[0], level_points[0]))
        ops_interp = sum(2.0 * c3 * pts
                         for level in level_points[1:] for pts in level)

    side = max(aperture.x_max - aperture.x_min,
               aperture.y_max - aperture.y_min)
    z_mid = region.center[2]
    analytic = tuple(analytic_subimage_count(m, levels, side, z_mid, kgrid,
                                             region.volume)
                     for m in range(1, levels + 1))
    ops_bpa_analytic = c2 * n_a * analytic[0]
    ops_interp_analytic = sum(2.0 * c3 * 2.0 ** (levels - m) * analytic[m - 1]
                              for m in range(2, levels + 1))
    return OpCountReport(
        levels=levels, c1=c1, c2=c2, c3=c3,
        n_ops_rc=float(ops_rc), n_ops_bpa=float(ops_bpa),
        n_ops_interp=float(ops_interp), n_ops_bpa_direct=float(ops_direct),
        level_points=tuple(tuple(p) for p in level_points),
        analytic_level_points=analytic,
        n_ops_bpa_analytic=float(ops_bpa_analytic),
        n_ops_interp_analytic=float(ops_interp_analytic),
        wall_times=dict(wall_times or {}))
