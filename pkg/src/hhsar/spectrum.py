"""Analytic local-spectrum machinery.

A point reconstructed from a subarray can only contain spatial
frequencies 2k*(p - p')/|p - p'| for elements p' of the subarray and
wavenumbers k inside the band. This module bounds that support
analytically: seven key wavenumber vectors whose differences span a
parallelepiped around the support, the scalar downconversion phase
whose gradient is the parallelepiped center, the (u, v, n) coordinates
that stretch the box onto a unit lattice, exact per-axis sampling
rates, and a Newton inversion of the coordinate map for grid
generation. Everything here is a pure function of geometry, vectorized
over points whose last axis is (x, y, z).

Orientation convention: the gradient rows of (u, v, n) equal
(-v1, -v2, +v3)/(2*pi) with the generating vectors as defined below;
`llt_jacobian` returns the (v1, v2, v3)/(2*pi) matrix whose absolute
determinant (all that sampling density uses) is identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import HAVE_NUMBA, _invert_newton_jit
from .errors import ConfigError, NumericDomainError
from .model import FrequencyGrid, ImagingRegion, Subarray, SyntheticAperture

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SubarrayExtents:
    """Lateral bounding box of a subarray's elements (z' treated as 0)."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ConfigError("subarray extents need min <= max per axis")

    @classmethod
    def from_aperture(cls, aperture: SyntheticAperture,
                      subarray: Subarray | None = None) -> "SubarrayExtents":
        """Actual element-position bounds of a subarray (whole aperture
        when subarray is None)."""
        e = aperture.elements if subarray is None \
            else aperture.elements[subarray.start:subarray.stop]
        return cls(float(e[:, 0].min()), float(e[:, 0].max()),
                   float(e[:, 1].min()), float(e[:, 1].max()))

    @property
    def dx(self) -> float:
        return self.x_max - self.x_min

    @property
    def dy(self) -> float:
        return self.y_max - self.y_min

    def vertices(self) -> np.ndarray:
        """The four corners in the z' = 0 plane, shape (4, 3)."""
        return np.array([(self.x_min, self.y_min, 0.0),
                         (self.x_min, self.y_max, 0.0),
                         (self.x_max, self.y_min, 0.0),
                         (self.x_max, self.y_max, 0.0)])


@dataclass(frozen=True)
class KeyPointSet:
    """Key wavenumber vectors and the spanning box they generate.

    Every field broadcasts with the query points: for points of shape
    (..., 3) each vector field has shape (..., 3).
    """

    k1: np.ndarray
    k2: np.ndarray
    k3: np.ndarray
    k4: np.ndarray
    k5: np.ndarray
    k6: np.ndarray
    k7: np.ndarray

    @property
    def v1(self) -> np.ndarray:
        return self.k2 - self.k1

    @property
    def v2(self) -> np.ndarray:
        return self.k4 - self.k3

    @property
    def v3(self) -> np.ndarray:
        return self.k7 - self.k5

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.k5 + self.k7)


def local_wavenumber(p_prime, p, k) -> np.ndarray:
    """Spatial frequency contributed at p by an element at p_prime.

    2k times the unit vector from p_prime to p; its magnitude is
    exactly 2k.
    """
    p_prime = np.asarray(p_prime, dtype=float)
    p = np.asarray(p, dtype=float)
    diff = p - p_prime
    dist = np.linalg.norm(diff, axis=-1, keepdims=True)
    if np.any(dist == 0.0):
        raise NumericDomainError("coincident point and element")
    return 2.0 * np.asarray(k) * diff / dist


def _distance(p, q) -> np.ndarray:
    return np.linalg.norm(np.asarray(p, dtype=float) - q, axis=-1)


def _corner_distances(ext: SubarrayExtents, p) -> tuple:
    # componentwise, avoiding (..., 4, 3) temporaries on large batches
    p = np.asarray(p, dtype=float)
    z2 = p[..., 2] ** 2
    dxa2 = (p[..., 0] - ext.x_min) ** 2
    dxb2 = (p[..., 0] - ext.x_max) ** 2
    dya2 = (p[..., 1] - ext.y_min) ** 2
    dyb2 = (p[..., 1] - ext.y_max) ** 2
    return (np.sqrt(dxa2 + dya2 + z2), np.sqrt(dxa2 + dyb2 + z2),
            np.sqrt(dxb2 + dya2 + z2), np.sqrt(dxb2 + dyb2 + z2))


def vertex_distance_sum(ext: SubarrayExtents, p) -> np.ndarray:
    """Sum of distances from p to the four subarray vertices."""
    daa, dab, dba, dbb = _corner_distances(ext, p)
    return ((daa + dab) + dba) + dbb


def _box_gap(ext: SubarrayExtents) -> float:
    # the radicand offset in beta and the downconversion phase
    return 4.0 * ext.dx ** 2 + 4.0 * ext.dy ** 2


def _beta_radicand(ext: SubarrayExtents, p) -> np.ndarray:
    r = vertex_distance_sum(ext, p)
    return r * r - _box_gap(ext)


def _rad_invalid(rad, gap: float) -> np.ndarray:
    # relative guard: radicands that are analytically zero can round to
    # a tiny positive float, so compare against the gap's scale
    return rad <= gap * 1e-12


def check_beta_domain(ext: SubarrayExtents, points) -> None:
    """Reject points too close to the array plane for the box to exist."""
    rad = _beta_radicand(ext, points)
    if np.any(_rad_invalid(rad, _box_gap(ext))):
        worst = float(np.min(rad))
        raise NumericDomainError(
            "point too close to the array plane relative to the subarray "
            f"size (radicand minimum {worst:.3e}); increase standoff or "
            "use more factorization levels with smaller subarrays")


def _clamped_anchor(ext: SubarrayExtents, p) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=float)
    x0 = np.clip(p[..., 0], ext.x_min, ext.x_max)
    y0 = np.clip(p[..., 1], ext.y_min, ext.y_max)
    return x0, y0


def _stack_prime(x, y) -> np.ndarray:
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float),
                               np.asarray(y, dtype=float))
    return np.stack([x, y, np.zeros_like(x)], axis=-1)


def keypoints(ext: SubarrayExtents, p, kgrid: FrequencyGrid) -> KeyPointSet:
    """The seven key wavenumber vectors for a subarray at query points.

    k1..k4 sit at the band top using the edge-midpoint element
    positions with the lateral coordinate clamped into the subarray;
    k5 averages the four vertex wavenumbers at the band bottom; k6
    rescales k5 to the 2*k_max sphere; k7 rescales k5 by the
    integrating factor beta(r), which makes the resulting vector field
    curl-free while agreeing with k6 on boresight.

    Parameters
    ----------
    ext : SubarrayExtents
    p : array-like, shape (..., 3)
        Query points, strictly in front of the array plane.
    kgrid : FrequencyGrid

    Returns
    -------
    KeyPointSet

    Raises
    ------
    NumericDomainError
        Where the beta radicand r^2 - 4*dx'^2 - 4*dy'^2 is not positive.
    """
    p = np.asarray(p, dtype=float)
    k_min, k_max = kgrid.k_min, kgrid.k_max
    x0, y0 = _clamped_anchor(ext, p)
    k1 = local_wavenumber(_stack_prime(ext.x_min, y0), p, k_max)
    k2 = local_wavenumber(_stack_prime(ext.x_max, y0), p, k_max)
    k3 = local_wavenumber(_stack_prime(x0, ext.y_min), p, k_max)
    k4 = local_wavenumber(_stack_prime(x0, ext.y_max), p, k_max)
    k5 = sum(local_wavenumber(v, p, k_min) for v in ext.vertices()) / 4.0
    r = vertex_distance_sum(ext, p)
    rad = r * r - _box_gap(ext)
    if np.any(_rad_invalid(rad, _box_gap(ext))):
        raise NumericDomainError(
            "beta undefined: point too close to the array plane for this "
            "subarray size")
    k5_mag = np.linalg.norm(k5, axis=-1, keepdims=True)
    k6 = 2.0 * k_max * k5 / k5_mag
    beta = k_max * r / (k_min * np.sqrt(rad))
    k7 = beta[..., None] * k5
    return KeyPointSet(k1=k1, k2=k2, k3=k3, k4=k4, k5=k5, k6=k6, k7=k7)


def sdc_phase(ext: SubarrayExtents, p, kgrid: FrequencyGrid) -> np.ndarray:
    """Spatial downconversion phase whose gradient is the box center.

    Multiplying a subimage by exp(-1j*phase) shifts its local spectrum
    to the origin before interpolation.
    """
    r = vertex_distance_sum(ext, p)
    rad = r * r - _box_gap(ext)
    if np.any(_rad_invalid(rad, _box_gap(ext))):
        raise NumericDomainError("downconversion phase undefined this close "
                                 "to the array plane")
    return 0.25 * kgrid.k_max * np.sqrt(rad) + 0.25 * kgrid.k_min * r


def llt_forward(ext: SubarrayExtents, p, kgrid: FrequencyGrid) -> np.ndarray:
    """Map spatial points to the compressed (u, v, n) coordinates.

    One unit step in any output coordinate corresponds to one Nyquist
    sample of the downconverted subimage, so a unit lattice in
    (u, v, n) samples the subimage at its local rate everywhere.

    Returns an array shaped like p with (u, v, n) on the last axis.
    """
    u, v, r, rad = _lateral_and_radicand(ext, p, kgrid)
    if np.any(_rad_invalid(rad, _box_gap(ext))):
        raise NumericDomainError("compressed coordinates undefined this "
                                 "close to the array plane")
    n = (kgrid.k_max / (2.0 * TWO_PI)) * np.sqrt(rad) \
        - (kgrid.k_min / (2.0 * TWO_PI)) * r
    return np.stack([u, v, n], axis=-1)


def _lateral_and_radicand(ext: SubarrayExtents, p, kgrid: FrequencyGrid):
    # shared componentwise geometry for the forward map; one pass over p
    p = np.asarray(p, dtype=float)
    k_max = kgrid.k_max
    x0, y0 = _clamped_anchor(ext, p)
    z2 = p[..., 2] ** 2
    dy0 = (p[..., 1] - y0) ** 2
    u = (k_max / np.pi) * (np.sqrt((p[..., 0] - ext.x_min) ** 2 + dy0 + z2)
                           - np.sqrt((p[..., 0] - ext.x_max) ** 2 + dy0 + z2))
    dx0 = (p[..., 0] - x0) ** 2
    v = (k_max / np.pi) * (np.sqrt(dx0 + (p[..., 1] - ext.y_min) ** 2 + z2)
                           - np.sqrt(dx0 + (p[..., 1] - ext.y_max) ** 2 + z2))
    r = vertex_distance_sum(ext, p)
    rad = r * r - _box_gap(ext)
    return u, v, r, rad


def llt_jacobian(ext: SubarrayExtents, p, kgrid: FrequencyGrid) -> np.ndarray:
    """Local linear transform matrix built from the generating vectors.

    Rows are (v1, v2, v3)/(2*pi); see the module docstring for the
    orientation convention relative to the true gradient.

    Returns shape (..., 3, 3).
    """
    kp = keypoints(ext, p, kgrid)
    ts = np.stack([kp.v1, kp.v2, kp.v3], axis=-2) / TWO_PI
    det = np.linalg.det(ts)
    if np.any(np.abs(det) < 1e-30):
        raise NumericDomainError("degenerate geometry: generating vectors "
                                 "are linearly dependent")
    return ts


def forward_jacobian(ext: SubarrayExtents, p, kgrid: FrequencyGrid) -> np.ndarray:
    """True gradient d(u,v,n)/d(x,y,z), rows (-v1, -v2, +v3)/(2*pi)."""
    kp = keypoints(ext, p, kgrid)
    return np.stack([-kp.v1, -kp.v2, kp.v3], axis=-2) / TWO_PI


def _solve3(jac: np.ndarray, rhs: np.ndarray):
    """Batched 3x3 solve via the adjugate; never raises.

    Returns (solution, singular_mask); singular rows get zero solutions.
    """
    a = jac
    c00 = a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1]
    c01 = a[..., 1, 2] * a[..., 2, 0] - a[..., 1, 0] * a[..., 2, 2]
    c02 = a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0]
    det = a[..., 0, 0] * c00 + a[..., 0, 1] * c01 + a[..., 0, 2] * c02
    singular = np.abs(det) < 1e-30
    safe = np.where(singular, 1.0, det)
    c10 = a[..., 0, 2] * a[..., 2, 1] - a[..., 0, 1] * a[..., 2, 2]
    c11 = a[..., 0, 0] * a[..., 2, 2] - a[..., 0, 2] * a[..., 2, 0]
    c12 = a[..., 0, 1] * a[..., 2, 0] - a[..., 0, 0] * a[..., 2, 1]
    c20 = a[..., 0, 1] * a[..., 1, 2] - a[..., 0, 2] * a[..., 1, 1]
    c21 = a[..., 0, 2] * a[..., 1, 0] - a[..., 0, 0] * a[..., 1, 2]
    c22 = a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    x = (c00 * rhs[..., 0] + c10 * rhs[..., 1] + c20 * rhs[..., 2]) / safe
    y = (c01 * rhs[..., 0] + c11 * rhs[..., 1] + c21 * rhs[..., 2]) / safe
    z = (c02 * rhs[..., 0] + c12 * rhs[..., 1] + c22 * rhs[..., 2]) / safe
    sol = np.stack([x, y, z], axis=-1)
    sol[singular] = 0.0
    return sol, singular


def invert_lattice(ext: SubarrayExtents, targets: np.ndarray,
                   guesses: np.ndarray, kgrid: FrequencyGrid,
                   tol: float = 1e-9, max_iter: int = 50,
                   max_step: float | None = None,
                   z_floor: float = 1e-4):
    """Newton-invert the coordinate map for many targets at once.

    Damped Newton iteration with the analytic Jacobian: steps are
    clipped to max_step and z is floored to keep iterates on the
    correct side of the array plane. Points that fail to converge are
    reported in the mask rather than raised, since lattice corners can
    legitimately fall outside the map's image.

    Parameters
    ----------
    ext : SubarrayExtents
    targets : ndarray, shape (n, 3)
        Desired (u, v, n) values.
    guesses : ndarray, shape (n, 3)
        Starting positions.
    kgrid : FrequencyGrid
    tol : float
        Convergence threshold on the max-norm residual in (u, v, n).
    max_iter : int
    max_step : float, optional
        Trust radius [m] per iteration; no clipping when None.
    z_floor : float
        Minimum z [m] enforced on iterates.

    Returns
    -------
    (positions, converged, iterations)
        ndarray (n, 3), bool ndarray (n,), int ndarray (n,); the
        iteration count is where each point stopped (converged, gave
        up, or hit the cap).
    """
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    start = np.ascontiguousarray(guesses, dtype=np.float64).copy()
    if HAVE_NUMBA:
        return _invert_newton_jit(ext.x_min, ext.x_max, ext.y_min, ext.y_max,
                                  kgrid.k_min, kgrid.k_max, targets, start,
                                  float(tol), int(max_iter),
                                  float(max_step if max_step else 0.0),
                                  float(z_floor))
    start[:, 2] = np.maximum(start[:, 2], z_floor)
    pos = start.copy()
    alive = np.ones(pos.shape[0], dtype=bool)
    iters = np.full(pos.shape[0], max_iter, dtype=np.int64)
    for sweep in range(1, max_iter + 1):
        if not alive.any():
            break
        cur = pos[alive]
        res = llt_forward_masked(ext, cur, kgrid) - targets[alive]
        finite = np.isfinite(res).all(axis=-1)
        res = np.where(finite[..., None], res, 0.0)
        done = finite & (np.max(np.abs(res), axis=-1) <= tol)
        jac = forward_jacobian_masked(ext, cur, kgrid)
        jac_ok = np.isfinite(jac).all(axis=(-1, -2))
        jac = np.where(jac_ok[..., None, None], jac, np.eye(3))
        step, singular = _solve3(jac, res)
        # a non-finite iterate or degenerate Jacobian means the target
        # has no reachable preimage from here: give up on that point
        dead = ~finite | ~jac_ok | singular
        if max_step is not None:
            norms = np.linalg.norm(step, axis=-1, keepdims=True)
            step = step * np.minimum(1.0, max_step / np.maximum(norms, 1e-300))
        step[done | dead] = 0.0
        cur = cur - step
        cur[:, 2] = np.maximum(cur[:, 2], z_floor)
        pos[alive] = cur
        idx = np.flatnonzero(alive)
        stopped = done | dead
        iters[idx[stopped]] = sweep
        alive[idx[stopped]] = False
    final = llt_forward_masked(ext, pos, kgrid)
    err = np.where(np.isfinite(final), np.abs(final - targets), np.inf)
    converged = np.max(err, axis=-1) <= tol
    # non-converged entries keep their finite starting point so callers
    # can still evaluate geometry there; the mask is authoritative
    pos = np.where(converged[:, None], pos, start)
    return pos, converged, iters


def llt_forward_masked(ext: SubarrayExtents, p, kgrid: FrequencyGrid) -> np.ndarray:
    """`llt_forward` that yields NaN instead of raising outside the
    beta domain; Newton internals treat NaN residuals as unconverged."""
    u, v, r, rad = _lateral_and_radicand(ext, p, kgrid)
    k_min, k_max = kgrid.k_min, kgrid.k_max
    bad = _rad_invalid(rad, _box_gap(ext))
    with np.errstate(invalid="ignore"):
        n = (k_max / (2.0 * TWO_PI)) * np.sqrt(np.where(bad, np.nan, rad)) \
            - (k_min / (2.0 * TWO_PI)) * r
    return np.stack([u, v, n], axis=-1)


def forward_jacobian_masked(ext: SubarrayExtents, p,
                            kgrid: FrequencyGrid) -> np.ndarray:
    """`forward_jacobian` with NaN rows outside the beta domain."""
    p = np.asarray(p, dtype=float)
    k_min, k_max = kgrid.k_min, kgrid.k_max
    x0, y0 = _clamped_anchor(ext, p)
    k1 = local_wavenumber(_stack_prime(ext.x_min, y0), p, k_max)
    k2 = local_wavenumber(_stack_prime(ext.x_max, y0), p, k_max)
    k3 = local_wavenumber(_stack_prime(x0, ext.y_min), p, k_max)
    k4 = local_wavenumber(_stack_prime(x0, ext.y_max), p, k_max)
    k5 = sum(local_wavenumber(v, p, k_min) for v in ext.vertices()) / 4.0
    r = vertex_distance_sum(ext, p)
    rad = r * r - _box_gap(ext)
    bad = _rad_invalid(rad, _box_gap(ext))
    with np.errstate(invalid="ignore", divide="ignore"):
        beta = k_max * r / (k_min * np.sqrt(np.where(bad, np.nan, rad)))
    k7 = beta[..., None] * k5
    return np.stack([k1 - k2, k3 - k4, k7 - k5], axis=-2) / TWO_PI


def llt_invert(ext: SubarrayExtents, target, guess, kgrid: FrequencyGrid,
               region: ImagingRegion | None = None, margin: float = 0.25,
               tol: float = 1e-9, max_iter: int = 50,
               max_step: float | None = None) -> np.ndarray:
    """Invert the coordinate map for a single (u, v, n) target.

    Parameters
    ----------
    ext : SubarrayExtents
    target : (u, v, n)
    guess : (x, y, z)
        Starting point in front of the array.
    kgrid : FrequencyGrid
    region : ImagingRegion, optional
        When given, the result must land inside the region grown by
        `margin` (a fraction of each extent).
    margin : float
    tol, max_iter, max_step
        Newton controls as in `invert_lattice`.

    Returns
    -------
    ndarray, shape (3,)

    Raises
    ------
    NumericDomainError
        On non-convergence or a result outside the expanded region.
    """
    if max_step is None and region is not None:
        max_step = 0.5 * region.diagonal
    pos, ok, _ = invert_lattice(ext, np.atleast_2d(np.asarray(target, float)),
                                np.atleast_2d(np.asarray(guess, float)), kgrid,
                                tol=tol, max_iter=max_iter, max_step=max_step)
    if not ok[0]:
        raise NumericDomainError(f"coordinate inversion did not converge in "
                                 f"{max_iter} iterations for target {target}")
    if region is not None and not bool(region.contains(pos[0], margin)):
        raise NumericDomainError(f"inverted position {tuple(pos[0])} lies "
                                 "outside the margin-expanded region")
    return pos[0]


# ---------------------------------------------------------------------------
# sampling rates
# ---------------------------------------------------------------------------

def _as_extents(aperture_or_extents) -> SubarrayExtents:
    if isinstance(aperture_or_extents, SubarrayExtents):
        return aperture_or_extents
    if isinstance(aperture_or_extents, SyntheticAperture):
        return SubarrayExtents.from_aperture(aperture_or_extents)
    raise ConfigError("expected SubarrayExtents or SyntheticAperture")


def nyquist_rates(aperture_or_extents, region: ImagingRegion,
                  kgrid: FrequencyGrid) -> tuple[float, float, float]:
    """Worst-case alias-free voxel pitches (dx, dy, dz) over the region.

    Evaluates the closed-form bounds on the per-axis spectral support:
    lateral rates from the extreme look angles between region and
    aperture edges at the band top, the depth rate from the spread
    between the band top and the most oblique band-bottom return.
    """
    ext = _as_extents(aperture_or_extents)
    if region.z_min <= 0:
        raise ConfigError("region must sit strictly in front of the z' = 0 "
                          "plane for rate evaluation")
    k_min, k_max = kgrid.k_min, kgrid.k_max
    z2 = region.z_min ** 2

    def slope(a):
        return a / np.sqrt(a * a + z2)

    dx = np.pi / (k_max * (slope(region.x_max - ext.x_min)
                           - slope(region.x_min - ext.x_max)))
    dy = np.pi / (k_max * (slope(region.y_max - ext.y_min)
                           - slope(region.y_min - ext.y_max)))
    x_d = max(abs(region.x_min - ext.x_max), abs(region.x_max - ext.x_min))
    y_d = max(abs(region.y_min - ext.y_max), abs(region.y_max - ext.y_min))
    dz = np.pi / (k_max - k_min * region.z_min
                  / np.sqrt(x_d ** 2 + y_d ** 2 + z2))
    return (float(dx), float(dy), float(dz))


def nyquist_sample_count(aperture_or_extents, region: ImagingRegion,
                         kgrid: FrequencyGrid) -> float:
    """Region volume divided by the Nyquist voxel volume."""
    dx, dy, dz = nyquist_rates(aperture_or_extents, region, kgrid)
    return region.volume / (dx * dy * dz)


def resolution_limit_rates(kgrid: FrequencyGrid) -> tuple[float, float, float]:
    """Finest-possible voxel pitches for the band, the z_min -> 0 limit
    of `nyquist_rates`: pi/(2 k_max) laterally and pi/k_max in depth."""
    return (np.pi / (2.0 * kgrid.k_max), np.pi / (2.0 * kgrid.k_max),
            np.pi / kgrid.k_max)


def default_grid_dims(region: ImagingRegion, kgrid: FrequencyGrid) -> tuple:
    """Reconstruction grid dims at the band's resolution limits."""
    rates = resolution_limit_rates(kgrid)
    return tuple(int(round(extent / rate)) + 1
                 for extent, rate in zip(region.extents, rates))


# ---------------------------------------------------------------------------
# containment diagnostics
# ---------------------------------------------------------------------------

def containment_extent(ext: SubarrayExtents, p, kgrid: FrequencyGrid) -> np.ndarray:
    """Largest box coordinate needed to contain the corner wavenumbers.

    For each query point, expresses all eight corner wavenumbers
    (four subarray vertices at both band edges) in the half-vector
    basis around the box center and returns the largest absolute
    coefficient; values at or below 1 mean the parallelepiped contains
    the corner spectrum exactly, and the inflation tolerance absorbs
    the rest.
    """
    p = np.asarray(p, dtype=float)
    kp = keypoints(ext, p, kgrid)
    basis = np.stack([kp.v1, kp.v2, kp.v3], axis=-1)  # vectors as columns
    worst = np.zeros(p.shape[:-1])
    for vertex in ext.vertices():
        for k in (kgrid.k_min, kgrid.k_max):
            corner = local_wavenumber(vertex, p, k)
            rhs = 2.0 * (corner - kp.center)
            coeff, singular = _solve3(basis, rhs)
            coeff = np.where(singular[..., None], np.inf, coeff)
            worst = np.maximum(worst, np.max(np.abs(coeff), axis=-1))
    return worst
