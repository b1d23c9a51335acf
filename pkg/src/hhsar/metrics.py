"""Image-quality metrics: point-spread profiles, PSNR, projections."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bpa import ImageVolume
from .errors import ConfigError, NumericDomainError

PSNR_SENTINEL_DB = 200.0


@dataclass(frozen=True)
class PsfReport:
    """Point-spread function figures for one 1-D cut.

    Parameters
    ----------
    mainlobe_width_mm : float
        Distance between the -3 dB crossings, linearly interpolated in
        dB, in millimeters.
    pslr_db : float
        Peak sidelobe level relative to the mainlobe peak; sidelobes
        are everything beyond the first nulls.
    islr_db : float
        Sidelobe-to-mainlobe energy ratio; the mainlobe spans the
        first nulls.
    peak_position_m : float
        Peak sample offset from the first profile sample, in meters.
    """

    mainlobe_width_mm: float
    pslr_db: float
    islr_db: float
    peak_position_m: float

    def to_dict(self) -> dict:
        return {"mainlobe_width_mm": self.mainlobe_width_mm,
                "pslr_db": self.pslr_db, "islr_db": self.islr_db,
                "peak_position_m": self.peak_position_m}


def _first_null(mag: np.ndarray, peak: int, direction: int) -> int | None:
    """Index of the first local magnitude minimum walking from the peak."""
    i = peak
    while 0 <= i + direction < mag.size:
        if mag[i + direction] > mag[i]:
            return i
        i += direction
    return None


def _cross_minus3db(db: np.ndarray, peak: int, direction: int,
                    stop: int) -> float:
    """Fractional index where the profile crosses -3 dB, by linear
    interpolation in dB between the samples straddling the level."""
    i = peak
    while i != stop:
        j = i + direction
        if db[j] <= -3.0:
            frac = (-3.0 - db[i]) / (db[j] - db[i])
            return i + direction * frac
        i = j
    raise NumericDomainError("profile never falls 3 dB below its peak "
                             "inside the mainlobe")


def psf_metrics(profile: np.ndarray, spacing: float) -> PsfReport:
    """Mainlobe width, PSLR, and ISLR of a 1-D complex profile.

    Parameters
    ----------
    profile : 1-D complex array
        Samples of a cut through a point response; must have a unique
        global magnitude peak.
    spacing : float
        Sample pitch in meters.

    Returns
    -------
    PsfReport

    Raises
    ------
    NumericDomainError
        If no null exists on either side of the peak (unmeasurable) or
        the -3 dB level is never crossed within the mainlobe.
    ConfigError
        Malformed input (not 1-D, too short, non-positive spacing, or
        a non-unique peak).
    """
    p = np.asarray(profile)
    if p.ndim != 1 or p.size < 5:
        raise ConfigError("profile must be 1-D with at least 5 samples")
    if not spacing > 0:
        raise ConfigError("spacing must be positive")
    mag = np.abs(p).astype(float)
    peak_val = mag.max()
    if peak_val == 0.0:
        raise ConfigError("profile is identically zero")
    peaks = np.flatnonzero(mag == peak_val)
    if peaks.size != 1:
        raise ConfigError("profile peak is not unique")
    peak = int(peaks[0])
    left = _first_null(mag, peak, -1)
    right = _first_null(mag, peak, +1)
    if left is None or right is None:
        raise NumericDomainError("no null found on at least one side of the "
                                 "peak; the cut is too short to measure")
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag / peak_val)
    lo = _cross_minus3db(db, peak, -1, left)
    hi = _cross_minus3db(db, peak, +1, right)
    width_m = (hi - lo) * spacing

    main = slice(left, right + 1)
    main_energy = float(np.sum(mag[main] ** 2))
    side_mag = np.concatenate([mag[:left], mag[right + 1:]])
    side_energy = float(np.sum(side_mag ** 2))
    if side_mag.size == 0:
        raise NumericDomainError("no sidelobe region beyond the first nulls")
    pslr = 20.0 * np.log10(side_mag.max() / peak_val) \
        if side_mag.max() > 0 else -np.inf
    islr = 10.0 * np.log10(side_energy / main_energy) \
        if side_energy > 0 else -np.inf
    return PsfReport(mainlobe_width_mm=width_m * 1e3, pslr_db=float(pslr),
                     islr_db=float(islr),
                     peak_position_m=float(peak * spacing))


def psnr(reference: ImageVolume, test: ImageVolume) -> float:
    """Peak signal-to-noise ratio of a test volume against a reference.

    The test volume is first calibrated by the complex least-squares
    scale that best fits it to the reference, so a global amplitude or
    phase factor does not count as error. Identical (post-calibration)
    volumes return the 200 dB sentinel.

    Raises
    ------
    ConfigError
        If the two volumes are not on the same grid.
    """
    if not reference.same_grid(test):
        raise ConfigError("volumes are on different grids")
    ref = reference.values.ravel()
    tst = test.values.ravel()
    denom = np.vdot(tst, tst)
    scale = np.vdot(tst, ref) / denom if denom != 0 else 0.0
    err = tst * scale - ref
    rms = float(np.sqrt(np.mean(np.abs(err) ** 2)))
    peak = float(np.abs(ref).max())
    if rms == 0.0:
        return PSNR_SENTINEL_DB
    return float(min(20.0 * np.log10(peak / rms), PSNR_SENTINEL_DB))


_AXIS_NAMES = {"x": 0, "y": 1, "z": 2}


def _axis_index(axis) -> int:
    if isinstance(axis, str):
        try:
            return _AXIS_NAMES[axis.lower()]
        except KeyError:
            raise ConfigError(f"axis must be one of x, y, z, got '{axis}'")
    idx = int(axis)
    if idx not in (0, 1, 2):
        raise ConfigError(f"axis index must be 0, 1, or 2, got {idx}")
    return idx


def max_intensity_projection(volume: ImageVolume, axis="z",
                             floor_db: float = -40.0) -> np.ndarray:
    """Project a volume to 2-D by the per-pixel magnitude maximum.

    The projection is dB-scaled relative to its own maximum, clipped
    at `floor_db`, and mapped linearly onto [0, 1] (floor -> 0,
    peak -> 1). An all-zero volume maps to all zeros.
    """
    if not floor_db < 0:
        raise ConfigError("floor must be below 0 dB")
    idx = _axis_index(axis)
    mip = np.abs(volume.values).max(axis=idx)
    peak = mip.max()
    if peak == 0.0:
        return np.zeros_like(mip)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mip / peak)
    db = np.maximum(db, floor_db)
    return (db - floor_db) / (-floor_db)


def profile_cut(volume: ImageVolume, axis, through) -> tuple[np.ndarray, float]:
    """Extract the 1-D cut along an axis passing nearest a spatial point.

    Parameters
    ----------
    volume : ImageVolume
    axis : {'x', 'y', 'z'} or {0, 1, 2}
        Direction of the cut.
    through : (x, y, z) meters
        The cut runs through the voxel nearest this point.

    Returns
    -------
    (samples, spacing) : 1-D complex array and its pitch in meters
    """
    idx = _axis_index(axis)
    through = np.asarray(through, dtype=float).reshape(3)
    sel: list = []
    for a in range(3):
        if a == idx:
            sel.append(slice(None))
            continue
        coords = volume.axis_coords(a)
        nearest = int(np.argmin(np.abs(coords - through[a])))
        sel.append(nearest)
    samples = volume.values[tuple(sel)]
    return np.asarray(samples), float(volume.step[idx])
