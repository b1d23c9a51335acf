"""Command-line interface: simulate, reconstruct, metrics, project, bench."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from ._kernels import set_threads
from .bpa import bpa_reconstruct
from .errors import ConfigError, HhsarError, IoFormatError, NumericDomainError
from .ffbp import FfbpParams, hhffbpa_reconstruct, predict_op_count
from .io import (export_projection, read_cube, read_json, read_volume,
                 region_from_doc, write_cube, write_report, write_volume)
from .metrics import max_intensity_projection, profile_cut, psf_metrics, psnr
from .model import (FrequencyGrid, ImagingRegion, JitterSpec, Scene,
                    SyntheticAperture, generate_handheld_aperture)
from .simulator import DataCube, scene_from_spec, simulate_measurement


def _fail(where: str, message: str) -> ConfigError:
    return ConfigError(f"{where}: {message}")


def _as_mapping(doc, where: str) -> dict:
    if not isinstance(doc, dict):
        raise _fail(where, "must be an object")
    return doc


def _no_unknown(doc: dict, allowed, where: str) -> None:
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise _fail(where, f"unknown field(s) {', '.join(unknown)}")


def _get_number(doc: dict, key: str, where: str, required=True,
                default=None, integer=False, minimum=None):
    if key not in doc:
        if required:
            raise _fail(f"{where}.{key}", "is required")
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(f"{where}.{key}", "must be a number")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise _fail(f"{where}.{key}", "must be an integer")
        value = int(value)
    if minimum is not None and value < minimum:
        raise _fail(f"{where}.{key}", f"must be at least {minimum}")
    return value


def _get_triplet(doc: dict, key: str, where: str):
    value = doc.get(key)
    if (not isinstance(value, list) or len(value) != 3
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                       for v in value)):
        raise _fail(f"{where}.{key}", "must be a list of 3 numbers")
    return tuple(float(v) for v in value)


@dataclass(frozen=True)
class RunConfig:
    """Validated simulation setup parsed from a config document."""

    nx: int
    ny: int
    extent: float
    jitter: JitterSpec
    freqs: FrequencyGrid
    region: ImagingRegion
    scene: Scene
    seed: int
    algorithm: dict
    dims: tuple | None

    def build_aperture(self, nx: int | None = None,
                       ny: int | None = None) -> SyntheticAperture:
        return generate_handheld_aperture(nx or self.nx, ny or self.ny,
                                          self.extent, self.jitter, self.seed)


def _parse_frequencies(doc: dict) -> FrequencyGrid:
    where = "frequencies"
    doc = _as_mapping(doc, where)
    _no_unknown(doc, {"start_hz", "stop_hz", "step_hz", "count"}, where)
    start = _get_number(doc, "start_hz", where, minimum=0.0)
    count = _get_number(doc, "count", where, integer=True, minimum=2)
    has_stop, has_step = "stop_hz" in doc, "step_hz" in doc
    if has_stop == has_step:
        raise _fail(where, "give exactly one of stop_hz or step_hz")
    if has_step:
        step = _get_number(doc, "step_hz", where, minimum=0.0)
        stop = start + step * (count - 1)
    else:
        stop = _get_number(doc, "stop_hz", where, minimum=0.0)
    if stop <= start:
        raise _fail(where, "band must have positive width")
    return FrequencyGrid(f_min=float(start), f_max=float(stop),
                         count=int(count))


def _parse_region(doc: dict) -> ImagingRegion:
    where = "region"
    doc = _as_mapping(doc, where)
    if "center" in doc or "extents" in doc:
        _no_unknown(doc, {"center", "extents"}, where)
        center = _get_triplet(doc, "center", where)
        extents = _get_triplet(doc, "extents", where)
        return ImagingRegion.from_center(center, extents)
    _no_unknown(doc, {"x", "y", "z"}, where)
    try:
        return region_from_doc(doc)
    except IoFormatError as e:
        raise _fail(where, str(e))


def _parse_aperture(doc: dict) -> tuple[int, int, float, JitterSpec]:
    where = "aperture"
    doc = _as_mapping(doc, where)
    _no_unknown(doc, {"nx", "ny", "extent", "jitter"}, where)
    nx = _get_number(doc, "nx", where, integer=True, minimum=2)
    ny = _get_number(doc, "ny", where, integer=True, minimum=2)
    extent = _get_number(doc, "extent", where, minimum=0.0)
    jitter_doc = _as_mapping(doc.get("jitter", {}), f"{where}.jitter")
    _no_unknown(jitter_doc, {"depth_amplitude", "lateral_sigma"},
                f"{where}.jitter")
    jitter = JitterSpec(
        depth_amplitude=_get_number(jitter_doc, "depth_amplitude",
                                    f"{where}.jitter", required=False,
                                    default=0.0, minimum=0.0),
        lateral_sigma=_get_number(jitter_doc, "lateral_sigma",
                                  f"{where}.jitter", required=False,
                                  default=0.0, minimum=0.0))
    return nx, ny, float(extent), jitter


def _parse_algorithm(doc) -> dict:
    where = "algorithm"
    doc = _as_mapping(doc, where)
    _no_unknown(doc, {"name", "levels", "oversample", "kernel"}, where)
    name = doc.get("name", "hhffbpa")
    if name not in ("bpa", "hhffbpa"):
        raise _fail(f"{where}.name", "must be 'bpa' or 'hhffbpa'")
    out = {"name": name}
    if "levels" in doc:
        out["levels"] = _get_number(doc, "levels", where, integer=True,
                                    minimum=1)
    if "oversample" in doc:
        out["oversample"] = float(_get_number(doc, "oversample", where,
                                              minimum=1.0))
    if "kernel" in doc:
        if doc["kernel"] not in ("linear", "cubic"):
            raise _fail(f"{where}.kernel", "must be 'linear' or 'cubic'")
        out["kernel"] = doc["kernel"]
    return out


def load_run_config(path) -> RunConfig:
    """Read and validate a run configuration document."""
    doc = read_json(path)
    _no_unknown(doc, {"aperture", "frequencies", "region", "scene", "seed",
                      "algorithm", "dims"}, "config")
    for key in ("aperture", "frequencies", "region", "scene"):
        if key not in doc:
            raise _fail(f"config.{key}", "is required")
    nx, ny, extent, jitter = _parse_aperture(doc["aperture"])
    freqs = _parse_frequencies(doc["frequencies"])
    region = _parse_region(doc["region"])
    scene = scene_from_spec(_as_mapping(doc["scene"], "scene"), region)
    seed = _get_number(doc, "seed", "config", required=False, default=0,
                       integer=True, minimum=0)
    algorithm = _parse_algorithm(doc.get("algorithm", {}))
    dims = None
    if "dims" in doc:
        trip = _get_triplet(doc, "dims", "config")
        if any(v != int(v) or v < 1 for v in trip):
            raise _fail("config.dims", "must be positive integers")
        dims = tuple(int(v) for v in trip)
    return RunConfig(nx=nx, ny=ny, extent=extent, jitter=jitter, freqs=freqs,
                     region=region, scene=scene, seed=seed,
                     algorithm=algorithm, dims=dims)


def _log(message: str) -> None:
    print(message, file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = load_run_config(args.config)
    aperture = cfg.build_aperture()
    cube = simulate_measurement(cfg.scene, aperture, cfg.freqs)
    write_cube(args.out, cube, region=cfg.region,
               provenance={"generator": "simulate", "seed": cfg.seed,
                           "scatterers": cfg.scene.n_scatterers})
    _log(f"simulated {aperture.n_elements} elements x {cfg.freqs.count} "
         f"frequencies ({cfg.scene.n_scatterers} scatterers) -> {args.out}")
    return 0


def _parse_dims(text: str | None):
    if text is None:
        return None
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError("--dims must be nx,ny,nz")
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        raise ConfigError("--dims must be integers")
    if any(d < 1 for d in dims):
        raise ConfigError("--dims must be positive")
    return dims


def cmd_reconstruct(args) -> int:
    cube, region = read_cube(args.in_path)
    if region is None:
        raise ConfigError("cube sidecar carries no imaging region; "
                          "re-simulate with a region or edit the sidecar")
    dims = _parse_dims(args.dims)
    start = time.perf_counter()
    if args.algo == "bpa":
        volume = bpa_reconstruct(cube, region, dims, upsample=args.upsample)
    else:
        params = FfbpParams(levels=args.levels, gamma=args.oversample,
                            kernel=args.kernel)
        volume = hhffbpa_reconstruct(cube, region, dims, params,
                                     upsample=args.upsample)
    elapsed = time.perf_counter() - start
    write_volume(args.out, volume)
    _log(f"{args.algo}: {elapsed:.2f} s -> {args.out}")
    if args.algo == "hhffbpa":
        for level, pts in enumerate(volume.provenance["level_points"], 1):
            _log(f"  level {level}: {len(pts)} subimage(s), "
                 f"{sum(pts)} samples")
        _log(f"  flagged fraction: "
             f"{volume.provenance['flagged_fraction']:.2e}")
    return 0


def _parse_psf_cut(text: str):
    parts = text.split(",")
    if len(parts) != 4 or parts[0] not in ("x", "y", "z"):
        raise ConfigError("--psf-cut must be axis,x,y,z with axis in {x,y,z}")
    try:
        point = tuple(float(p) for p in parts[1:])
    except ValueError:
        raise ConfigError("--psf-cut coordinates must be numbers")
    return parts[0], point


def cmd_metrics(args) -> int:
    reference = read_volume(args.ref)
    test = read_volume(args.test)
    report: dict = {"psnr_db": psnr(reference, test)}
    if args.psf_cut:
        axis, point = _parse_psf_cut(args.psf_cut)
        cut_ref, pitch = profile_cut(reference, axis, point)
        cut_test, _ = profile_cut(test, axis, point)
        report["psf"] = {"axis": axis, "through": list(point),
                         "ref": psf_metrics(cut_ref, pitch).to_dict(),
                         "test": psf_metrics(cut_test, pitch).to_dict()}
    if args.out:
        write_report(args.out, report)
        _log(f"metrics -> {args.out}")
    else:
        json.dump(report, sys.stdout, indent=1, sort_keys=True)
        sys.stdout.write("\n")
    return 0


def cmd_project(args) -> int:
    volume = read_volume(args.in_path)
    image = max_intensity_projection(volume, args.axis, floor_db=args.floor)
    export_projection(image, args.out, depth=args.depth)
    _log(f"projection along {args.axis} -> {args.out}")
    return 0


def _fit_slope(rows) -> float | None:
    sizes = np.array([r[0] for r in rows], dtype=float)
    secs = np.array([r[2] for r in rows], dtype=float)
    keep = np.isfinite(secs) & (secs > 0)
    if keep.sum() < 2:
        return None
    return float(np.polyfit(np.log(sizes[keep]), np.log(secs[keep]), 1)[0])


def bench_levels(size: int) -> int:
    """Factorization depth for a bench run at the given aperture side.

    Grows as 2*log2(side) so first-level subarrays keep a fixed
    physical extent as the scan grows; this is what lets the merge
    pyramid, not the first-level backprojection, carry the cost.
    """
    return max(1, int(np.floor(2.0 * np.log2(size))) - 5)


def bench_setup(cfg: RunConfig, size: int):
    """Scale the configured geometry to an aperture of the given side.

    Element pitch is preserved: the scan extent, imaging region, scene,
    and jitter all scale by (size-1)/(base-1), keeping the angular
    geometry and voxel pitch size-invariant while element and voxel
    counts grow. Returns (aperture, region, scene).
    """
    base = max(cfg.nx, cfg.ny, 2)
    sigma = (size - 1) / (base - 1)
    jitter = JitterSpec(depth_amplitude=cfg.jitter.depth_amplitude * sigma,
                        lateral_sigma=cfg.jitter.lateral_sigma * sigma)
    aperture = generate_handheld_aperture(size, size, cfg.extent * sigma,
                                          jitter, cfg.seed)
    region = ImagingRegion(
        cfg.region.x_min * sigma, cfg.region.x_max * sigma,
        cfg.region.y_min * sigma, cfg.region.y_max * sigma,
        cfg.region.z_min * sigma, cfg.region.z_max * sigma)
    scene = Scene(positions=cfg.scene.positions * sigma,
                  reflectivity=cfg.scene.reflectivity)
    return aperture, region, scene


def _bench_one(cfg: RunConfig, size: int):
    aperture, region, scene = bench_setup(cfg, size)
    cube = simulate_measurement(scene, aperture, cfg.freqs)
    dims = (2 * size - 1, 2 * size - 1, size)
    start = time.perf_counter()
    bpa_reconstruct(cube, region, dims)
    t_bpa = time.perf_counter() - start
    params = FfbpParams(levels=cfg.algorithm.get("levels")
                        or bench_levels(size),
                        gamma=cfg.algorithm.get("oversample", 1.4),
                        kernel=cfg.algorithm.get("kernel", "linear"))
    start = time.perf_counter()
    volume = hhffbpa_reconstruct(cube, region, dims, params)
    t_ffbp = time.perf_counter() - start
    report = predict_op_count(
        aperture, region, cfg.freqs, params, dims,
        measured_level_points=volume.provenance["level_points"],
        wall_times={"bpa": t_bpa, "hhffbpa": t_ffbp})
    return [(size, "bpa", t_bpa, report.n_ops_total_direct),
            (size, "hhffbpa", t_ffbp, report.n_ops_total)]


def _warm_kernels(cfg: RunConfig) -> None:
    # tiny end-to-end run so JIT compilation happens outside the timings
    aperture = cfg.build_aperture(4, 4)
    cube = simulate_measurement(cfg.scene, aperture, cfg.freqs)
    hhffbpa_reconstruct(cube, cfg.region, (3, 3, 3),
                        FfbpParams(levels=2, gamma=1.4))


def cmd_bench(args) -> int:
    cfg = load_run_config(args.config)
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s]
    except ValueError:
        raise ConfigError("--sizes must be a comma-separated integer list")
    if not sizes or any(s < 2 for s in sizes):
        raise ConfigError("--sizes needs integers of at least 2")
    _warm_kernels(cfg)
    rows = []
    for size in sizes:
        try:
            batch = _bench_one(cfg, size)
        except HhsarError as e:
            _log(f"size {size} failed: {e}")
            batch = [(size, "bpa", float("nan"), float("nan")),
                     (size, "hhffbpa", float("nan"), float("nan"))]
        for row in batch:
            _log(f"size {row[0]:4d} {row[1]:8s} {row[2]:10.3f} s "
                 f"({row[3]:.3e} ops)")
        rows.extend(batch)
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    try:
        writer = csv.writer(out)
        writer.writerow(["size", "algo", "seconds", "predicted_ops"])
        writer.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    for algo in ("bpa", "hhffbpa"):
        slope = _fit_slope([r for r in rows if r[1] == algo])
        if slope is not None:
            _log(f"{algo} log-log time slope: {slope:.2f}")
    return 0


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hhsar",
        description="Near-range 3-D SAR imaging: simulation, direct and "
                    "factorized backprojection, metrics, and benchmarks.")
    parser.add_argument("--threads", type=int, default=None,
                        help="cap worker threads (default: HHSAR_THREADS "
                             "environment variable, else all cores)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthesize a measurement cube")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="image a cube")
    p.add_argument("--algo", choices=("bpa", "hhffbpa"), required=True)
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--levels", type=int, default=None,
                   help="factorization depth M (default: auto)")
    p.add_argument("--oversample", type=float, default=1.4)
    p.add_argument("--kernel", choices=("linear", "cubic"), default="linear")
    p.add_argument("--dims", default=None, help="nx,ny,nz (default: band "
                                                "resolution limits)")
    p.add_argument("--upsample", type=int, default=8,
                   help="range-profile upsampling factor")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("metrics", help="compare two volumes")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--psf-cut", default=None, metavar="AXIS,X,Y,Z",
                   help="also report PSF figures for the 1-D cut along AXIS "
                        "through the point (X,Y,Z)")
    p.add_argument("--out", default=None,
                   help="report path (default: standard output)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("project", help="export a maximum-intensity "
                                       "projection image")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--axis", choices=("x", "y", "z"), default="z")
    p.add_argument("--out", required=True)
    p.add_argument("--floor", type=float, default=-40.0,
                   help="dB floor of the dB-scaled image")
    p.add_argument("--depth", type=int, choices=(8, 16), default=8)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("bench", help="timing sweep over aperture sizes")
    p.add_argument("--config", required=True)
    p.add_argument("--sizes", required=True, help="comma-separated side "
                                                  "lengths, e.g. 17,25,33")
    p.add_argument("--out", default="-", help="CSV path ('-' for standard "
                                              "output)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    threads = args.threads
    if threads is None:
        env = os.environ.get("HHSAR_THREADS")
        if env:
            try:
                threads = int(env)
            except ValueError:
                print(f"error: HHSAR_THREADS must be an integer, got {env!r}",
                      file=sys.stderr)
                return 2
    if threads is not None and threads < 1:
        print("error: thread count must be positive", file=sys.stderr)
        return 2
    set_threads(threads)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except IoFormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except NumericDomainError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except Exception as e:  # pragma: no cover
        print(f"unexpected error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
