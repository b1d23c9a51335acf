"""Bit-exact persistence: data cubes, image volumes, projections, reports.

Cubes and volumes are stored as a raw little-endian binary payload of
interleaved 32-bit float real/imaginary pairs next to a UTF-8 JSON
sidecar (same filename plus ".json") carrying dims, axes, geometry,
and provenance. The innermost payload index is frequency for cubes
and x for volumes. Values are float32 on disk and promoted to double
in memory, so a write/read/write cycle is byte-stable.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .bpa import ImageVolume
from .errors import ConfigError, IoFormatError
from .model import FrequencyGrid, ImagingRegion, SyntheticAperture
from .simulator import DataCube

CUBE_SCHEMA = "hhsar-cube-v1"
VOLUME_SCHEMA = "hhsar-volume-v1"


def _sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def _read_sidecar(path, schema: str) -> dict:
    sidecar = _sidecar_path(path)
    if not sidecar.exists():
        raise IoFormatError(f"missing sidecar {sidecar}")
    try:
        doc = json.loads(sidecar.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise IoFormatError(f"cannot parse sidecar {sidecar}: {e}") from e
    found = doc.get("schema")
    if found != schema:
        raise IoFormatError(f"schema mismatch: expected {schema!r}, "
                            f"found {found!r}")
    return doc


def _read_payload(path, n_values: int) -> np.ndarray:
    expected = 8 * n_values
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise IoFormatError(f"cannot read payload {path}: {e}") from e
    if len(raw) < expected:
        raise IoFormatError(f"truncated payload {path}: expected {expected} "
                            f"bytes, found {len(raw)}")
    if len(raw) > expected:
        raise IoFormatError(f"dimension mismatch for {path}: sidecar dims "
                            f"imply {expected} bytes, found {len(raw)}")
    return np.frombuffer(raw, dtype="<c8").astype(np.complex128)


def _dims_from(doc: dict, rank: int) -> tuple:
    dims = doc.get("dims")
    if (not isinstance(dims, list) or len(dims) != rank
            or not all(isinstance(d, int) and d > 0 for d in dims)):
        raise IoFormatError(f"dimension mismatch: sidecar dims {dims!r} are "
                            f"not {rank} positive integers")
    return tuple(dims)


def region_to_doc(region: ImagingRegion) -> dict:
    return {"x": [region.x_min, region.x_max],
            "y": [region.y_min, region.y_max],
            "z": [region.z_min, region.z_max]}


def region_from_doc(doc: dict) -> ImagingRegion:
    try:
        return ImagingRegion(x_min=doc["x"][0], x_max=doc["x"][1],
                             y_min=doc["y"][0], y_max=doc["y"][1],
                             z_min=doc["z"][0], z_max=doc["z"][1])
    except (KeyError, IndexError, TypeError) as e:
        raise IoFormatError(f"malformed region document: {e}") from e


def write_cube(path, cube: DataCube, region: ImagingRegion | None = None,
               provenance: dict | None = None) -> None:
    """Write a measurement cube: payload at `path`, sidecar beside it.

    The imaging region, when given, rides along in the sidecar so a
    reconstruction step needs no separate geometry input.
    """
    doc = {
        "schema": CUBE_SCHEMA,
        "dims": [int(cube.values.shape[0]), int(cube.values.shape[1])],
        "frequencies": {"f_min_hz": cube.freqs.f_min,
                        "f_max_hz": cube.freqs.f_max,
                        "count": cube.freqs.count},
        "aperture": {"nx": cube.aperture.nx, "ny": cube.aperture.ny,
                     "elements": cube.aperture.elements.tolist()},
    }
    if region is not None:
        doc["region"] = region_to_doc(region)
    if provenance:
        doc["provenance"] = provenance
    payload = np.ascontiguousarray(cube.values, dtype="<c8")
    Path(path).write_bytes(payload.tobytes())
    _sidecar_path(path).write_text(json.dumps(doc, indent=1),
                                   encoding="utf-8")


def read_cube(path) -> tuple[DataCube, ImagingRegion | None]:
    """Read a cube written by `write_cube`; returns (cube, region)."""
    doc = _read_sidecar(path, CUBE_SCHEMA)
    n_el, n_f = _dims_from(doc, 2)
    try:
        f = doc["frequencies"]
        freqs = FrequencyGrid(f_min=float(f["f_min_hz"]),
                              f_max=float(f["f_max_hz"]),
                              count=int(f["count"]))
        a = doc["aperture"]
        aperture = SyntheticAperture(
            elements=np.asarray(a["elements"], dtype=float),
            nx=int(a["nx"]), ny=int(a["ny"]))
    except (KeyError, TypeError, ValueError) as e:
        raise IoFormatError(f"malformed cube sidecar: {e}") from e
    if freqs.count != n_f or aperture.n_elements != n_el:
        raise IoFormatError(
            f"dimension mismatch: dims {n_el}x{n_f} disagree with "
            f"{aperture.n_elements} elements x {freqs.count} frequencies")
    values = _read_payload(path, n_el * n_f).reshape(n_el, n_f)
    region = region_from_doc(doc["region"]) if "region" in doc else None
    return DataCube(values=values, aperture=aperture, freqs=freqs), region


def write_volume(path, volume: ImageVolume) -> None:
    """Write an image volume; the payload stores x as the fastest index."""
    doc = {
        "schema": VOLUME_SCHEMA,
        "dims": [int(d) for d in volume.dims],
        "origin": [float(v) for v in volume.origin],
        "step": [float(v) for v in volume.step],
        "provenance": volume.provenance,
    }
    payload = np.ascontiguousarray(volume.values.transpose(2, 1, 0),
                                   dtype="<c8")
    Path(path).write_bytes(payload.tobytes())
    _sidecar_path(path).write_text(json.dumps(doc, indent=1),
                                   encoding="utf-8")


def read_volume(path) -> ImageVolume:
    """Read a volume written by `write_volume`."""
    doc = _read_sidecar(path, VOLUME_SCHEMA)
    dims = _dims_from(doc, 3)
    try:
        origin = np.asarray(doc["origin"], dtype=float).reshape(3)
        step = np.asarray(doc["step"], dtype=float).reshape(3)
    except (KeyError, TypeError, ValueError) as e:
        raise IoFormatError(f"malformed volume sidecar: {e}") from e
    flat = _read_payload(path, int(np.prod(dims)))
    values = flat.reshape(dims[2], dims[1], dims[0]).transpose(2, 1, 0)
    return ImageVolume(values=values, origin=origin, step=step,
                       provenance=doc.get("provenance", {}))


def export_projection(image: np.ndarray, path, depth: int = 8) -> None:
    """Write a [0, 1] grayscale image as a binary PGM (P5).

    Parameters
    ----------
    image : 2-D real array with values in [0, 1]
    path : output file
    depth : {8, 16}
        Sample depth; 16-bit samples are big-endian per the format.

    Raises
    ------
    ConfigError
        Non-2-D input, values outside [0, 1], or an unsupported depth.
    """
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise ConfigError("projection image must be 2-D")
    if img.size == 0:
        raise ConfigError("projection image is empty")
    if np.any(~np.isfinite(img)) or img.min() < 0.0 or img.max() > 1.0:
        raise ConfigError("projection values must lie in [0, 1]")
    if depth == 8:
        maxval, dtype = 255, ">u1"
    elif depth == 16:
        maxval, dtype = 65535, ">u2"
    else:
        raise ConfigError("depth must be 8 or 16")
    quantized = np.floor(img * maxval + 0.5).astype(dtype)
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n{maxval}\n"
    Path(path).write_bytes(header.encode("ascii") + quantized.tobytes())


def read_projection(path) -> np.ndarray:
    """Read a binary PGM back to floats in [0, 1]."""
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if len(parts) != 4 or parts[0] != b"P5":
        raise IoFormatError(f"{path} is not a binary PGM")
    try:
        width, height = (int(v) for v in parts[1].split())
        maxval = int(parts[2])
    except ValueError as e:
        raise IoFormatError(f"malformed PGM header in {path}: {e}") from e
    dtype = ">u1" if maxval < 256 else ">u2"
    n_bytes = width * height * (1 if maxval < 256 else 2)
    if len(parts[3]) < n_bytes:
        raise IoFormatError(f"truncated PGM payload in {path}")
    pixels = np.frombuffer(parts[3][:n_bytes], dtype=dtype)
    return pixels.reshape(height, width).astype(float) / maxval


def read_json(path) -> dict:
    """Parse a UTF-8 JSON document into a dict."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise IoFormatError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise IoFormatError(f"cannot parse {path}: {e}") from e
    if not isinstance(doc, dict):
        raise IoFormatError(f"{path} must hold a JSON object")
    return doc


def write_report(path, report: dict) -> None:
    """Write a key-value report document as JSON."""
    Path(path).write_text(json.dumps(report, indent=1, sort_keys=True),
                          encoding="utf-8")
