"""Persistence: binary payloads, JSON sidecars, PGM export."""

import json

import numpy as np
import pytest

from hhsar import (ConfigError, HhsarError, ImageVolume, IoFormatError,
                   NumericDomainError, export_projection, read_cube,
                   read_projection, read_volume, write_cube, write_report,
                   write_volume)
from hhsar.io import read_json


def test_cube_round_trip_is_byte_stable(small, tmp_path):
    path = tmp_path / "cube.bin"
    prov = {"source": "synthetic", "seed": 7}
    write_cube(path, small.cube, region=small.region, provenance=prov)
    first = path.read_bytes()
    back, region = read_cube(path)

    # single-precision payload, promoted losslessly on read
    want = small.cube.values.astype(np.complex64).astype(np.complex128)
    assert np.array_equal(back.values, want)
    assert np.array_equal(back.aperture.elements, small.cube.aperture.elements)
    assert back.freqs == small.cube.freqs
    assert region is not None
    assert (region.x_min, region.x_max) == (small.region.x_min,
                                            small.region.x_max)
    assert json.loads((tmp_path / "cube.bin.json").read_text())[
        "provenance"] == prov

    write_cube(path, back, region=region, provenance=prov)
    assert path.read_bytes() == first


def test_cube_without_region_reads_back_none(small, tmp_path):
    path = tmp_path / "bare.bin"
    write_cube(path, small.cube)
    _, region = read_cube(path)
    assert region is None


def test_volume_round_trip_keeps_grid_and_provenance(tmp_path):
    rng = np.random.default_rng(21)
    vals = (rng.normal(size=(5, 4, 3)) + 1j * rng.normal(size=(5, 4, 3)))
    vals = vals.astype(np.complex64).astype(np.complex128)
    vol = ImageVolume(values=vals, origin=(-0.1, -0.2, 0.3),
                      step=(0.01, 0.02, 0.03),
                      provenance={"algorithm": "bpa", "upsample": 8})
    path = tmp_path / "vol.bin"
    write_volume(path, vol)
    back = read_volume(path)
    assert np.array_equal(back.values, vol.values)
    assert np.array_equal(back.origin, vol.origin)
    assert np.array_equal(back.step, vol.step)
    assert back.provenance == vol.provenance

    write_volume(path, back)
    back2 = read_volume(path)
    assert np.array_equal(back2.values, back.values)


def test_sidecar_schema_guards(small, tmp_path):
    path = tmp_path / "cube.bin"
    write_cube(path, small.cube)
    with pytest.raises(IoFormatError, match="schema"):
        read_volume(path)

    (tmp_path / "cube.bin.json").write_text("{ not json")
    with pytest.raises(IoFormatError, match="parse"):
        read_cube(path)

    (tmp_path / "cube.bin.json").unlink()
    with pytest.raises(IoFormatError, match="sidecar"):
        read_cube(path)


def test_payload_length_guards(small, tmp_path):
    path = tmp_path / "cube.bin"
    write_cube(path, small.cube)
    raw = path.read_bytes()

    path.write_bytes(raw[:-8])
    with pytest.raises(IoFormatError, match="truncated"):
        read_cube(path)

    path.write_bytes(raw + b"\x00" * 8)
    with pytest.raises(IoFormatError, match="mismatch"):
        read_cube(path)


def test_sidecar_dims_guard(tmp_path):
    vals = np.zeros((2, 2, 2), dtype=complex)
    vol = ImageVolume(values=vals, origin=(0, 0, 0.1), step=(0.01,) * 3)
    path = tmp_path / "vol.bin"
    write_volume(path, vol)
    doc = json.loads((tmp_path / "vol.bin.json").read_text())
    doc["dims"] = [2, 2]
    (tmp_path / "vol.bin.json").write_text(json.dumps(doc))
    with pytest.raises(IoFormatError, match="dim"):
        read_volume(path)


@pytest.mark.parametrize("depth", [8, 16])
def test_pgm_quantization_error_is_half_a_step(tmp_path, depth):
    rng = np.random.default_rng(depth)
    img = rng.uniform(0.0, 1.0, size=(37, 23))
    img[0, 0], img[-1, -1] = 0.0, 1.0
    path = tmp_path / f"mip{depth}.pgm"
    export_projection(img, path, depth=depth)
    back = read_projection(path)
    assert back.shape == img.shape
    step = 1.0 / (2 ** depth - 1)
    assert np.max(np.abs(back - img)) <= 0.5 * step + 1e-12
    assert back[0, 0] == 0.0 and back[-1, -1] == 1.0


def test_pgm_rejects_bad_images(tmp_path):
    path = tmp_path / "bad.pgm"
    with pytest.raises(ConfigError, match="2-D"):
        export_projection(np.zeros((2, 2, 2)), path)
    with pytest.raises(ConfigError, match=r"\[0, 1\]"):
        export_projection(np.full((2, 2), 1.5), path)
    with pytest.raises(ConfigError, match=r"\[0, 1\]"):
        export_projection(np.full((2, 2), np.nan), path)
    with pytest.raises(ConfigError, match="depth"):
        export_projection(np.zeros((2, 2)), path, depth=12)
    with pytest.raises(ConfigError, match="empty"):
        export_projection(np.zeros((0, 2)), path)


def test_pgm_reader_guards(tmp_path):
    path = tmp_path / "junk.pgm"
    path.write_bytes(b"P6\n2 2\n255\n" + b"\x00" * 12)
    with pytest.raises(IoFormatError, match="PGM"):
        read_projection(path)

    export_projection(np.zeros((4, 4)), path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-2])
    with pytest.raises(IoFormatError, match="truncated"):
        read_projection(path)


def test_report_round_trip(tmp_path):
    report = {"psnr_db": 41.25, "algorithm": "hhffbpa",
              "level_points": [[4, 4], [16]]}
    path = tmp_path / "report.json"
    write_report(path, report)
    assert read_json(path) == report

    path.write_text("[1, 2, 3]")
    with pytest.raises(IoFormatError, match="object"):
        read_json(path)
    with pytest.raises(IoFormatError, match="read"):
        read_json(tmp_path / "absent.json")


def test_error_taxonomy():
    kinds = (ConfigError, IoFormatError, NumericDomainError)
    for kind in kinds:
        assert issubclass(kind, HhsarError)
        assert issubclass(kind, Exception)
    assert len({*kinds}) == 3
    for a in kinds:
        for b in kinds:
            if a is not b:
                assert not issubclass(a, b)
