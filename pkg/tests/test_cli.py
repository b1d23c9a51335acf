"""End-to-end command-line workflows and exit-code contract."""

import csv
import json

import numpy as np
import pytest

from hhsar import read_projection, read_volume, write_cube
from hhsar.cli import main
from hhsar.io import read_json

from conftest import rel_rms

SCALE = 0.25


def _config_doc(**overrides):
    doc = {
        "aperture": {"nx": 9, "ny": 9, "extent": 0.15 * SCALE,
                     "jitter": {"depth_amplitude": 0.08 / 3 * SCALE,
                                "lateral_sigma": 0.0005 * SCALE}},
        "frequencies": {"start_hz": 12e9, "stop_hz": 15e9, "count": 16},
        "region": {"center": [0.0, 0.0, 0.13333333333333333 * SCALE],
                   "extents": [0.16666666666666666 * SCALE] * 3},
        "scene": {"kind": "points",
                  "positions": [[0.006, -0.004, 0.031]],
                  "reflectivity": [1.0]},
        "seed": 7,
        "algorithm": {"name": "hhffbpa", "levels": 2, "oversample": 1.4},
    }
    doc.update(overrides)
    return doc


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(_config_doc()))
    return path


def test_full_workflow(tmp_path, config_path, capsys):
    cube = tmp_path / "cube.bin"
    ref = tmp_path / "ref.bin"
    fast = tmp_path / "fast.bin"
    report = tmp_path / "report.json"
    image = tmp_path / "mip.pgm"

    assert main(["simulate", "--config", str(config_path),
                 "--out", str(cube)]) == 0
    assert cube.exists() and (tmp_path / "cube.bin.json").exists()

    assert main(["reconstruct", "--algo", "bpa", "--in", str(cube),
                 "--out", str(ref), "--dims", "33,33,9"]) == 0
    assert main(["reconstruct", "--algo", "hhffbpa", "--in", str(cube),
                 "--out", str(fast), "--dims", "33,33,9",
                 "--levels", "2"]) == 0

    assert main(["metrics", "--ref", str(ref), "--test", str(fast),
                 "--psf-cut", "x,0.006,-0.004,0.031",
                 "--out", str(report)]) == 0
    doc = read_json(report)
    assert doc["psnr_db"] > 15.0
    for side in ("ref", "test"):
        figures = doc["psf"][side]
        assert set(figures) == {"mainlobe_width_mm", "pslr_db", "islr_db",
                                "peak_position_m"}
        assert figures["mainlobe_width_mm"] > 0

    # without --out the report goes to standard output
    capsys.readouterr()
    assert main(["metrics", "--ref", str(ref), "--test", str(fast)]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["psnr_db"] == doc["psnr_db"]

    assert main(["project", "--in", str(ref), "--out", str(image),
                 "--depth", "16"]) == 0
    img = read_projection(image)
    assert img.shape == (33, 33)
    assert img.max() == 1.0 and img.min() >= 0.0


def test_simulation_is_reproducible(tmp_path, config_path):
    a, b = tmp_path / "a.bin", tmp_path / "b.bin"
    assert main(["simulate", "--config", str(config_path),
                 "--out", str(a)]) == 0
    assert main(["simulate", "--config", str(config_path),
                 "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.bin.json").read_text() == \
        (tmp_path / "b.bin.json").read_text()


def test_single_level_reconstruction_matches_direct(tmp_path, config_path):
    cube = tmp_path / "cube.bin"
    ref = tmp_path / "ref.bin"
    one = tmp_path / "one.bin"
    assert main(["simulate", "--config", str(config_path),
                 "--out", str(cube)]) == 0
    assert main(["reconstruct", "--algo", "bpa", "--in", str(cube),
                 "--out", str(ref), "--dims", "17,17,9"]) == 0
    assert main(["reconstruct", "--algo", "hhffbpa", "--levels", "1",
                 "--in", str(cube), "--out", str(one),
                 "--dims", "17,17,9"]) == 0
    a, b = read_volume(ref), read_volume(one)
    # both sides pass through the same single-precision file format
    assert rel_rms(b.values, a.values) <= 1e-7


def test_bench_writes_the_timing_table(tmp_path, config_path):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--config", str(config_path), "--sizes", "9",
                 "--out", str(out)]) == 0
    with out.open(newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["size", "algo", "seconds", "predicted_ops"]
    assert [r[:2] for r in rows[1:]] == [["9", "bpa"], ["9", "hhffbpa"]]
    for row in rows[1:]:
        assert float(row[2]) > 0.0
        assert float(row[3]) > 0.0


def test_config_validation_exit_codes(tmp_path, capsys):
    run = lambda path: main(["simulate", "--config", str(path),
                             "--out", str(tmp_path / "cube.bin")])

    missing = tmp_path / "absent.json"
    assert run(missing) == 3

    bad_seed = tmp_path / "bad_seed.json"
    bad_seed.write_text(json.dumps(_config_doc(seed=-1)))
    assert run(bad_seed) == 2
    assert "seed" in capsys.readouterr().err

    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({**_config_doc(), "sceen": {}}))
    assert run(unknown) == 2
    assert "sceen" in capsys.readouterr().err

    overdetermined = tmp_path / "over.json"
    doc = _config_doc()
    doc["frequencies"] = {"start_hz": 12e9, "stop_hz": 15e9,
                          "step_hz": 2e8, "count": 16}
    overdetermined.write_text(json.dumps(doc))
    assert run(overdetermined) == 2

    corrupt = tmp_path / "corrupt.json"
    corrupt.write_text("{ nope")
    assert run(corrupt) == 3


def test_reconstruct_exit_codes(tmp_path, config_path, capsys, small):
    assert main(["reconstruct", "--algo", "bpa",
                 "--in", str(tmp_path / "absent.bin"),
                 "--out", str(tmp_path / "v.bin")]) == 3

    cube = tmp_path / "cube.bin"
    assert main(["simulate", "--config", str(config_path),
                 "--out", str(cube)]) == 0
    assert main(["reconstruct", "--algo", "bpa", "--in", str(cube),
                 "--out", str(tmp_path / "v.bin"), "--dims", "3,3"]) == 2

    bare = tmp_path / "bare.bin"
    write_cube(bare, small.cube)          # no region in the sidecar
    assert main(["reconstruct", "--algo", "bpa", "--in", str(bare),
                 "--out", str(tmp_path / "v.bin")]) == 2
    assert "region" in capsys.readouterr().err


def test_aliased_region_exits_with_the_numeric_code(tmp_path, capsys):
    # 3 frequency steps give a 0.5 m alias period; a region 0.3-0.9 m
    # deep cannot be imaged unambiguously
    doc = _config_doc()
    doc["frequencies"] = {"start_hz": 12e9, "stop_hz": 15e9, "count": 3}
    doc["region"] = {"x": [-0.05, 0.05], "y": [-0.05, 0.05], "z": [0.3, 0.9]}
    doc["scene"] = {"kind": "points", "positions": [[0.0, 0.0, 0.5]],
                    "reflectivity": [1.0]}
    path = tmp_path / "aliased.json"
    path.write_text(json.dumps(doc))
    cube = tmp_path / "cube.bin"
    assert main(["simulate", "--config", str(path), "--out", str(cube)]) == 0
    assert main(["reconstruct", "--algo", "bpa", "--in", str(cube),
                 "--out", str(tmp_path / "v.bin")]) == 4
    assert "error" in capsys.readouterr().err


def test_thread_cap_validation(tmp_path, config_path, monkeypatch, capsys):
    cube = tmp_path / "cube.bin"
    monkeypatch.setenv("HHSAR_THREADS", "many")
    assert main(["simulate", "--config", str(config_path),
                 "--out", str(cube)]) == 2
    assert "HHSAR_THREADS" in capsys.readouterr().err

    monkeypatch.delenv("HHSAR_THREADS")
    assert main(["--threads", "0", "simulate", "--config", str(config_path),
                 "--out", str(cube)]) == 2

    monkeypatch.setenv("HHSAR_THREADS", "2")
    assert main(["simulate", "--config", str(config_path),
                 "--out", str(cube)]) == 0


def test_bad_psf_cut_and_sizes_are_config_errors(tmp_path, config_path,
                                                 capsys):
    cube = tmp_path / "cube.bin"
    vol = tmp_path / "vol.bin"
    assert main(["simulate", "--config", str(config_path),
                 "--out", str(cube)]) == 0
    assert main(["reconstruct", "--algo", "bpa", "--in", str(cube),
                 "--out", str(vol), "--dims", "9,9,5"]) == 0
    assert main(["metrics", "--ref", str(vol), "--test", str(vol),
                 "--psf-cut", "q,0,0,0"]) == 2
    assert main(["bench", "--config", str(config_path), "--sizes", "9,oops",
                 "--out", "-"]) == 2
    capsys.readouterr()
