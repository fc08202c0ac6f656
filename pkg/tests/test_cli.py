import json

import numpy as np
import pytest

from calitho import transform
from calitho.cli import EX_MISMATCH, EX_OK, EX_RUNTIME, EX_USAGE, SCHEMA, main
from calitho.core import AngleGrid, save_image
from calitho.io import read_cals, write_cals
from calitho.phantoms import disk, rectangle
from calitho.transform import radon


@pytest.fixture(autouse=True)
def _restore_threads():
    old = transform.get_threads()
    yield
    transform.set_threads(old)


@pytest.fixture
def disk_png(tmp_path):
    p = tmp_path / "disk.png"
    save_image(p, disk(32, 10))
    return p


def test_reconstruct_target(tmp_path, disk_png, capsys):
    out = tmp_path / "rec"
    code = main(["reconstruct", "--target", str(disk_png), "--angles", "50",
                 "--filter", "ramp-exp", "--out", str(out)])
    assert code == EX_OK
    for name in ("config.json", "sinogram.cals", "filtered.cals", "reconstruction.png",
                 "reconstruction.csv", "metrics.csv"):
        assert (out / name).exists()
    printed = capsys.readouterr().out.split()[-1]
    metrics = dict(line.split(",") for line in (out / "metrics.csv").read_text().splitlines()[1:])
    assert metrics["rmse"] == printed


def test_reconstruct_sinogram_clamp(tmp_path):
    s = tmp_path / "s.cals"
    write_cals(s, radon(disk(32, 10), AngleGrid(40)))
    out = tmp_path / "rec"
    assert main(["reconstruct", "--sinogram", str(s), "--heuristic", "clamp", "--out", str(out)]) == EX_OK
    assert read_cals(out / "filtered.cals").data.min() >= 0


def test_reconstruct_dimension_mismatch(tmp_path, disk_png):
    s = tmp_path / "s.cals"
    write_cals(s, radon(disk(16, 5), AngleGrid(10)))
    code = main(["reconstruct", "--target", str(disk_png), "--sinogram", str(s), "--out", str(tmp_path / "o")])
    assert code == EX_MISMATCH


def test_malformed_sinogram_is_runtime_error(tmp_path):
    s = tmp_path / "bad.cals"
    s.write_bytes(b"nonsense")
    assert main(["reconstruct", "--sinogram", str(s), "--out", str(tmp_path / "o")]) == EX_RUNTIME


def test_missing_file_is_runtime_error(tmp_path):
    assert main(["reconstruct", "--target", str(tmp_path / "nope.png"), "--out", str(tmp_path / "o")]) == EX_RUNTIME


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["reconstruct", "--filter", "gauss"],
    ["reconstruct"],
    ["optimize", "--target", "x.png"],
    ["lightfield", "--r", "0.1", "--N", "500"],
    ["--threads", "0", "lightfield", "--r", "0.1", "--R", "0.3", "--N", "5"],
])
def test_usage_errors_exit_64(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(SystemExit) as info:
        raise SystemExit(main(argv))
    assert info.value.code == EX_USAGE


def _opt(target, out, *extra, threads="1"):
    return main(["--seed", "3", "--threads", threads, "optimize", "--target", str(target),
                 "--angles", "40", "--iters", "6", "--out", str(out), *extra])


def test_optimize_artifacts_and_determinism(tmp_path):
    t = tmp_path / "rect.png"
    save_image(t, rectangle(32, 8, 5))
    a, b = tmp_path / "a", tmp_path / "b"
    assert _opt(t, a, "--init", "random") == EX_OK
    assert _opt(t, b, "--init", "random", threads="2") == EX_OK
    names = sorted(p.name for p in a.iterdir())
    assert names == ["config.json", "developed.png", "dose.png", "error_history.csv", "projections.cals"]
    for name in names:
        if name != "config.json":
            assert (a / name).read_bytes() == (b / name).read_bytes()
    cfg = json.loads((a / "config.json").read_text())
    assert cfg["schema"] == SCHEMA and cfg["seed"] == 3 and cfg["init"] == "random"
    assert (a / "error_history.csv").read_text().startswith("iter,error\n")


def test_optimize_from_run_config(tmp_path):
    t = tmp_path / "rect.png"
    save_image(t, rectangle(32, 8, 5))
    out = tmp_path / "o"
    conf = tmp_path / "run.json"
    conf.write_text(json.dumps({"schema": SCHEMA, "target": str(t), "out": str(out),
                                "angles": 30, "iters": 3, "model": "double:0.45,0.55"}))
    assert main(["optimize", "--config", str(conf), "--iters", "2"]) == EX_OK
    resolved = json.loads((out / "config.json").read_text())
    assert resolved["iters"] == 2 and resolved["model"] == "double:0.45,0.55"
    # the resolved config replays as a run config
    again = tmp_path / "again.json"
    resolved["out"] = str(tmp_path / "o2")
    again.write_text(json.dumps(resolved))
    assert main(["optimize", "--config", str(again)]) == EX_OK
    assert (out / "projections.cals").read_bytes() == (tmp_path / "o2" / "projections.cals").read_bytes()


@pytest.mark.parametrize("doc", [
    {"schema": "calitho.run/0", "angles": 10},
    {"schema": SCHEMA, "angles": 10, "learning_rate": 1},
    ["not", "an", "object"],
])
def test_run_config_rejected(tmp_path, doc):
    conf = tmp_path / "run.json"
    conf.write_text(json.dumps(doc))
    t = tmp_path / "t.png"
    save_image(t, disk(16, 4))
    assert main(["optimize", "--config", str(conf), "--target", str(t)]) == EX_USAGE


def test_cal_threads_env(monkeypatch, tmp_path):
    monkeypatch.setenv("CAL_THREADS", "3")
    assert main(["lightfield", "--r", "0.1", "--R", "0.3", "--N", "50"]) == EX_OK
    assert transform.get_threads() == 3
    monkeypatch.setenv("CAL_THREADS", "many")
    assert main(["lightfield", "--r", "0.1", "--R", "0.3", "--N", "50"]) == EX_USAGE


def test_frames_command(tmp_path, capsys):
    vol = tmp_path / "slices"
    vol.mkdir()
    for z in range(2):
        save_image(vol / f"s{z}.png", disk(16, 5))
    out = tmp_path / "frames"
    assert main(["frames", "--volume", str(vol), "--speed", "25", "--iters", "2", "--out", str(out)]) == EX_OK
    m = json.loads((out / "manifest.json").read_text())
    assert m["frame_rate_hz"] == pytest.approx(34.72, abs=0.005)
    assert len(list(out.glob("frame_*.pgm"))) == 500
    assert (out / "config.json").exists()
    assert "14.4 s per revolution" in capsys.readouterr().out


def test_resin_cal_command(tmp_path):
    out = tmp_path / "rc"
    assert main(["resin-cal", "--intensities", "0.5,1,2", "--times", "1,2,4", "--out", str(out)]) == EX_OK
    rows = (out / "doc.csv").read_text().splitlines()
    assert rows[0] == "intensity_w_cm2,time_s,doc,cured" and len(rows) == 10
    assert (out / "cured.pgm").exists() and (out / "config.json").exists()
    assert main(["resin-cal", "--intensities", "-1", "--times", "1", "--out", str(out)]) == EX_USAGE


def test_lightfield_command(tmp_path, capsys):
    out = tmp_path / "lf"
    assert main(["lightfield", "--r", "0.1", "--R", "0.3", "--N", "500", "--sweep", "100,500",
                 "--out", str(out)]) == EX_OK
    report = json.loads(capsys.readouterr().out)
    assert report["n_angular"] == 785 and report["subpixels_per_lens"] == 160
    assert report["subpixel_size"] == pytest.approx(1.25e-6, rel=0.01)
    assert len((out / "sweep.csv").read_text().splitlines()) == 3
    assert main(["lightfield", "--r", "0.05", "--N", "1000", "--lambda", "10e-6", "--solve", "R"]) == EX_OK
    assert json.loads(capsys.readouterr().out)["R"] == pytest.approx(10.0, rel=0.02)
    assert main(["lightfield", "--r", "0.4", "--R", "0.3", "--N", "10"]) == EX_RUNTIME


def test_repro_quick(tmp_path, capsys):
    assert main(["repro", "fig7", "--quick", "--out", str(tmp_path)]) == EX_OK
    d = tmp_path / "fig7"
    assert (d / "summary.json").exists() and (d / "config.json").exists()
    assert "sigmoid_soft" in capsys.readouterr().out
