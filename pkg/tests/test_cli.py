import csv
import json

import numpy as np
import pytest

from hiatusseg.cli import EXIT_INPUT, EXIT_OK, main
from hiatusseg.imageio import read_mask, read_pgm, write_mask
from hiatusseg.metrics import score


def write_spec(path, **values):
    path.write_text("".join(f"{k} = {v}\n" for k, v in values.items()))
    return path


@pytest.fixture(scope="module")
def phantom_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("phantom")
    spec = write_spec(root / "spec.cfg", rng_seed=7)
    assert main(["phantom", "--spec", str(spec), "--out", str(root / "out")]) == EXIT_OK
    return root / "out"


def test_phantom_files_and_rerun(phantom_dir, tmp_path):
    assert (phantom_dir / "image.pgm").is_file() and (phantom_dir / "mask.pgm").is_file()
    echo = (phantom_dir / "spec.cfg").read_text()
    assert "PCG64" in echo and "rng_seed = 7" in echo
    # the written spec echo reproduces the phantom bit for bit
    assert main(["phantom", "--spec", str(phantom_dir / "spec.cfg"), "--out", str(tmp_path)]) == EXIT_OK
    for name in ("image.pgm", "mask.pgm"):
        assert (tmp_path / name).read_bytes() == (phantom_dir / name).read_bytes()


def test_phantom_batch(tmp_path):
    spec = write_spec(tmp_path / "s.cfg", width=64, height=64, center_x=32, center_y=32,
                      semi_a=20, semi_b=15)
    assert main(["phantom", "--spec", str(spec), "--out", str(tmp_path / "b"), "--count", "10"]) == 0
    dirs = sorted((tmp_path / "b").iterdir())
    assert len(dirs) == 10
    images = [read_pgm(d / "image.pgm").tobytes() for d in dirs]
    masks = [read_pgm(d / "mask.pgm").tobytes() for d in dirs]
    assert len(set(images)) == 10 and len(set(masks)) == 1


def test_phantom_bad_spec(tmp_path):
    spec = write_spec(tmp_path / "s.cfg", width=16, height=16, semi_a=40, semi_b=40)
    assert main(["phantom", "--spec", str(spec), "--out", str(tmp_path / "o")]) == EXIT_INPUT
    assert not (tmp_path / "o").exists()
    bad = write_spec(tmp_path / "t.cfg", wobble=3)
    assert main(["phantom", "--spec", str(bad), "--out", str(tmp_path / "o")]) == EXIT_INPUT


def test_segment_phantom(phantom_dir, tmp_path):
    out = tmp_path / "seg"
    argv = ["segment", "--input", str(phantom_dir / "image.pgm"), "--seed", "120,135,35,30",
            "--out", str(out)]
    assert main(argv) == EXIT_OK
    truth = read_mask(phantom_dir / "mask.pgm")
    assert score(read_mask(out / "mask.pgm"), truth).js >= 0.95
    assert (out / "overlay.png").is_file()
    assert sorted(p.name for p in out.glob("scale_*_mask.pgm")) == [
        f"scale_{k}_mask.pgm" for k in range(5)]
    log = json.loads((out / "run_log.json").read_text())
    assert log["status"] == "ok" and len(log["scales"]) == 5
    assert all(s["energy_trace"] for s in log["scales"])
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["params"]["omega2"] == 0.1 and manifest["n_scales"] == 5

    # refuses to overwrite, then --force does
    assert main(argv) == EXIT_INPUT
    assert main(argv + ["--force", "--max-iters-per-scale", "5"]) == EXIT_OK
    assert json.loads((out / "manifest.json").read_text())["params"]["max_iters_per_scale"] == 5


def test_flags_override_config(phantom_dir, tmp_path):
    cfg = write_spec(tmp_path / "p.cfg", omega2=0.3, max_iters_per_scale=3)
    out = tmp_path / "seg"
    assert main(["segment", "--input", str(phantom_dir / "image.pgm"), "--seed", "128,128,40,40",
                 "--config", str(cfg), "--omega2", "0", "--n-scales", "2", "--out", str(out)]) == 0
    params = json.loads((out / "manifest.json").read_text())["params"]
    assert params["omega2"] == 0.0 and params["max_iters_per_scale"] == 3


def test_segment_cv(phantom_dir, tmp_path):
    out = tmp_path / "cv"
    assert main(["segment", "--input", str(phantom_dir / "image.pgm"), "--model", "cv",
                 "--seed", "128,128,40,40", "--max-iters", "20", "--out", str(out)]) == EXIT_OK
    assert (out / "mask.pgm").is_file() and (out / "overlay.png").is_file()
    assert json.loads((out / "manifest.json").read_text())["params"]["nu"] == 650.25


def test_segment_input_errors(phantom_dir, tmp_path):
    out = tmp_path / "none"
    assert main(["segment", "--input", str(tmp_path / "missing.pgm"), "--seed", "1,1,1,1",
                 "--out", str(out)]) == EXIT_INPUT
    assert not out.exists()
    image = str(phantom_dir / "image.pgm")
    for extra in (["--seed", "1,2"], ["--seed", "1,1,1,1", "--model", "cv", "--n-scales", "2"],
                  ["--seed", "1,1,1,1", "--omega1", "oops"], ["--seed", "900,1,5,5"]):
        assert main(["segment", "--input", image, "--out", str(out)] + extra) == EXIT_INPUT
    assert not out.exists()
    assert main(["segment", "--bogus"]) == EXIT_INPUT


def make_masks(directory, masks):
    directory.mkdir()
    for name, m in masks.items():
        write_mask(directory / name, m)


def test_eval_identical(tmp_path, rng):
    masks = {f"case{i}.pgm": rng.random((20, 20)) < 0.5 for i in range(3)}
    make_masks(tmp_path / "a", masks)
    make_masks(tmp_path / "m", masks)
    assert main(["eval", "--auto", str(tmp_path / "a"), "--manual", str(tmp_path / "m"),
                 "--out", str(tmp_path / "s.csv")]) == EXIT_OK
    rows = list(csv.reader((tmp_path / "s.csv").open()))
    assert all([float(v) for v in r[1:]] == [1.0, 0.0, 1.0] for r in rows[1:-1])


def test_eval_hand_arithmetic(tmp_path, capsys):
    manual = np.zeros((4, 4), bool)
    manual[:2, :2] = True                       # 4 pixels
    a1 = manual.copy()                          # perfect: (1, 0, 1)
    a2 = np.zeros((4, 4), bool)
    a2[:2, :1] = True                           # half: (0.5, 0, 0.5)
    a3 = manual.copy()
    a3[3, 3] = a3[3, 2] = True                  # two extra: (1, 0.5, 4/6)
    make_masks(tmp_path / "a", {"x1.pgm": a1, "x2.pgm": a2, "x3.pgm": a3})
    make_masks(tmp_path / "m", {n: manual for n in ("x1.pgm", "x2.pgm", "x3.pgm")})
    assert main(["eval", "--auto", str(tmp_path / "a"), "--manual", str(tmp_path / "m"),
                 "--out", str(tmp_path / "s.csv")]) == EXIT_OK
    last = list(csv.reader((tmp_path / "s.csv").open()))[-1]
    means = [float(v.split("±")[0]) for v in last[1:]]
    assert means == pytest.approx([2.5 / 3, 0.5 / 3, (1.5 + 4 / 6) / 3], abs=1e-6)
    assert "TP 83.33% ± 23.57%" in capsys.readouterr().out


def test_eval_errors(tmp_path):
    (tmp_path / "empty").mkdir()
    make_masks(tmp_path / "m", {"a.pgm": np.eye(4, dtype=bool)})
    make_masks(tmp_path / "a", {"b.pgm": np.eye(4, dtype=bool)})
    csv_out = str(tmp_path / "s.csv")
    assert main(["eval", "--auto", str(tmp_path / "empty"), "--manual", str(tmp_path / "m"),
                 "--out", csv_out]) == EXIT_INPUT
    assert main(["eval", "--auto", str(tmp_path / "a"), "--manual", str(tmp_path / "m"),
                 "--out", csv_out]) == EXIT_INPUT
    assert not (tmp_path / "s.csv").exists()
