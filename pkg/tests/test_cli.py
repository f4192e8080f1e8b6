import subprocess
import sys

import numpy as np
import pytest

from ctgrad.cli import main
from ctgrad.fileio import read_edge_map, read_image, read_sinogram


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert run("phantom", "--type", "disk", "--size", 48, "--out", d / "disk.img") == 0
    assert run("project", "--img", d / "disk.img", "--n-angles", 60, "--out", d / "disk.sino") == 0
    return d


def test_phantom_and_project(workdir):
    img = read_image(workdir / "disk.img")
    assert img.n == 48
    sino = read_sinogram(workdir / "disk.sino")
    assert sino.n_angles == 60
    assert sino.n_s == 69


def test_project_explicit_detector(workdir):
    out = workdir / "wide.sino"
    assert run("project", "--img", workdir / "disk.img", "--n-angles", 10, "--n-s", 81,
               "--s-spacing", 1.0, "--out", out) == 0
    assert read_sinogram(out).n_s == 81


def test_project_analytic(workdir):
    out = workdir / "an.sino"
    assert run("project", "--analytic", "ellipses", "--size", 48, "--n-angles", 12, "--out", out) == 0
    assert read_sinogram(out).data.max() > 0


def test_project_needs_one_source(workdir, capsys):
    assert run("project", "--n-angles", 4, "--out", workdir / "x.sino") == 1
    assert "exactly one" in capsys.readouterr().err
    assert not (workdir / "x.sino").exists()


def test_project_detector_too_small(workdir, capsys):
    out = workdir / "small.sino"
    assert run("project", "--img", workdir / "disk.img", "--n-angles", 4, "--n-s", 11, "--out", out) == 1
    assert not out.exists()


def test_subsample_and_noise(workdir):
    sub = workdir / "sub.sino"
    noisy = workdir / "noisy.sino"
    assert run("subsample", "--in", workdir / "disk.sino", "--keep-every", 5, "--out", sub) == 0
    assert read_sinogram(sub).n_angles == 12
    assert run("noise", "--in", sub, "--sigma-frac", 0.01, "--seed", 4, "--out", noisy) == 0
    assert not np.array_equal(read_sinogram(noisy).data, read_sinogram(sub).data)


def test_import_csv(tmp_path):
    csv = tmp_path / "s.csv"
    csv.write_text("0,1,2,1,0\n0,1,2,1,0\n")
    out = tmp_path / "s.sino"
    assert run("import-csv", "--csv", csv, "--s-spacing", 0.5, "--out", out) == 0
    assert read_sinogram(out).s_spacing == 0.5


def test_fbp(workdir):
    out = workdir / "rec.img"
    assert run("fbp", "--sino", workdir / "disk.sino", "--size", 48, "--cutoff", 1.0, "--out", out) == 0
    rec = read_image(out).data
    assert 0.9 < rec[24, 24] < 1.1
    # without --size the grid is inferred from the detector
    inferred = workdir / "rec_default.img"
    assert run("fbp", "--sino", workdir / "disk.sino", "--out", inferred) == 0
    assert read_image(inferred).n == 48


@pytest.mark.parametrize("method", ["fbp-preprocess", "fbp-combined", "l1"])
def test_grad_methods(workdir, method):
    gx, gy = workdir / f"{method}_gx.img", workdir / f"{method}_gy.img"
    extra = ["--max-iters", 20, "--lambda", 0.01, "--lambda-mode", "relative"] if method == "l1" else []
    assert run("grad", "--method", method, "--epsilon", 2, "--sino", workdir / "disk.sino",
               "--out-gx", gx, "--out-gy", gy, *extra) == 0
    a, b = read_image(gx), read_image(gy)
    assert a.n == b.n == 48
    assert np.abs(a.data).max() > 0


def test_grad_diag_csv(workdir):
    diag = workdir / "diag.csv"
    assert run("grad", "--method", "l1", "--epsilon", 6, "--lambda", 0.01, "--max-iters", 15,
               "--sino", workdir / "disk.sino", "--out-gx", workdir / "l1x.img",
               "--out-gy", workdir / "l1y.img", "--diag", diag) == 0
    lines = diag.read_text().splitlines()
    assert lines[0] == "iteration,objective_gx,objective_gy"
    assert len(lines) >= 2


def test_grad_diag_rejected_for_fbp(workdir):
    gx, gy = workdir / "bad_gx.img", workdir / "bad_gy.img"
    assert run("grad", "--method", "fbp-combined", "--sino", workdir / "disk.sino",
               "--out-gx", gx, "--out-gy", gy, "--diag", workdir / "d.csv") == 1
    assert not gx.exists() and not gy.exists()


def test_unknown_method_is_usage_error(workdir):
    with pytest.raises(SystemExit) as exc:
        run("grad", "--method", "magic", "--sino", workdir / "disk.sino",
            "--out-gx", workdir / "a", "--out-gy", workdir / "b")
    assert exc.value.code != 0


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        run("phantom", "--type", "disk", "--size", 8, "--out", "x", "--bogus")
    assert exc.value.code == 2


def test_canny_truth_score(workdir, capsys):
    gx, gy = workdir / "score_gx.img", workdir / "score_gy.img"
    assert run("grad", "--method", "fbp-combined", "--epsilon", 2, "--sino", workdir / "disk.sino",
               "--out-gx", gx, "--out-gy", gy) == 0
    edges = workdir / "edges.img"
    truth = workdir / "truth.img"
    assert run("canny", "--gx", gx, "--gy", gy, "--low", 0.1, "--high", 0.25, "--out", edges) == 0
    assert run("truth", "--type", "disk", "--size", 48, "--out", truth) == 0
    capsys.readouterr()
    assert run("score", "--pred", edges, "--truth", truth, "--radius", 2) == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("precision=") and " recall=" in line and " f1=" in line
    assert len(line.splitlines()) == 1
    f1 = float(line.split("f1=")[1])
    assert f1 > 0.8
    pgm = workdir / "edges.pgm"
    assert run("canny", "--gx", gx, "--gy", gy, "--out", pgm) == 0
    np.testing.assert_array_equal(read_edge_map(pgm).data, read_edge_map(edges).data)


def test_view(workdir):
    out = workdir / "disk.pgm"
    assert run("view", "--in", workdir / "disk.img", "--out", out) == 0
    assert out.read_bytes().startswith(b"P5")
    assert (workdir / "disk.pgm.minmax.txt").exists()


def test_missing_input_is_error(tmp_path, capsys):
    assert run("fbp", "--sino", tmp_path / "nope.sino", "--out", tmp_path / "o.img") == 1
    assert "error" in capsys.readouterr().err


def test_partial_outputs_removed(workdir, tmp_path):
    # the second output lands in a missing directory, so the first must be cleaned up
    gx = tmp_path / "gx.img"
    gy = tmp_path / "missing" / "gy.img"
    assert run("grad", "--method", "fbp-combined", "--sino", workdir / "disk.sino",
               "--out-gx", gx, "--out-gy", gy) == 1
    assert not gx.exists()


def test_malformed_input_reports_format_error(tmp_path, capsys):
    bad = tmp_path / "bad.sino"
    bad.write_bytes(b"SINO1" + b"\0" * 3)
    assert run("fbp", "--sino", bad, "--out", tmp_path / "o.img") == 1
    assert "truncated" in capsys.readouterr().err


def test_grad_is_deterministic(workdir, tmp_path):
    outs = []
    for k in range(2):
        gx, gy = tmp_path / f"gx{k}.img", tmp_path / f"gy{k}.img"
        run("grad", "--method", "l1", "--epsilon", 3, "--max-iters", 10, "--seed", 7,
            "--sino", workdir / "disk.sino", "--out-gx", gx, "--out-gy", gy)
        outs.append((gx.read_bytes(), gy.read_bytes()))
    assert outs[0] == outs[1]


def test_threads_env(workdir, tmp_path, monkeypatch):
    monkeypatch.setenv("CTGRAD_THREADS", "2")
    a = tmp_path / "a.img"
    assert run("grad", "--method", "fbp-combined", "--sino", workdir / "disk.sino",
               "--out-gx", a, "--out-gy", tmp_path / "b.img") == 0
    monkeypatch.setenv("CTGRAD_THREADS", "1")
    c = tmp_path / "c.img"
    assert run("grad", "--method", "fbp-combined", "--sino", workdir / "disk.sino",
               "--out-gx", c, "--out-gy", tmp_path / "d.img") == 0
    assert a.read_bytes() == c.read_bytes()
    assert run("--threads", -1, "grad", "--method", "fbp-combined", "--sino", workdir / "disk.sino",
               "--out-gx", tmp_path / "e.img", "--out-gy", tmp_path / "f.img") == 1


def test_experiment_small(tmp_path, capsys):
    out = tmp_path / "exp"
    assert run("experiment", "sparse-view", "--size", 48, "--dense-angles", 60, "--angles", 12,
               "--max-iters", 20, "--out-dir", out) == 0
    text = (out / "metrics.csv").read_text().splitlines()
    assert text[0].startswith("setting,")
    assert (out / "truth_edges.pgm").exists()
    assert any(p.name.endswith("_gradmag.pgm") for p in out.iterdir())
    assert "f1=" in capsys.readouterr().out


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "ctgrad.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("ctgrad ")
    proc = subprocess.run([sys.executable, "-m", "ctgrad.cli", "grad", "--method", "nope"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "usage" in proc.stderr

