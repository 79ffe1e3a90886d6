"""End-to-end command-line runs on tiny problems."""

import json

import numpy as np
import pytest

from lpreg.cli import main
from lpreg.io import load_bundle


@pytest.fixture()
def tomo_bundle(tmp_path):
    out = tmp_path / "tomo_bundle"
    rc = main(["gen", "tomo", "--grid", "8", "--rays", "40", "--seed", "1",
               "--out", str(out), "--no-figures"])
    assert rc == 0
    return out


@pytest.fixture()
def matrix_bundle(tmp_path):
    out = tmp_path / "mat_bundle"
    rc = main(["gen", "matrix", "--rows", "40", "--cols", "30", "--seed", "2",
               "--out", str(out), "--no-figures"])
    assert rc == 0
    return out


def test_gen_tomo_bundle_contents(tomo_bundle):
    bundle = load_bundle(tomo_bundle)
    assert bundle.a.rows == 40 and bundle.a.cols == 64
    assert bundle.x_true.size == 64
    assert bundle.meta["kind"] == "tomography"
    assert bundle.meta["grid"] == 8
    assert bundle.meta["effective_config"]["rays"] == 40


def test_gen_matrix_bundle_contents(matrix_bundle):
    bundle = load_bundle(matrix_bundle)
    assert bundle.a.rows == 40 and bundle.a.cols == 30
    assert np.any(bundle.b_noisy != bundle.b_clean)
    # outlier_frac defaults to 0 for matrix bundles, so outliers == noisy
    assert bundle.meta["kind"] == "matrix"


def test_solve_each_solver(matrix_bundle, tmp_path):
    for solver in ("irls-cg", "conv-cg", "fista", "steepest"):
        out = tmp_path / f"solve_{solver}"
        rc = main(["solve", "--problem", str(matrix_bundle), "--solver", solver,
                   "--lam-rel", "0.1", "--iters", "10", "--out", str(out),
                   "--no-figures"])
        assert rc == 0
        x = np.loadtxt(out / "xbar.txt")
        assert x.size == 30 and np.all(np.isfinite(x))
        assert (out / "trace.jsonl").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["effective_config"]["solver"] == solver
        assert summary["iterations"] >= 1
        assert "percent_error" in summary


def test_solve_writes_figures(matrix_bundle, tmp_path):
    out = tmp_path / "solve_fig"
    rc = main(["solve", "--problem", str(matrix_bundle), "--solver", "fista",
               "--lam-rel", "0.1", "--iters", "10", "--out", str(out)])
    assert rc == 0
    assert (out / "trace.png").exists()
    assert (out / "model.png").exists()


def test_solve_rejects_negative_lambda(matrix_bundle, tmp_path):
    rc = main(["solve", "--problem", str(matrix_bundle), "--solver", "fista",
               "--lam", "-3", "--out", str(tmp_path / "bad"), "--no-figures"])
    assert rc == 2


def test_missing_bundle_is_io_error(tmp_path):
    rc = main(["solve", "--problem", str(tmp_path / "nope"), "--solver", "fista",
               "--lam", "0.1", "--out", str(tmp_path / "o"), "--no-figures"])
    assert rc == 3


def test_no_command_prints_help():
    assert main([]) == 2


def test_gen_without_generator():
    assert main(["gen"]) == 2


def test_lcurve_outputs(matrix_bundle, tmp_path):
    out = tmp_path / "lc"
    rc = main(["lcurve", "--problem", str(matrix_bundle), "--solver", "fista",
               "--count", "8", "--iters-per-lambda", "5", "--out", str(out),
               "--no-figures"])
    assert rc == 0
    assert (out / "lcurve.csv").exists()
    assert (out / "xcorner.txt").exists()
    result = json.loads((out / "corner.json").read_text())
    assert 0 <= result["corner"]["index"] < 8
    assert "best_error" in result
    assert "discrepancy" in result


def test_lcurve_figures_and_carry_flag(matrix_bundle, tmp_path):
    out = tmp_path / "lc_fig"
    rc = main(["lcurve", "--problem", str(matrix_bundle), "--solver", "conv-cg",
               "--count", "6", "--iters-per-lambda", "3", "--no-carry",
               "--out", str(out)])
    assert rc == 0
    assert (out / "lcurve.png").exists()
    assert (out / "xcorner.png").exists()
    result = json.loads((out / "corner.json").read_text())
    assert result["effective_config"]["carry"] is False


def test_lcurve_rejects_steepest(matrix_bundle, tmp_path):
    rc = main(["lcurve", "--problem", str(matrix_bundle), "--solver", "steepest",
               "--count", "4", "--out", str(tmp_path / "no"), "--no-figures"])
    assert rc == 2


def test_compare_outputs(tmp_path):
    out = tmp_path / "cmp"
    rc = main(["compare", "--rows", "40", "--cols", "40", "--trials", "2",
               "--steps", "3", "--iters-per-lambda", "2", "--out", str(out),
               "--no-figures"])
    assert rc == 0
    lines = (out / "compare.csv").read_text().strip().splitlines()
    assert len(lines) == 1 + 3 * 2 * 3  # header + solvers x trials x steps
    med = (out / "medians.csv").read_text().strip().splitlines()
    assert len(med) == 1 + 3 * 3
    summary = json.loads((out / "summary.json").read_text())
    assert "irls-cg_beats_fista_every_step" in summary
    assert "conv-cg_beats_fista_every_step" in summary


def test_tomo_outputs(tmp_path):
    out = tmp_path / "tomo_exp"
    rc = main(["tomo", "--grid", "8", "--rays", "60", "--seeds", "2",
               "--iters", "5", "--inner-iters", "4", "--out", str(out),
               "--no-figures"])
    assert rc == 0
    lines = (out / "rmse.csv").read_text().strip().splitlines()
    assert len(lines) == 1 + 2 * 3  # header + seeds x l-values
    summary = json.loads((out / "summary.json").read_text())
    assert "l1_beats_l2_seeds" in summary
    assert set(summary["median_rmse"]) == {"1", "1.8", "2"}


def test_config_file_and_flag_precedence(matrix_bundle, tmp_path):
    cfg_file = tmp_path / "conf.json"
    cfg_file.write_text(json.dumps({"iters": 3, "lam_rel": 0.2}))
    out = tmp_path / "prec"
    rc = main(["solve", "--problem", str(matrix_bundle), "--solver", "fista",
               "--config", str(cfg_file), "--iters", "7", "--out", str(out),
               "--no-figures"])
    assert rc == 0
    eff = json.loads((out / "summary.json").read_text())["effective_config"]
    assert eff["iters"] == 7        # flag wins
    assert eff["lam_rel"] == 0.2    # config fills the gap


def test_config_file_rejects_unknown_keys(matrix_bundle, tmp_path):
    cfg_file = tmp_path / "conf.json"
    cfg_file.write_text(json.dumps({"itres": 3}))
    rc = main(["solve", "--problem", str(matrix_bundle), "--config", str(cfg_file),
               "--out", str(tmp_path / "o"), "--no-figures"])
    assert rc == 2


def test_wavelet_solve_path(tmp_path):
    gen = tmp_path / "ms_bundle"
    rc = main(["gen", "matrix", "--rows", "64", "--cols", "64", "--model",
               "multiscale", "--seed", "3", "--out", str(gen), "--no-figures"])
    assert rc == 0
    out = tmp_path / "ws"
    rc = main(["solve", "--problem", str(gen), "--solver", "conv-cg",
               "--wavelet", "--levels", "3", "--lam-rel", "0.05",
               "--iters", "8", "--out", str(out), "--no-figures"])
    assert rc == 0
    model = np.loadtxt(out / "xbar.txt")
    assert model.size == 64 and np.all(np.isfinite(model))
    assert (out / "coeffs.txt").exists()
