import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from ckada.cli import main
from ckada.datasets import load_manifest
from ckada.model_io import load_embedding_model

SYNTH_SPEC = {
    "classes": 3,
    "per_class": 30,
    "dims": [5, 4],
    "separation_rad": 1.0,
    "jitter_rad": 0.05,
    "scale_range": [0.5, 2.0],
    "source_ids": ["hsi", "lidar"],
}


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def _synth(tmp_path, seed=3, spec=None):
    tmp_path.mkdir(parents=True, exist_ok=True)
    cfg = _write(tmp_path / "spec.json", spec or SYNTH_SPEC)
    out = tmp_path / "data"
    rc = main(["--config", cfg, "--seed", str(seed), "--out", str(out), "synth"])
    assert rc == 0
    return out / "manifest.json"


def test_synth_round_trip(tmp_path):
    manifest = _synth(tmp_path)
    ds = load_manifest(manifest)
    assert ds.n_samples == 90 and ds.n_classes == 3 and ds.n_sources == 2
    assert ds.source_ids == ["hsi", "lidar"]


def test_synth_byte_identical_for_same_seed(tmp_path):
    m1 = _synth(tmp_path / "a", seed=11)
    m2 = _synth(tmp_path / "b", seed=11)
    for name in ("manifest.json", "labels.csv", "src_hsi.csv", "src_lidar.csv"):
        assert (m1.parent / name).read_bytes() == (m2.parent / name).read_bytes()


def test_synth_invalid_spec_exit_code(tmp_path, capsys):
    bad = dict(SYNTH_SPEC, separation_rad=-2.0)
    cfg = _write(tmp_path / "spec.json", bad)
    rc = main(["--config", cfg, "--out", str(tmp_path / "o"), "synth"])
    assert rc == 2
    assert "separation" in capsys.readouterr().err


def test_synth_infeasible_exit_code(tmp_path):
    bad = dict(SYNTH_SPEC, dims=[2], separation_rad=2.1, classes=5,
               source_ids=["a"])
    cfg = _write(tmp_path / "spec.json", bad)
    rc = main(["--config", cfg, "--out", str(tmp_path / "o"), "synth"])
    assert rc == 6


def _fit(tmp_path, manifest, method="cklada", classifier=None, n_components=3):
    cfg = {"manifest": str(manifest), "method": method,
           "n_components": n_components, "k_nn": 5}
    if classifier:
        cfg["classifier"] = classifier
    path = _write(tmp_path / f"fit_{method}.json", cfg)
    out = tmp_path / f"model_{method}"
    rc = main(["--config", path, "--out", str(out), "fit"])
    assert rc == 0
    return out


def test_fit_transform_consistency(tmp_path):
    manifest = _synth(tmp_path)
    model_dir = _fit(tmp_path, manifest)
    out = tmp_path / "coords"
    rc = main(["--out", str(out), "transform",
               "--model", str(model_dir / "embedding.model"),
               "--manifest", str(manifest)])
    assert rc == 0
    coords = np.loadtxt(out / "coordinates.csv", delimiter=",")
    assert coords.shape == (3, 90)  # dims x samples on disk
    model = load_embedding_model(model_dir / "embedding.model")
    ds = load_manifest(manifest)
    assert np.abs(coords.T - model.transform(ds.sources)).max() <= 1e-10
    # transforming the training set reproduces the fit-time coordinates
    from ckada.embeddings import CompositeKernelDiscriminant
    refit = CompositeKernelDiscriminant(variant="cklada", n_components=3,
                                        k_nn=5).fit(ds.sources, ds.labels)
    assert np.abs(coords.T - refit.training_coordinates_).max() <= 1e-10


def test_classify_perfect_separation(tmp_path):
    manifest = _synth(tmp_path)
    model_dir = _fit(tmp_path, manifest, classifier={"kind": "knn", "k": 1})
    out = tmp_path / "cls"
    rc = main(["--out", str(out), "classify",
               "--model", str(model_dir / "embedding.model"),
               "--classifier-model", str(model_dir / "classifier.model"),
               "--manifest", str(manifest)])
    assert rc == 0
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["oa"] == 100.0
    preds = np.loadtxt(out / "predictions.csv", dtype=int)
    assert preds.shape == (90,)


def test_transform_dimension_mismatch_exit_code(tmp_path):
    manifest = _synth(tmp_path)
    model_dir = _fit(tmp_path, manifest)
    other = _synth(tmp_path / "other",
                   spec=dict(SYNTH_SPEC, dims=[6, 4]))
    rc = main(["--out", str(tmp_path / "x"), "transform",
               "--model", str(model_dir / "embedding.model"),
               "--manifest", str(other)])
    assert rc == 4


def test_fit_all_methods(tmp_path):
    manifest = _synth(tmp_path)
    for method in ("ckada", "cklfda_baseline", "kpca", "ada", "lada"):
        model_dir = _fit(tmp_path, manifest, method=method, n_components=2)
        assert (model_dir / "embedding.model").exists()


def test_benchmark_table_shape(tmp_path):
    cfg = {
        "synth": SYNTH_SPEC,
        "methods": ["cklada", "kpca"],
        "classifiers": ["knn"],
        "train_sizes": [10, 15],
        "trials": 3,
        "n_components": 2,
        "classifier_params": {"knn": 1},
    }
    path = _write(tmp_path / "bench.json", cfg)
    out = tmp_path / "bench"
    rc = main(["--config", path, "--seed", "4", "--out", str(out), "benchmark"])
    assert rc == 0
    with open(out / "results.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4  # 2 methods x 1 classifier x 2 sizes
    assert {r["method"] for r in rows} == {"cklada", "kpca"}
    assert all(r["trials"] == "3" for r in rows)
    assert (out / "results.txt").read_text().count("+/-") == 4


def test_benchmark_single_trial_zero_std(tmp_path):
    cfg = {
        "synth": SYNTH_SPEC,
        "methods": ["ckada"],
        "train_sizes": [10],
        "trials": 1,
        "n_components": 2,
    }
    path = _write(tmp_path / "bench.json", cfg)
    out = tmp_path / "bench"
    assert main(["--config", path, "--out", str(out), "benchmark"]) == 0
    with open(out / "results.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert float(rows[0]["std_oa"]) == 0.0


def test_benchmark_reproducible_and_threaded(tmp_path):
    cfg = {
        "synth": SYNTH_SPEC,
        "methods": ["cklada"],
        "train_sizes": [10],
        "trials": 4,
        "n_components": 2,
    }
    path = _write(tmp_path / "bench.json", cfg)
    out1, out2 = tmp_path / "b1", tmp_path / "b2"
    assert main(["--config", path, "--seed", "9", "--out", str(out1),
                 "benchmark"]) == 0
    assert main(["--config", path, "--seed", "9", "--out", str(out2),
                 "--threads", "4", "benchmark"]) == 0
    assert (out1 / "results.csv").read_bytes() == (out2 / "results.csv").read_bytes()


def test_benchmark_per_class_table(tmp_path):
    cfg = {
        "synth": SYNTH_SPEC,
        "methods": ["ckada"],
        "classifiers": ["knn"],
        "train_sizes": [10],
        "trials": 2,
        "n_components": 2,
        "per_class_table": {"train_size": 10},
    }
    path = _write(tmp_path / "bench.json", cfg)
    out = tmp_path / "bench"
    assert main(["--config", path, "--out", str(out), "benchmark"]) == 0
    with open(out / "per_class.csv") as fh:
        rows = list(csv.DictReader(fh))
    indices = [r["class_index"] for r in rows]
    assert indices == ["1", "2", "3", "AA", "OA"]


def test_fit_with_grid_search_writes_cv_table(tmp_path):
    manifest = _synth(tmp_path)
    cfg = {
        "manifest": str(manifest),
        "method": "cklada",
        "k_nn": 5,
        "classifier": {"kind": "knn"},
        "grid": {"sigma_multipliers": [0.5, 1.0], "alpha_step": 0.5,
                 "r_candidates": [2], "classifier_grid": [1, 3], "folds": 3},
    }
    path = _write(tmp_path / "fit_grid.json", cfg)
    out = tmp_path / "grid_fit"
    rc = main(["--config", path, "--seed", "2", "--out", str(out), "fit"])
    assert rc == 0
    with open(out / "cv_table.csv") as fh:
        rows = list(csv.DictReader(fh))
    # 4 sigma pairs x 3 alpha points x 1 r x 2 classifier params
    assert len(rows) == 24
    assert {"sigma_multipliers", "alphas", "mean_oa", "std_oa"} <= set(rows[0])
    assert (out / "embedding.model").exists()
    assert (out / "classifier.model").exists()


def test_render_command(tmp_path):
    coords = np.arange(24, dtype=float).reshape(4, 6)
    path = tmp_path / "coords.csv"
    np.savetxt(path, coords, fmt="%.17g", delimiter=",")
    out = tmp_path / "img"
    rc = main(["--out", str(out), "render", "--coords", str(path),
               "--rows", "2", "--cols", "3", "--channels", "0,1,2",
               "--stretch", "0,100"])
    assert rc == 0
    data = (out / "render.ppm").read_bytes()
    assert data.startswith(b"P6\n3 2\n255\n")
    assert len(data) - len(b"P6\n3 2\n255\n") == 2 * 3 * 3


def test_missing_config_exit_code(tmp_path, capsys):
    assert main(["--out", str(tmp_path), "fit"]) == 2
    assert main(["--config", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path), "fit"]) == 2


def test_console_entry_point(tmp_path):
    cfg = tmp_path / "spec.json"
    cfg.write_text(json.dumps(SYNTH_SPEC))
    proc = subprocess.run(
        [sys.executable, "-m", "ckada.cli", "--config", str(cfg),
         "--seed", "1", "--out", str(tmp_path / "o"), "synth"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert (tmp_path / "o" / "manifest.json").exists()
