"""Command-line surface: synth, fit, transform, classify, benchmark, render.

Global flags precede the subcommand::

    ckada --config spec.json --seed 7 --out results synth

Exit codes: 0 success, 1 unexpected failure, 2 bad usage or config,
3 data error (parsing, alignment, class sizes), 4 dimension or shape
mismatch, 5 numerical failure, 6 infeasible synthetic geometry.
All outputs are byte-reproducible for a fixed config and seed except
run.log, which carries the timestamp.
"""

import argparse
import csv
import datetime
import json
import sys
from pathlib import Path

import numpy as np

from . import exceptions as exc
from .benchmark import format_rows, run_benchmark
from .classifiers import CLASSIFIER_KINDS, make_classifier
from .datasets import SynthSpec, load_manifest, load_sources, save_manifest, \
    synth_multisource
from .embeddings import METHOD_IDS, make_embedding
from .kernels import KernelSpec
from .model_io import load_classifier_model, load_embedding_model, \
    save_classifier_model, save_embedding_model
from .model_selection import evaluate
from .render import render_false_color, write_ppm

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_SHAPE = 4
EXIT_NUMERIC = 5
EXIT_INFEASIBLE = 6

_ERROR_CODES = (
    (exc.InfeasibleSeparationError, EXIT_INFEASIBLE),
    ((exc.DimensionMismatchError, exc.ShapeMismatchError), EXIT_SHAPE),
    ((exc.NotPositiveDefiniteError, exc.NumericalBreakdownError), EXIT_NUMERIC),
    (exc.CkadaError, EXIT_DATA),
)


def _load_config(path):
    if path is None:
        raise SystemExit2("--config is required for this command")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise SystemExit2(f"config not found: {path}")
    except json.JSONDecodeError as e:
        raise SystemExit2(f"config is not valid JSON: {e}")


class SystemExit2(Exception):
    """Configuration/usage problem; maps to exit code 2."""


def _out_dir(args):
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_log(out_dir, args, extra=""):
    # the only output allowed to differ between identical runs
    with open(out_dir / "run.log", "w", encoding="utf-8") as fh:
        fh.write(f"command: {args.command}\n")
        fh.write(f"seed: {args.seed}\n")
        fh.write(f"timestamp: {datetime.datetime.now().isoformat()}\n")
        if extra:
            fh.write(extra + "\n")


def _write_coords_csv(path, coords):
    # on-disk orientation is dims x samples
    np.savetxt(path, np.asarray(coords).T, fmt="%.17g", delimiter=",")


def _read_coords_csv(path):
    arr = np.loadtxt(path, delimiter=",", ndmin=2)
    return arr


# ---------------------------------------------------------------------------
# commands

def cmd_synth(args):
    config = _load_config(args.config)
    try:
        spec = SynthSpec.from_dict(config)
    except (KeyError, TypeError) as e:
        raise SystemExit2(f"synth spec missing or bad field: {e}")
    ds = synth_multisource(spec, args.seed)
    out = _out_dir(args)
    manifest = save_manifest(out, ds)
    _write_log(out, args, f"manifest: {manifest}")
    print(manifest)
    return EXIT_OK


def _build_fit_pieces(config):
    method = config.get("method")
    if method not in METHOD_IDS:
        raise SystemExit2(f"method must be one of {METHOD_IDS}, got {method!r}")
    params = {}
    if method in ("ckada", "cklada", "cklfda_baseline"):
        if config.get("kernels"):
            params["kernels"] = [KernelSpec.from_dict(k) for k in config["kernels"]]
        if config.get("alphas") is not None:
            params["alphas"] = config["alphas"]
        if config.get("sigma_multipliers") is not None:
            params["sigma_multipliers"] = config["sigma_multipliers"]
        params["k_nn"] = config.get("k_nn", 7)
        if config.get("ridge") is not None:
            params["ridge"] = config["ridge"]
    elif method == "kpca":
        if config.get("kernels"):
            params["kernel"] = KernelSpec.from_dict(config["kernels"][0])
        if config.get("sigma_multipliers") is not None:
            mult = config["sigma_multipliers"]
            params["sigma_multiplier"] = mult[0] if isinstance(mult, list) else mult
    else:
        params["k_nn"] = config.get("k_nn", 7)
        if config.get("ridge") is not None:
            params["ridge"] = config["ridge"]
    emb = make_embedding(method, n_components=config.get("n_components", 2),
                         **params)
    return method, emb


def _write_cv_table(path, table):
    fields = ["sigma_multipliers", "alphas", "n_components",
              "classifier_param", "mean_oa", "std_oa"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for row in table:
            writer.writerow([
                ";".join(f"{v:g}" for v in row["sigma_multipliers"]),
                ";".join(f"{v:g}" for v in row["alphas"]),
                row["n_components"], row["classifier_param"],
                f"{row['mean_oa']:.6f}", f"{row['std_oa']:.6f}"])


def _run_fit_grid(config, ds, args, out):
    from .model_selection import GridSpec, grid_search
    clf_kind = (config.get("classifier") or {}).get("kind", "knn")
    if clf_kind not in CLASSIFIER_KINDS:
        raise SystemExit2(f"classifier kind must be one of {CLASSIFIER_KINDS}")
    grid = GridSpec.from_dict(config["grid"])
    best, table = grid_search(ds, config["method"], grid,
                              folds=config["grid"].get("folds", 5),
                              seed=args.seed, classifier=clf_kind)
    _write_cv_table(out / "cv_table.csv", table)
    tuned = dict(config)
    tuned["n_components"] = best["n_components"]
    if config["method"] in ("ckada", "cklada", "cklfda_baseline"):
        tuned["sigma_multipliers"] = list(best["sigma_multipliers"])
        if best["alphas"]:
            tuned["alphas"] = list(best["alphas"])
    elif config["method"] == "kpca":
        tuned["sigma_multipliers"] = list(best["sigma_multipliers"])
    if config.get("classifier"):
        param_name = {"knn": "k", "ml": "shrinkage", "src": "sparsity"}[clf_kind]
        tuned["classifier"] = dict(config["classifier"],
                                   **{param_name: best["classifier_param"]})
    return tuned


def cmd_fit(args):
    config = _load_config(args.config)
    if "manifest" not in config:
        raise SystemExit2("fit config requires a 'manifest' path")
    ds = load_manifest(config["manifest"])
    out = _out_dir(args)
    if config.get("grid"):
        config = _run_fit_grid(config, ds, args, out)
    method, emb = _build_fit_pieces(config)
    emb.fit(ds.sources, ds.labels)
    save_embedding_model(out / "embedding.model", emb)
    written = [str(out / "embedding.model")]
    if config.get("classifier"):
        spec = dict(config["classifier"])
        kind = spec.pop("kind", None)
        if kind not in CLASSIFIER_KINDS:
            raise SystemExit2(f"classifier kind must be one of {CLASSIFIER_KINDS}")
        clf = make_classifier(kind, **spec)
        clf.fit(emb.training_coordinates_, ds.labels)
        save_classifier_model(out / "classifier.model", clf)
        written.append(str(out / "classifier.model"))
    _write_log(out, args, "models: " + ", ".join(written))
    for w in written:
        print(w)
    return EXIT_OK


def cmd_transform(args):
    if not args.model:
        raise SystemExit2("transform requires --model")
    if not args.manifest:
        raise SystemExit2("transform requires --manifest")
    model = load_embedding_model(args.model)
    sources, _ = load_sources(args.manifest)
    coords = model.transform(sources)
    out = _out_dir(args)
    path = out / "coordinates.csv"
    _write_coords_csv(path, coords)
    _write_log(out, args, f"coordinates: {path}")
    print(path)
    return EXIT_OK


def cmd_classify(args):
    if not args.model or not args.classifier_model:
        raise SystemExit2("classify requires --model and --classifier-model")
    if not args.manifest:
        raise SystemExit2("classify requires --manifest")
    emb = load_embedding_model(args.model)
    clf = load_classifier_model(args.classifier_model)
    ds = load_manifest(args.manifest)
    coords = emb.transform(ds.sources)
    pred = clf.predict(coords)
    metrics = evaluate(pred, ds.labels, n_classes=ds.n_classes)
    out = _out_dir(args)
    np.savetxt(out / "predictions.csv", pred, fmt="%d")
    _write_json(out / "metrics.json", metrics.to_dict())
    _write_log(out, args, f"oa: {metrics.oa:.4f}")
    print(f"OA {metrics.oa:.2f}  AA {metrics.aa:.2f}")
    return EXIT_OK


def cmd_benchmark(args):
    config = _load_config(args.config)
    for key in ("methods", "train_sizes"):
        if key not in config:
            raise SystemExit2(f"benchmark config requires '{key}'")
    if "synth" not in config and "manifest" not in config:
        raise SystemExit2("benchmark config requires 'synth' or 'manifest'")
    result = run_benchmark(config, seed=args.seed, threads=args.threads)
    out = _out_dir(args)
    with open(out / "results.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["method", "classifier",
                                                "train_size", "mean_oa",
                                                "std_oa", "trials"])
        writer.writeheader()
        for row in result.rows:
            writer.writerow({**row,
                             "mean_oa": f"{row['mean_oa']:.6f}",
                             "std_oa": f"{row['std_oa']:.6f}"})
    with open(out / "results.txt", "w", encoding="utf-8") as fh:
        fh.write(format_rows(result.rows))
    if result.per_class:
        with open(out / "per_class.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["classifier", "method",
                                                    "train_size", "class_index",
                                                    "mean_acc", "std_acc"])
            writer.writeheader()
            for row in result.per_class:
                writer.writerow({**row,
                                 "mean_acc": f"{row['mean_acc']:.6f}",
                                 "std_acc": f"{row['std_acc']:.6f}"})
    _write_log(out, args, f"cells: {len(result.rows)}")
    print(format_rows(result.rows), end="")
    return EXIT_OK


def cmd_render(args):
    if not args.coords:
        raise SystemExit2("render requires --coords")
    coords = _read_coords_csv(args.coords)
    channels = tuple(int(v) for v in args.channels.split(","))
    stretch = tuple(float(v) for v in args.stretch.split(","))
    if len(stretch) != 2:
        raise SystemExit2("--stretch needs two comma-separated percentiles")
    ppm = render_false_color(coords, (args.rows, args.cols),
                             channels=channels, stretch=stretch)
    out = _out_dir(args)
    path = out / (args.name or "render.ppm")
    write_ppm(path, ppm)
    _write_log(out, args, f"image: {path}")
    print(path)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="ckada",
        description="Composite-kernel angular discriminant analysis toolkit")
    parser.add_argument("--config", help="JSON config file for the command")
    parser.add_argument("--seed", type=int, default=0, help="master RNG seed")
    parser.add_argument("--out", help="output directory (default: cwd)")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for benchmark trials")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="generate a synthetic multi-source dataset")
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("fit", help="fit an embedding (and optional classifier)")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("transform", help="embed samples with a fitted model")
    sp.add_argument("--model", help="embedding model file")
    sp.add_argument("--manifest", help="manifest of sources to embed")
    sp.set_defaults(func=cmd_transform)

    sp = sub.add_parser("classify", help="predict labels and report metrics")
    sp.add_argument("--model", help="embedding model file")
    sp.add_argument("--classifier-model", help="classifier model file")
    sp.add_argument("--manifest", help="labeled manifest to classify")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("benchmark", help="methods x classifiers x sizes table")
    sp.set_defaults(func=cmd_benchmark)

    sp = sub.add_parser("render", help="false-color PPM from coordinates")
    sp.add_argument("--coords", help="coordinates CSV (dims x samples)")
    sp.add_argument("--rows", type=int, required=True, help="grid rows")
    sp.add_argument("--cols", type=int, required=True, help="grid columns")
    sp.add_argument("--channels", default="0,1,2",
                    help="three embedding dims for R,G,B")
    sp.add_argument("--stretch", default="2,98",
                    help="low,high percentile stretch")
    sp.add_argument("--name", help="output file name (default render.ppm)")
    sp.set_defaults(func=cmd_render)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit2 as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyError as e:
        print(f"error: missing config field {e}", file=sys.stderr)
        return EXIT_CONFIG
    except exc.CkadaError as e:
        for types, code in _ERROR_CODES:
            if isinstance(e, types):
                print(f"error: {e}", file=sys.stderr)
                return code
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
