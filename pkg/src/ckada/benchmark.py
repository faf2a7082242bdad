"""Repeated-trial benchmark harness over methods x classifiers x train sizes."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .classifiers import make_classifier
from .datasets import SynthSpec, load_manifest, stratified_split, \
    synth_multisource
from .embeddings import make_embedding
from .model_selection import GridSpec, evaluate, grid_search, trial_summary

_CLASSIFIER_PARAM = {"knn": "k", "ml": "shrinkage", "src": "sparsity"}
_CLASSIFIER_DEFAULT = {"knn": 3, "ml": 0.05, "src": 5}


@dataclass
class BenchmarkResult:
    rows: list          # dicts: method, classifier, train_size, mean/std OA
    per_class: list     # dicts: classifier, method, class_index, mean/std acc
    trial_oa: dict      # (method, classifier, train_size) -> list of OA


def _trial_dataset(config, trial_ss):
    synth_seed, split_seed = (int(v) for v in trial_ss.generate_state(2))
    if "synth" in config and config["synth"] is not None:
        ds = synth_multisource(SynthSpec.from_dict(config["synth"]), synth_seed)
    else:
        ds = load_manifest(config["manifest"])
    return ds, split_seed


def _embedding_params(config, method, point=None):
    params = {}
    if method in ("ckada", "cklada", "cklfda_baseline"):
        params["k_nn"] = config.get("k_nn", 7)
        if config.get("ridge") is not None:
            params["ridge"] = config["ridge"]
        if point is not None:
            params["sigma_multipliers"] = point["sigma_multipliers"]
            if point["alphas"]:
                params["alphas"] = point["alphas"]
        else:
            if config.get("sigma_multipliers") is not None:
                params["sigma_multipliers"] = config["sigma_multipliers"]
            if config.get("alphas") is not None:
                params["alphas"] = config["alphas"]
    elif method == "kpca":
        if point is not None:
            params["sigma_multiplier"] = point["sigma_multipliers"][0]
        elif config.get("sigma_multipliers") is not None:
            mult = config["sigma_multipliers"]
            params["sigma_multiplier"] = mult[0] if not np.isscalar(mult) else mult
    else:
        params["k_nn"] = config.get("k_nn", 7)
        if config.get("ridge") is not None:
            params["ridge"] = config["ridge"]
    return params


def _run_cell_trial(config, method, classifier, train_size, trial_ss):
    """One (method, classifier, train size) cell on one seeded trial."""
    ds, split_seed = _trial_dataset(config, trial_ss)
    train, test = stratified_split(ds, train_size, split_seed)
    clf_params = dict(config.get("classifier_params", {}))
    clf_value = clf_params.get(classifier, _CLASSIFIER_DEFAULT[classifier])
    if config.get("grid"):
        grid = GridSpec.from_dict(config["grid"])
        best, _ = grid_search(train, method, grid,
                              folds=config["grid"].get("folds", 5),
                              seed=split_seed, classifier=classifier)
        emb = make_embedding(method, n_components=best["n_components"],
                             **_embedding_params(config, method, point=best))
        clf_value = best["classifier_param"]
    else:
        emb = make_embedding(method,
                             n_components=config.get("n_components", 4),
                             **_embedding_params(config, method))
    emb.fit(train.sources, train.labels)
    clf = make_classifier(classifier, **{_CLASSIFIER_PARAM[classifier]: clf_value})
    clf.fit(emb.training_coordinates_, train.labels)
    pred = clf.predict(emb.transform(test.sources))
    return evaluate(pred, test.labels, n_classes=ds.n_classes)


def run_benchmark(config, seed=0, threads=1) -> BenchmarkResult:
    """Run every configured cell over seeded trials.

    Trials derive their seeds from one SeedSequence spawn of the master
    seed, run (optionally) on a thread pool, and merge by trial index,
    so results do not depend on scheduling.
    """
    methods = config["methods"]
    classifiers = config.get("classifiers", ["knn"])
    train_sizes = config["train_sizes"]
    trials = int(config.get("trials", 1))
    trial_seqs = np.random.SeedSequence(seed).spawn(trials)

    rows, trial_oa, per_class = [], {}, []
    table_size = (config.get("per_class_table") or {}).get("train_size")
    for method in methods:
        for classifier in classifiers:
            for size in train_sizes:
                def one(trial_ss, m=method, c=classifier, s=size):
                    return _run_cell_trial(config, m, c, s, trial_ss)
                if threads > 1:
                    with ThreadPoolExecutor(max_workers=threads) as pool:
                        metrics = list(pool.map(one, trial_seqs))
                else:
                    metrics = [one(ss) for ss in trial_seqs]
                oas = [m.oa for m in metrics]
                mean, std = trial_summary(oas)
                rows.append({"method": method, "classifier": classifier,
                             "train_size": size, "mean_oa": mean,
                             "std_oa": std, "trials": trials})
                trial_oa[(method, classifier, size)] = oas
                if table_size is not None and size == table_size:
                    accs = np.stack([m.per_class for m in metrics])
                    for ci in range(accs.shape[1]):
                        cmean, cstd = trial_summary(accs[:, ci])
                        per_class.append({
                            "classifier": classifier, "method": method,
                            "class_index": ci + 1, "train_size": size,
                            "mean_acc": cmean, "std_acc": cstd,
                        })
                    aa = [m.aa for m in metrics]
                    amean, astd = trial_summary(aa)
                    per_class.append({
                        "classifier": classifier, "method": method,
                        "class_index": "AA", "train_size": size,
                        "mean_acc": amean, "std_acc": astd,
                    })
                    per_class.append({
                        "classifier": classifier, "method": method,
                        "class_index": "OA", "train_size": size,
                        "mean_acc": mean, "std_acc": std,
                    })
    return BenchmarkResult(rows=rows, per_class=per_class, trial_oa=trial_oa)


def format_rows(rows):
    """Fixed-width text view of the benchmark table (CSV stays canonical)."""
    header = f"{'method':<18} {'classifier':<10} {'train':>5} {'OA':>16}"
    lines = [header, "-" * len(header)]
    for r in rows:
        oa = f"{r['mean_oa']:.1f} +/- {r['std_oa']:.1f}"
        lines.append(f"{r['method']:<18} {r['classifier']:<10} "
                     f"{r['train_size']:>5} {oa:>16}")
    return "\n".join(lines) + "\n"
