"""Stratified cross-validation, grid search, and accuracy metrics."""

import itertools
from dataclasses import dataclass

import numpy as np

from .classifiers import make_classifier
from .datasets import MultiSourceDataset
from .exceptions import ClassTooSmallError, LengthMismatchError
from .embeddings import COMPOSITE_VARIANTS, make_embedding
from .validation import check_labels

DEFAULT_SIGMA_MULTIPLIERS = (0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0)

_CLASSIFIER_PARAM_NAMES = {"knn": "k", "ml": "shrinkage", "src": "sparsity"}
_CLASSIFIER_DEFAULT_GRIDS = {"knn": (1, 3, 5), "ml": (0.01, 0.05, 0.2),
                             "src": (3, 5, 10)}


@dataclass(frozen=True)
class Metrics:
    """Overall/average accuracy (percent), per-class accuracies, confusion.

    confusion[i, j] counts samples of true class i+1 predicted as j+1.
    """

    oa: float
    aa: float
    per_class: np.ndarray
    confusion: np.ndarray

    def to_dict(self):
        return {
            "oa": self.oa,
            "aa": self.aa,
            "per_class": [float(v) for v in self.per_class],
            "confusion": self.confusion.tolist(),
        }


def evaluate(predicted, true, n_classes=None) -> Metrics:
    """Accuracy metrics of a prediction against ground truth."""
    predicted = np.asarray(predicted, dtype=np.int64)
    true = np.asarray(true, dtype=np.int64)
    if len(predicted) != len(true):
        raise LengthMismatchError(
            f"{len(predicted)} predictions for {len(true)} labels")
    c = int(max(true.max(), predicted.max(), n_classes or 0))
    confusion = np.zeros((c, c), dtype=np.int64)
    np.add.at(confusion, (true - 1, predicted - 1), 1)
    row_sums = confusion.sum(axis=1)
    present = row_sums > 0
    per_class = np.zeros(c)
    per_class[present] = 100.0 * np.diag(confusion)[present] / row_sums[present]
    oa = 100.0 * np.trace(confusion) / confusion.sum()
    aa = float(per_class[present].mean())
    return Metrics(oa=float(oa), aa=aa, per_class=per_class, confusion=confusion)


def kfold_stratified(labels, folds, seed):
    """Per-class round-robin fold assignment after a seeded shuffle.

    Returns a list of (train_indices, validation_indices) pairs whose
    validation sides partition all indices. Every class must have at
    least ``folds`` samples.
    """
    y, c = check_labels(labels)
    if folds < 2:
        raise ValueError("folds must be >= 2")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    assignment = np.empty(len(y), dtype=np.int64)
    for l in range(1, c + 1):
        idx = np.where(y == l)[0]
        if len(idx) < folds:
            raise ClassTooSmallError(l, len(idx), folds)
        perm = rng.permutation(idx)
        assignment[perm] = np.arange(len(perm)) % folds
    out = []
    all_idx = np.arange(len(y))
    for f in range(folds):
        val = all_idx[assignment == f]
        train = all_idx[assignment != f]
        out.append((train, val))
    return out


@dataclass(frozen=True)
class GridSpec:
    """Search space over the free parameters of an embedding + classifier.

    ``sigma_multipliers`` scale the per-source median-heuristic sigma
    (the full cartesian product across sources is searched);
    ``alpha_step`` discretizes the mixture simplex; ``classifier_grid``
    holds candidate values of the classifier's tuned parameter (k for
    knn, shrinkage for ml, sparsity for src).
    """

    sigma_multipliers: tuple = DEFAULT_SIGMA_MULTIPLIERS
    alpha_step: float = 0.1
    r_candidates: tuple = (2, 4, 8)
    classifier_grid: tuple = None

    def __post_init__(self):
        if not self.sigma_multipliers or not self.r_candidates:
            raise ValueError("grids must be non-empty")
        if any(m <= 0 for m in self.sigma_multipliers):
            raise ValueError("sigma multipliers must be positive")
        if not 0 < self.alpha_step <= 1:
            raise ValueError("alpha_step must lie in (0, 1]")
        if any(r < 1 for r in self.r_candidates):
            raise ValueError("r candidates must be >= 1")

    @classmethod
    def from_dict(cls, d):
        kwargs = {}
        if "sigma_multipliers" in d:
            kwargs["sigma_multipliers"] = tuple(d["sigma_multipliers"])
        if "alpha_step" in d:
            kwargs["alpha_step"] = float(d["alpha_step"])
        if "r_candidates" in d:
            kwargs["r_candidates"] = tuple(d["r_candidates"])
        if "classifier_grid" in d and d["classifier_grid"] is not None:
            kwargs["classifier_grid"] = tuple(d["classifier_grid"])
        return cls(**kwargs)


def simplex_grid(n_sources, step):
    """All nonnegative weight vectors on the simplex with the given step."""
    k = int(round(1.0 / step))
    points = []
    for combo in itertools.product(range(k + 1), repeat=n_sources - 1):
        rest = k - sum(combo)
        if rest >= 0:
            points.append(tuple(v / k for v in (*combo, rest)))
    return points


def _grid_points(method, classifier, n_sources, grid: GridSpec):
    """Enumerate grid points as dicts with a deterministic tie-break key.

    Field order of the key: sigma multipliers, alphas, r, classifier
    parameter; lexicographically smaller keys win ties, so smaller r is
    preferred within identical kernel settings.
    """
    if method in COMPOSITE_VARIANTS:
        sigma_sets = list(itertools.product(grid.sigma_multipliers,
                                            repeat=n_sources))
        alpha_sets = simplex_grid(n_sources, grid.alpha_step)
    elif method == "kpca":
        sigma_sets = [(m,) for m in grid.sigma_multipliers]
        alpha_sets = [()]
    else:  # input-space ada/lada: no kernel parameters
        sigma_sets = [()]
        alpha_sets = [()]
    clf_grid = grid.classifier_grid or _CLASSIFIER_DEFAULT_GRIDS[classifier]
    points = []
    for sig in sigma_sets:
        for alpha in alpha_sets:
            for r in grid.r_candidates:
                for cp in clf_grid:
                    points.append({
                        "sigma_multipliers": sig,
                        "alphas": alpha,
                        "n_components": int(r),
                        "classifier_param": cp,
                        "key": (sig, alpha, int(r), cp),
                    })
    return points


def _fit_predict(method, classifier, point, train_ds, train_idx, val_idx):
    sources_tr = [s[train_idx] for s in train_ds.sources]
    sources_val = [s[val_idx] for s in train_ds.sources]
    y_tr = train_ds.labels[train_idx]
    emb_params = {}
    if method in COMPOSITE_VARIANTS:
        emb_params["sigma_multipliers"] = point["sigma_multipliers"]
        if point["alphas"]:
            emb_params["alphas"] = point["alphas"]
    elif method == "kpca":
        emb_params["sigma_multiplier"] = point["sigma_multipliers"][0]
    emb = make_embedding(method, n_components=point["n_components"], **emb_params)
    emb.fit(sources_tr, y_tr)
    clf = make_classifier(classifier,
                          **{_CLASSIFIER_PARAM_NAMES[classifier]:
                             point["classifier_param"]})
    clf.fit(emb.training_coordinates_, y_tr)
    return clf.predict(emb.transform(sources_val))


def grid_search(train_ds: MultiSourceDataset, method, grid: GridSpec,
                folds=5, seed=0, classifier="knn"):
    """Exhaustive cross-validated search over a GridSpec.

    Scores every grid point by mean validation overall accuracy across
    stratified folds; ties resolve to the lexicographically smallest
    point in field order (sigma multipliers, alphas, r, classifier
    parameter), which is independent of enumeration order. The fold
    count drops to the smallest class size when a class is too small
    for the requested ``folds``.

    Returns ``(best, table)`` where both carry mean/std OA per point.
    """
    min_class = int(train_ds.class_counts().min())
    folds_eff = min(folds, min_class)
    if folds_eff < 2:
        raise ClassTooSmallError(int(train_ds.class_counts().argmin()) + 1,
                                 min_class, 2)
    splits = kfold_stratified(train_ds.labels, folds_eff, seed)
    table = []
    for point in _grid_points(method, classifier, train_ds.n_sources, grid):
        fold_oa = []
        for train_idx, val_idx in splits:
            pred = _fit_predict(method, classifier, point, train_ds,
                                train_idx, val_idx)
            fold_oa.append(evaluate(pred, train_ds.labels[val_idx],
                                    n_classes=train_ds.n_classes).oa)
        row = dict(point)
        row["mean_oa"] = float(np.mean(fold_oa))
        row["std_oa"] = float(np.std(fold_oa, ddof=1)) if len(fold_oa) > 1 else 0.0
        table.append(row)
    best = dict(min(table, key=lambda r: (-r["mean_oa"], r["key"])))
    return best, table


def trial_summary(values):
    """Mean and sample standard deviation across repeated trials.

    A single trial reports std 0, matching the +/- convention of the
    benchmark tables.
    """
    values = np.asarray(values, dtype=np.float64)
    mean = float(values.mean())
    std = float(values.std(ddof=1)) if len(values) > 1 else 0.0
    return mean, std
