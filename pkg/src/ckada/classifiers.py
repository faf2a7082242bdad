"""Downstream classifiers used to score embeddings: KNN, Gaussian ML, SRC.

Tie rules are fixed and deterministic everywhere: class-score ties go to
the smallest class index, and distance ties among references go to the
smallest reference index.
"""

import warnings

import numpy as np
import scipy.linalg
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator, ClassifierMixin

from .exceptions import (
    ClassTooSmallError,
    DimensionMismatchError,
    LowConfidenceWarning,
    NotPositiveDefiniteError,
    NumericalBreakdownError,
)
from .validation import as_float_matrix, check_labels

OMP_RESIDUAL_TOL = 1e-6


def _check_queries(q, dim):
    q = as_float_matrix(q, "queries")
    if q.shape[1] != dim:
        raise DimensionMismatchError(
            f"queries have {q.shape[1]} dims, model expects {dim}")
    return q


class KnnClassifier(BaseEstimator, ClassifierMixin):
    """Majority-vote K nearest neighbors with documented tie breaking.

    Votes among the ``k`` Euclidean-nearest references; vote ties go to
    the smallest class index, equal distances to the smallest reference
    index.
    """

    def __init__(self, k=1):
        self.k = k

    def fit(self, coords, y):
        coords = as_float_matrix(coords, "coords")
        y, c = check_labels(y, n_samples=len(coords))
        if not 1 <= self.k <= len(coords):
            raise ValueError(f"k must be in [1, {len(coords)}]")
        self.references_ = coords
        self.labels_ = y
        self.n_classes_ = c
        return self

    def predict(self, queries):
        q = _check_queries(queries, self.references_.shape[1])
        dist = cdist(q, self.references_)
        out = np.empty(len(q), dtype=np.int64)
        for i in range(len(q)):
            order = np.argsort(dist[i], kind="stable")[:self.k]
            votes = np.bincount(self.labels_[order], minlength=self.n_classes_ + 1)
            out[i] = votes[1:].argmax() + 1
        return out


class GaussianMlClassifier(BaseEstimator, ClassifierMixin):
    """Gaussian maximum-likelihood classifier with shrunk covariances.

    Per-class covariance: (1 - shrinkage) * S_l + shrinkage * (tr(S_l)/r) * I,
    where S_l is the maximum-likelihood (1/n_l) sample covariance. The
    identity target's scale is floored at 1e-12 so any shrinkage > 0
    yields a positive definite matrix even for degenerate classes.

    Priors are equal by default (training protocols here are class-
    balanced); set ``priors='empirical'`` to weight by class frequency.
    """

    def __init__(self, shrinkage=0.05, priors="equal"):
        self.shrinkage = shrinkage
        self.priors = priors

    def fit(self, coords, y):
        coords = as_float_matrix(coords, "coords")
        y, c = check_labels(y, n_samples=len(coords))
        if not 0.0 <= self.shrinkage <= 1.0:
            raise ValueError("shrinkage must lie in [0, 1]")
        if self.priors not in ("equal", "empirical"):
            raise ValueError("priors must be 'equal' or 'empirical'")
        r = coords.shape[1]
        self.means_ = np.empty((c, r))
        self.covariances_ = np.empty((c, r, r))
        self._cho_factors = []
        self._log_dets = np.empty(c)
        counts = np.empty(c)
        for l in range(1, c + 1):
            x = coords[y == l]
            if len(x) < 2:
                raise ClassTooSmallError(l, len(x), 2)
            counts[l - 1] = len(x)
            mu = x.mean(axis=0)
            centered = x - mu
            cov = centered.T @ centered / len(x)
            scale = max(np.trace(cov) / r, 1e-12)
            cov = (1.0 - self.shrinkage) * cov + self.shrinkage * scale * np.eye(r)
            self.means_[l - 1] = mu
            self.covariances_[l - 1] = cov
            try:
                factor = scipy.linalg.cho_factor(cov, lower=True)
            except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
                raise NotPositiveDefiniteError(self.shrinkage) from None
            self._cho_factors.append(factor)
            self._log_dets[l - 1] = 2.0 * np.log(np.diag(factor[0])).sum()
        if self.priors == "empirical":
            self._log_priors = np.log(counts / counts.sum())
        else:
            self._log_priors = np.zeros(c)
        self.n_classes_ = c
        return self

    def predict(self, queries):
        q = _check_queries(queries, self.means_.shape[1])
        scores = np.empty((len(q), self.n_classes_))
        for l in range(self.n_classes_):
            diff = q - self.means_[l]
            solved = scipy.linalg.cho_solve(self._cho_factors[l], diff.T)
            maha = np.einsum("ij,ji->i", diff, solved)
            scores[:, l] = -0.5 * (maha + self._log_dets[l]) + self._log_priors[l]
        return scores.argmax(axis=1) + 1


def omp(dictionary, target, sparsity, tol=OMP_RESIDUAL_TOL):
    """Orthogonal Matching Pursuit over unit-norm dictionary columns.

    Greedily selects the atom with the largest absolute inner product
    against the residual (ties: smallest atom index), refits all active
    coefficients by least squares, and stops after ``sparsity`` atoms or
    when the residual norm drops below ``tol``.

    Parameters
    ----------
    dictionary : ndarray of shape (dim, n_atoms)
    target : ndarray of shape (dim,)
    sparsity : int, 1 <= sparsity <= n_atoms

    Returns
    -------
    coeffs : ndarray of shape (n_atoms,) with at most ``sparsity`` nonzeros.
    """
    d = np.asarray(dictionary, dtype=np.float64)
    y = np.asarray(target, dtype=np.float64).ravel()
    if d.ndim != 2:
        raise ValueError("dictionary must be 2-D (dim, n_atoms)")
    dim, n_atoms = d.shape
    if len(y) != dim:
        raise DimensionMismatchError(f"target has {len(y)} dims, atoms have {dim}")
    if not 1 <= sparsity <= n_atoms:
        raise ValueError(f"sparsity must be in [1, {n_atoms}]")

    coeffs = np.zeros(n_atoms)
    residual = y.copy()
    active = []
    while len(active) < sparsity and np.linalg.norm(residual) >= tol:
        corr = np.abs(d.T @ residual)
        if active:
            corr[active] = -np.inf
        j = int(corr.argmax())
        if not np.isfinite(corr[j]) or corr[j] == 0.0:
            break
        active.append(j)
        sub = d[:, active]
        gramian = sub.T @ sub
        try:
            factor = scipy.linalg.cho_factor(gramian)
            sol = scipy.linalg.cho_solve(factor, sub.T @ y)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
            raise NumericalBreakdownError(
                f"active-set system of {len(active)} atoms is singular") from None
        residual = y - sub @ sol
    coeffs[active] = sol if active else 0.0
    return coeffs


class SparseRepresentationClassifier(BaseEstimator, ClassifierMixin):
    """Classify by smallest class-wise sparse reconstruction residual.

    The dictionary holds unit-normalized training embeddings as columns.
    Each query is sparse-coded with :func:`omp`; the predicted class
    minimizes ||y - D delta_l(coeffs)|| over classes l, keeping only that
    class's coefficients. Residual ties go to the smallest class index;
    an all-zero code falls back to class 1 and is flagged low-confidence.
    """

    def __init__(self, sparsity=5, tol=OMP_RESIDUAL_TOL):
        self.sparsity = sparsity
        self.tol = tol

    def fit(self, coords, y):
        coords = as_float_matrix(coords, "coords")
        y, c = check_labels(y, n_samples=len(coords))
        if not 1 <= self.sparsity <= len(coords):
            raise ValueError(f"sparsity must be in [1, {len(coords)}]")
        atoms = coords.T.copy()
        norms = np.linalg.norm(atoms, axis=0)
        if (norms < 1e-12).any():
            raise ValueError("zero-norm training embedding cannot be an atom")
        self.dictionary_ = atoms / norms
        self.labels_ = y
        self.n_classes_ = c
        return self

    def predict(self, queries):
        q = _check_queries(queries, self.dictionary_.shape[0])
        out = np.empty(len(q), dtype=np.int64)
        n_low_confidence = 0
        for i in range(len(q)):
            coeffs = omp(self.dictionary_, q[i], self.sparsity, tol=self.tol)
            if not coeffs.any():
                n_low_confidence += 1
                out[i] = 1
                continue
            residuals = np.empty(self.n_classes_)
            for l in range(1, self.n_classes_ + 1):
                masked = np.where(self.labels_ == l, coeffs, 0.0)
                residuals[l - 1] = np.linalg.norm(q[i] - self.dictionary_ @ masked)
            out[i] = residuals.argmin() + 1
        if n_low_confidence:
            warnings.warn(
                f"{n_low_confidence} query(ies) produced an all-zero sparse "
                "code; assigned class 1 by the tie rule",
                LowConfidenceWarning, stacklevel=2)
        return out


CLASSIFIER_KINDS = ("knn", "ml", "src")


def make_classifier(kind, **params):
    """Instantiate a classifier by CLI kind id ('knn' | 'ml' | 'src')."""
    if kind == "knn":
        return KnnClassifier(**params)
    if kind == "ml":
        return GaussianMlClassifier(**params)
    if kind == "src":
        return SparseRepresentationClassifier(**params)
    raise ValueError(f"unknown classifier {kind!r}; choose from {CLASSIFIER_KINDS}")
