"""Discriminant and baseline embeddings with a fit/transform estimator API.

Three estimators cover the six method ids used by the CLI and the
model container:

* :class:`CompositeKernelDiscriminant` -- ``ckada``, ``cklada``,
  ``cklfda_baseline``.  Multi-source input, composite Gram, kernelized
  generalized eigenproblem ``K W_b K phi = lambda K W_w K phi``; out-of-
  sample points embed through ``Psi^T K_cross``.
* :class:`AngularDiscriminantAnalysis` -- ``ada``, ``lada``.  Input-space
  solve on the d x d outer-product matrices.
* :class:`StackedKernelPCA` -- ``kpca``.  Conventional single-kernel PCA
  on stacked, standardized features.

Angular variants consume unit-normalized rows; the Euclidean baseline
and KPCA consume per-feature standardized rows (training statistics are
stored on the estimator and reused at transform time).
"""

import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .datasets import unit_normalize
from .eigensolver import gsep_with_policy
from .exceptions import EffectiveRankWarning
from .kernels import (
    KernelConfig,
    KernelSpec,
    composite_gram,
    gram,
    median_heuristic_sigma,
)
from .scatter import (
    ada_weights,
    angular_affinity,
    lada_weights,
    lfda_baseline_weights,
    outer_products_direct,
)
from .validation import as_float_matrix, check_labels, check_same_n_samples

METHOD_IDS = ("ckada", "cklada", "cklfda_baseline", "kpca", "ada", "lada")

COMPOSITE_VARIANTS = ("ckada", "cklada", "cklfda_baseline")


def _as_source_list(X):
    if isinstance(X, (list, tuple)):
        return [as_float_matrix(s, f"source {m}") for m, s in enumerate(X)]
    return [as_float_matrix(X, "X")]


def _standardize_fit(x):
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std < 1e-12, 1.0, std)
    return mean, std


def _effective_rank(k_values, tol_factor=1e-10):
    ev = np.linalg.eigvalsh((k_values + k_values.T) / 2.0)
    return int((ev > tol_factor * max(ev.max(), 0.0)).sum())


class CompositeKernelDiscriminant(BaseEstimator, TransformerMixin):
    """Composite-kernel angular (or Euclidean-baseline) discriminant embedding.

    Fuses M per-source feature matrices through a convex combination of
    per-source Gram matrices and solves the kernelized discriminant
    eigenproblem for the ``n_components`` smallest eigenpairs.

    Parameters
    ----------
    variant : {'ckada', 'cklada', 'cklfda_baseline'}
        ``ckada`` uses label-only weights on unit-normalized data;
        ``cklada`` adds per-source angular locality affinities;
        ``cklfda_baseline`` is the Euclidean counterpart on standardized
        raw features (its affinity and kernels both see standardized,
        not normalized, data).
    n_components : int
        Target dimension r. Not bounded by the class count.
    kernels : sequence of KernelSpec or KernelConfig, optional
        Explicit per-source base kernels. Default: RBF per source with
        sigma = sigma_multipliers[m] * median heuristic of that source's
        prepared training rows.
    alphas : sequence of float, optional
        Mixture weights on the simplex. Default: uniform.
    k_nn : int
        Neighborhood size for the locality affinities.
    ridge : float, optional
        Explicit regularization for the within matrix. Default: the
        documented trace-scaled policy with doubling retries.
    sigma_multipliers : float or sequence of float, optional
        Per-source scale on the median-heuristic sigma (ignored when
        explicit kernels are given).

    Attributes
    ----------
    coefficients_ : ndarray of shape (n_train, n_components)
        Eigenvector bank; column k is the k-th smallest eigenpair.
    training_coordinates_ : ndarray of shape (n_train, n_components)
    eigenvalues_, ridge_, kernel_config_, train_features_
    """

    def __init__(self, variant="cklada", n_components=2, kernels=None,
                 alphas=None, k_nn=7, ridge=None, sigma_multipliers=None):
        self.variant = variant
        self.n_components = n_components
        self.kernels = kernels
        self.alphas = alphas
        self.k_nn = k_nn
        self.ridge = ridge
        self.sigma_multipliers = sigma_multipliers

    # -- preparation -------------------------------------------------------

    def _prepare_train(self, sources):
        if self.variant in ("ckada", "cklada"):
            return [unit_normalize(s) for s in sources]
        self.standardize_mean_ = [None] * len(sources)
        self.standardize_std_ = [None] * len(sources)
        prepared = []
        for m, s in enumerate(sources):
            mean, std = _standardize_fit(s)
            self.standardize_mean_[m] = mean
            self.standardize_std_[m] = std
            prepared.append((s - mean) / std)
        return prepared

    def _prepare_test(self, sources):
        if self.variant in ("ckada", "cklada"):
            return [unit_normalize(s) for s in sources]
        return [(s - mean) / std for s, mean, std in
                zip(sources, self.standardize_mean_, self.standardize_std_)]

    def _resolve_kernels(self, prepared):
        m_sources = len(prepared)
        if self.kernels is not None:
            if isinstance(self.kernels, KernelConfig):
                specs = list(self.kernels.per_source)
            else:
                specs = list(self.kernels)
            if len(specs) != m_sources:
                raise ValueError(f"got {len(specs)} kernel specs for "
                                 f"{m_sources} sources")
            return specs
        mult = self.sigma_multipliers
        if mult is None:
            mult = [1.0] * m_sources
        elif np.isscalar(mult):
            mult = [float(mult)] * m_sources
        elif len(mult) != m_sources:
            raise ValueError("sigma_multipliers length must match sources")
        return [KernelSpec("rbf", sigma=mult[m] * median_heuristic_sigma(p))
                for m, p in enumerate(prepared)]

    def _weight_pair(self, y):
        if self.variant == "ckada":
            pair = ada_weights(y)
            return pair.within, pair.between
        n = len(y)
        within = np.zeros((n, n))
        between = np.zeros((n, n))
        for alpha, prepared in zip(self.alphas_, self.train_features_):
            if self.variant == "cklada":
                aff = angular_affinity(prepared, k_nn=self.k_nn)
                pair = lada_weights(y, aff)
            else:
                pair = lfda_baseline_weights(y, prepared, k_nn=self.k_nn)
            within += alpha * pair.within
            between += alpha * pair.between
        return within, between

    # -- estimator API -----------------------------------------------------

    def fit(self, Xs, y):
        """Fit on per-source matrices ``Xs`` (list of (n, d_m)) and labels."""
        if self.variant not in COMPOSITE_VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        sources = _as_source_list(Xs)
        n = check_same_n_samples(sources)
        y, _ = check_labels(y, n_samples=n)
        if not 1 <= self.n_components <= n:
            raise ValueError(f"n_components must be in [1, {n}]")

        self.train_features_ = self._prepare_train(sources)
        if self.alphas is None:
            self.alphas_ = tuple(1.0 / len(sources) for _ in sources)
        else:
            self.alphas_ = tuple(float(a) for a in self.alphas)
        specs = self._resolve_kernels(self.train_features_)
        self.kernel_config_ = KernelConfig(per_source=tuple(specs),
                                           alphas=self.alphas_)

        grams = [gram(p, p, s) for p, s in zip(self.train_features_, specs)]
        k = composite_gram(grams, self.alphas_)
        rank = _effective_rank(k.values)
        if rank < self.n_components:
            warnings.warn(
                f"composite Gram has effective rank {rank} < "
                f"n_components={self.n_components}; trailing dimensions are "
                "ridge artifacts", EffectiveRankWarning, stacklevel=2)

        within, between = self._weight_pair(y)
        s_b = k.values @ between @ k.values
        s_w = k.values @ within @ k.values
        s_b = (s_b + s_b.T) / 2.0
        s_w = (s_w + s_w.T) / 2.0
        res = gsep_with_policy(s_b, s_w, self.n_components, self.ridge)
        self.coefficients_ = res.eigenvectors
        self.eigenvalues_ = res.eigenvalues
        self.ridge_ = res.ridge
        self.training_coordinates_ = k.values @ self.coefficients_
        self.n_features_in_ = [s.shape[1] for s in sources]
        return self

    def transform(self, Xs):
        """Embed new samples: coordinates = (composite cross Gram)^T Psi."""
        sources = _as_source_list(Xs)
        if len(sources) != len(self.train_features_):
            from .exceptions import ShapeMismatchError
            raise ShapeMismatchError(
                f"model has {len(self.train_features_)} sources, "
                f"got {len(sources)}")
        prepared = self._prepare_test(sources)
        crosses = [gram(tr, te, spec) for tr, te, spec in
                   zip(self.train_features_, prepared,
                       self.kernel_config_.per_source)]
        k_cross = composite_gram(crosses, self.alphas_)
        return k_cross.values.T @ self.coefficients_


class AngularDiscriminantAnalysis(BaseEstimator, TransformerMixin):
    """Input-space angular discriminant projection (global or local).

    Builds the within/between outer-product matrices of unit-normalized
    samples and solves for the ``n_components`` smallest generalized
    eigenpairs; ``components_`` maps normalized rows into the subspace.
    Multi-source input is stacked feature-wise before normalization.
    """

    def __init__(self, n_components=2, local=False, k_nn=7, ridge=None):
        self.n_components = n_components
        self.local = local
        self.k_nn = k_nn
        self.ridge = ridge

    def _stack(self, X):
        sources = _as_source_list(X)
        return np.hstack(sources)

    def fit(self, X, y):
        x = self._stack(X)
        y, _ = check_labels(y, n_samples=len(x))
        if not 1 <= self.n_components <= x.shape[1]:
            raise ValueError(f"n_components must be in [1, {x.shape[1]}]")
        xn = unit_normalize(x)
        if self.local:
            aff = angular_affinity(xn, k_nn=self.k_nn)
            pair = outer_products_direct(xn, y, mode="lada", affinity=aff)
        else:
            pair = outer_products_direct(xn, y, mode="ada")
        res = gsep_with_policy(pair.between, pair.within,
                               self.n_components, self.ridge)
        self.components_ = res.eigenvectors
        self.eigenvalues_ = res.eigenvalues
        self.ridge_ = res.ridge
        self.n_features_in_ = x.shape[1]
        self.training_coordinates_ = xn @ self.components_
        return self

    def transform(self, X):
        x = self._stack(X)
        if x.shape[1] != self.n_features_in_:
            from .exceptions import DimensionMismatchError
            raise DimensionMismatchError(
                f"model expects {self.n_features_in_} features, got {x.shape[1]}")
        return unit_normalize(x) @ self.components_


class StackedKernelPCA(BaseEstimator, TransformerMixin):
    """Single-kernel PCA on stacked standardized features (baseline).

    Standard double-centered kernel PCA; eigenvectors are scaled so the
    implicit principal directions have unit norm, which makes linear-
    kernel training coordinates match classical PCA scores up to sign.
    """

    def __init__(self, n_components=2, kernel=None, sigma_multiplier=1.0):
        self.n_components = n_components
        self.kernel = kernel
        self.sigma_multiplier = sigma_multiplier

    def fit(self, Xs, y=None):
        x = np.hstack(_as_source_list(Xs))
        n = len(x)
        if not 1 <= self.n_components <= n:
            raise ValueError(f"n_components must be in [1, {n}]")
        self.mean_, self.std_ = _standardize_fit(x)
        z = (x - self.mean_) / self.std_
        self.train_features_ = z
        if self.kernel is not None:
            spec = self.kernel
        else:
            spec = KernelSpec("rbf", sigma=self.sigma_multiplier *
                              median_heuristic_sigma(z))
        self.kernel_spec_ = spec
        k = gram(z, z, spec).values
        self.gram_row_means_ = k.mean(axis=0)
        self.gram_mean_ = float(k.mean())
        kc = self._center(k)
        w, v = np.linalg.eigh((kc + kc.T) / 2.0)
        w = w[::-1][:self.n_components]
        v = v[:, ::-1][:, :self.n_components]
        positive = w > max(w.max(), 0.0) * 1e-12
        if positive.sum() < self.n_components:
            warnings.warn(
                f"centered Gram has only {int(positive.sum())} positive "
                f"eigenvalues; truncating n_components", EffectiveRankWarning,
                stacklevel=2)
            w, v = w[positive], v[:, positive]
        self.eigenvalues_ = w
        self.coefficients_ = v / np.sqrt(w)
        self.training_coordinates_ = kc @ self.coefficients_
        self.n_features_in_ = x.shape[1]
        return self

    def _center(self, k_cross):
        # rows index training samples; columns index evaluation samples
        return (k_cross
                - k_cross.mean(axis=0)[None, :]
                - self.gram_row_means_[:, None]
                + self.gram_mean_)

    def transform(self, Xs):
        x = np.hstack(_as_source_list(Xs))
        if x.shape[1] != self.n_features_in_:
            from .exceptions import DimensionMismatchError
            raise DimensionMismatchError(
                f"model expects {self.n_features_in_} features, got {x.shape[1]}")
        z = (x - self.mean_) / self.std_
        k_cross = gram(self.train_features_, z, self.kernel_spec_).values
        return self._center(k_cross).T @ self.coefficients_


def make_embedding(method, n_components=2, **params):
    """Instantiate the estimator behind a CLI method id."""
    if method in COMPOSITE_VARIANTS:
        return CompositeKernelDiscriminant(variant=method,
                                           n_components=n_components, **params)
    if method == "kpca":
        allowed = {k: v for k, v in params.items()
                   if k in ("kernel", "sigma_multiplier")}
        return StackedKernelPCA(n_components=n_components, **allowed)
    if method in ("ada", "lada"):
        allowed = {k: v for k, v in params.items() if k in ("k_nn", "ridge")}
        return AngularDiscriminantAnalysis(n_components=n_components,
                                           local=(method == "lada"), **allowed)
    raise ValueError(f"unknown method {method!r}; choose from {METHOD_IDS}")
