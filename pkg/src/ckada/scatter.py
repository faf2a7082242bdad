"""Affinity, weight, and outer-product matrices for angular discriminant analysis.

All functions take samples as rows. Angular quantities are defined on
unit-normalized rows; the squared chordal distance between unit vectors
``u`` and ``v`` is ``2 - 2 <u, v>``.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .exceptions import DegenerateNeighborhoodWarning
from .validation import as_float_matrix, check_labels, check_unit_rows

GAMMA_FLOOR = 1e-6


@dataclass(frozen=True)
class WeightPair:
    """Within/between sample weight matrices for one discriminant flavor."""

    within: np.ndarray
    between: np.ndarray
    kind: str  # 'ada' | 'lada' | 'lfda_baseline'


@dataclass(frozen=True)
class OuterProductPair:
    """Within/between d x d outer-product matrices plus the means behind them."""

    within: np.ndarray
    between: np.ndarray
    class_means: np.ndarray  # (c, d), unit-normalized sample means per class
    total_mean: np.ndarray   # (d,)


def ada_weights(labels) -> WeightPair:
    """Label-only weight matrices of the global angular discriminant.

    within[i, j] = 1/n_l when y_i = y_j = l, else 0.
    between[i, j] = 1/n - 1/n_l when y_i = y_j = l, else 1/n.

    Every within row sums to 1 and every between row sums to 0.
    """
    y, c = check_labels(labels)
    n = len(y)
    within = np.zeros((n, n))
    between = np.full((n, n), 1.0 / n)
    for l in range(1, c + 1):
        idx = np.where(y == l)[0]
        within[np.ix_(idx, idx)] = 1.0 / len(idx)
        between[np.ix_(idx, idx)] = 1.0 / n - 1.0 / len(idx)
    return WeightPair(within=within, between=between, kind="ada")


def _knn_scales(distances, k_nn, context):
    """Distance to the k-th nearest neighbor of each row, self excluded.

    ``distances`` must be a symmetric distance-like matrix with a zero
    diagonal. Scales below GAMMA_FLOOR are clamped and flagged.
    """
    n = len(distances)
    if not 1 <= k_nn < n:
        raise ValueError(f"k_nn must be in [1, {n - 1}], got {k_nn}")
    d = distances.copy()
    np.fill_diagonal(d, np.inf)
    part = np.sort(d, axis=1)
    gamma = part[:, k_nn - 1]
    degenerate = gamma < GAMMA_FLOOR
    if degenerate.any():
        warnings.warn(
            f"{context}: {int(degenerate.sum())} point(s) coincide with their "
            f"k-th neighbor; local scale clamped to {GAMMA_FLOOR:g}",
            DegenerateNeighborhoodWarning,
            stacklevel=3,
        )
        gamma = np.maximum(gamma, GAMMA_FLOOR)
    return gamma


def angular_affinity(xn, k_nn=7) -> np.ndarray:
    """Affinity exp(-(2 - 2 <x_i, x_j>) / (g_i g_j)) with local angular scaling.

    ``g_i`` is the chordal distance from row i to its k_nn-th angular
    nearest neighbor. Rows must be unit-normalized. The result is
    symmetric with a unit diagonal and entries in (0, 1].
    """
    xn = as_float_matrix(xn, "xn")
    check_unit_rows(xn)
    g = xn @ xn.T
    g = (g + g.T) / 2.0
    sq_chord = np.clip(2.0 - 2.0 * g, 0.0, None)
    chord = np.sqrt(sq_chord)
    gamma = _knn_scales(chord, k_nn, "angular_affinity")
    aff = np.exp(-sq_chord / np.outer(gamma, gamma))
    np.fill_diagonal(aff, 1.0)
    return aff


def euclidean_affinity(x, k_nn=7) -> np.ndarray:
    """Heat-kernel affinity exp(-||x_i - x_j||^2 / (g_i g_j)) with local scaling.

    Euclidean counterpart of :func:`angular_affinity`, used by the
    baseline discriminant. ``g_i`` is the distance to the k_nn-th
    Euclidean neighbor.
    """
    x = as_float_matrix(x, "x")
    dist = cdist(x, x)
    dist = (dist + dist.T) / 2.0
    gamma = _knn_scales(dist, k_nn, "euclidean_affinity")
    aff = np.exp(-(dist ** 2) / np.outer(gamma, gamma))
    np.fill_diagonal(aff, 1.0)
    return aff


def _affinity_weights(labels, affinity, kind) -> WeightPair:
    y, c = check_labels(labels)
    n = len(y)
    affinity = np.asarray(affinity, dtype=np.float64)
    if affinity.shape != (n, n):
        from .exceptions import ShapeMismatchError
        raise ShapeMismatchError(
            f"affinity shape {affinity.shape} does not match {n} labels")
    within = np.zeros((n, n))
    between = np.full((n, n), 1.0 / n)
    for l in range(1, c + 1):
        idx = np.where(y == l)[0]
        nl = len(idx)
        block = affinity[np.ix_(idx, idx)]
        within[np.ix_(idx, idx)] = block / nl
        between[np.ix_(idx, idx)] = block * (1.0 / n - 1.0 / nl)
    return WeightPair(within=within, between=between, kind=kind)


def lada_weights(labels, affinity) -> WeightPair:
    """Locality-weighted angular discriminant weights.

    Same-class entries of :func:`ada_weights` are modulated by the given
    angular affinity; cross-class entries keep the constant 1/n between
    weight. An all-ones affinity reduces to :func:`ada_weights` exactly.
    """
    return _affinity_weights(labels, affinity, "lada")


def lfda_baseline_weights(labels, x, k_nn=7) -> WeightPair:
    """Euclidean-affinity analog of :func:`lada_weights` for the baseline.

    ``x`` holds raw standardized features (no unit normalization); the
    affinity is the local-scaled heat kernel of :func:`euclidean_affinity`.
    """
    aff = euclidean_affinity(x, k_nn=k_nn)
    return _affinity_weights(labels, aff, "lfda_baseline")


def outer_products_direct(xn, labels, mode="ada", affinity=None) -> OuterProductPair:
    """Within/between outer-product matrices, built from their defining sums.

    ``mode='ada'``: within = sum_l sum_{i in l} mean_l x_i^T (equals
    sum_l n_l mean_l mean_l^T), between = sum_l n_l mean mean_l^T.

    ``mode='lada'``: within/between = sum_ij W_ij x_i x_j^T with the
    affinity-modulated weights of :func:`lada_weights`; requires
    ``affinity``.

    Both results are symmetrized as (S + S^T)/2. Rows of ``xn`` must be
    unit-normalized.
    """
    xn = as_float_matrix(xn, "xn")
    check_unit_rows(xn)
    y, c = check_labels(labels, n_samples=len(xn))
    n, d = xn.shape

    class_sums = np.zeros((c, d))
    counts = np.zeros(c)
    for l in range(1, c + 1):
        idx = y == l
        class_sums[l - 1] = xn[idx].sum(axis=0)
        counts[l - 1] = idx.sum()
    class_means = class_sums / counts[:, None]
    total_mean = xn.mean(axis=0)

    if mode == "ada":
        within = np.zeros((d, d))
        between = np.zeros((d, d))
        for l in range(c):
            within += np.outer(class_means[l], class_sums[l])
            between += counts[l] * np.outer(total_mean, class_means[l])
    elif mode == "lada":
        if affinity is None:
            raise ValueError("mode='lada' requires an affinity matrix")
        pair = lada_weights(y, affinity)
        within = xn.T @ pair.within @ xn
        between = xn.T @ pair.between @ xn
    else:
        raise ValueError(f"unknown mode {mode!r}")

    within = (within + within.T) / 2.0
    between = (between + between.T) / 2.0
    return OuterProductPair(within=within, between=between,
                            class_means=class_means, total_mean=total_mean)
