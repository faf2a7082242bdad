"""Base kernel evaluation, Gram assembly, and composite-kernel mixing.

Kernel conventions used everywhere in this package:

* ``rbf``:    k(x, z) = exp(-||x - z||^2 / (2 * sigma^2))
* ``linear``: k(x, z) = <x, z>

The RBF width convention above is fixed here once and used consistently
by configuration files and cross-validation grids.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .exceptions import TooFewSamplesError
from .validation import (
    as_float_matrix,
    check_feature_dim,
    check_simplex_weights,
)

KERNEL_FAMILIES = ("rbf", "linear")


@dataclass(frozen=True)
class KernelSpec:
    """One base kernel: family plus width parameter (RBF only).

    Parameters
    ----------
    family : {'rbf', 'linear'}
    sigma : float, optional
        RBF width, must be positive. Ignored for the linear kernel.
    """

    family: str = "rbf"
    sigma: float | None = None

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.family == "rbf":
            if self.sigma is None or not self.sigma > 0:
                raise ValueError("rbf kernel requires sigma > 0")

    def to_dict(self, source_id=None):
        d = {"family": self.family}
        if source_id is not None:
            d["source"] = source_id
        if self.family == "rbf":
            d["sigma"] = float(self.sigma)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(family=d["family"], sigma=d.get("sigma"))


@dataclass(frozen=True)
class KernelConfig:
    """Per-source kernel specs plus mixture weights on the simplex."""

    per_source: tuple
    alphas: tuple

    def __post_init__(self):
        specs = tuple(self.per_source)
        object.__setattr__(self, "per_source", specs)
        a = check_simplex_weights(self.alphas, n=len(specs))
        object.__setattr__(self, "alphas", tuple(float(v) for v in a))

    @property
    def n_sources(self):
        return len(self.per_source)

    def to_dict(self, source_ids=None):
        ids = source_ids or [f"source_{m}" for m in range(self.n_sources)]
        return {
            "kernels": [s.to_dict(i) for s, i in zip(self.per_source, ids)],
            "alphas": list(self.alphas),
        }

    @classmethod
    def from_dict(cls, d):
        specs = tuple(KernelSpec.from_dict(k) for k in d["kernels"])
        return cls(per_source=specs, alphas=tuple(d["alphas"]))


@dataclass(frozen=True)
class GramMatrix:
    """A kernel (Gram) matrix with a flag recording whether it is a self-Gram."""

    values: np.ndarray
    symmetric: bool = False

    @property
    def shape(self):
        return self.values.shape


def gram(a, b, spec: KernelSpec) -> GramMatrix:
    """Evaluate the kernel between every row of ``a`` and every row of ``b``.

    Parameters
    ----------
    a, b : ndarray of shape (n_a, d), (n_b, d)
        Inputs sharing a feature dimension. Callers follow their own
        normalization policy (angular paths pass unit rows).
    spec : KernelSpec

    Returns
    -------
    GramMatrix
        Entry (i, j) = k(a_i, b_j). The symmetric flag is set iff ``a``
        and ``b`` are the same array object.

    Notes
    -----
    The cross and self cases share one code path so that evaluating a
    model on its own training set reproduces the training Gram bitwise.
    """
    same = a is b
    a = as_float_matrix(a, "a")
    b = a if same else as_float_matrix(b, "b")
    check_feature_dim(a, b)
    if spec.family == "linear":
        values = a @ b.T
    else:
        sq = cdist(a, b, "sqeuclidean")
        values = np.exp(-sq / (2.0 * spec.sigma ** 2))
    return GramMatrix(values=values, symmetric=same)


def composite_gram(grams, alphas) -> GramMatrix:
    """Mix per-source Grams entrywise: sum_m alpha_m * K_m.

    All Grams must share a shape, and ``alphas`` must lie on the simplex.
    The result is flagged symmetric iff every input is.
    """
    if not grams:
        raise ValueError("need at least one Gram matrix")
    a = check_simplex_weights(alphas, n=len(grams))
    shape = grams[0].values.shape
    for g in grams[1:]:
        if g.values.shape != shape:
            from .exceptions import ShapeMismatchError
            raise ShapeMismatchError(
                f"Gram shapes disagree: {g.values.shape} vs {shape}")
    out = np.zeros(shape)
    for w, g in zip(a, grams):
        out += w * g.values
    return GramMatrix(values=out, symmetric=all(g.symmetric for g in grams))


def median_heuristic_sigma(x) -> float:
    """Median of pairwise Euclidean distances among the rows of ``x``.

    Falls back to 1.0 when the median is below 1e-12 (all rows nearly
    identical). This value centers the sigma grids used by
    cross-validation; it is not claimed to be optimal.
    """
    x = as_float_matrix(x, "x")
    if len(x) < 2:
        raise TooFewSamplesError("median heuristic needs at least 2 samples")
    med = float(np.median(pdist(x)))
    return med if med > 1e-12 else 1.0
