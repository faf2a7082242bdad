"""Input validation helpers shared by estimators and free functions."""

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    InvalidWeightsError,
    LengthMismatchError,
    ShapeMismatchError,
)


def as_float_matrix(x, name="X"):
    """Return ``x`` as a finite, 2-D float64 array."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_labels(y, n_samples=None):
    """Validate a contiguous 1..c integer label vector.

    Returns ``(labels, n_classes)``. Labels must cover every value in
    1..c at least once; use :func:`ckada.datasets.load_manifest` or
    :func:`ckada.datasets.remap_labels` to make arbitrary labels contiguous.
    """
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError("labels must be 1-D")
    if not np.issubdtype(y.dtype, np.integer):
        yf = np.asarray(y, dtype=np.float64)
        if not np.all(yf == np.round(yf)):
            raise ValueError("labels must be integers")
        y = yf.astype(np.int64)
    else:
        y = y.astype(np.int64)
    if n_samples is not None and len(y) != n_samples:
        raise LengthMismatchError(f"got {len(y)} labels for {n_samples} samples")
    if y.min(initial=1) < 1:
        raise ValueError("labels must start at 1")
    c = int(y.max())
    present = np.unique(y)
    if len(present) != c:
        missing = sorted(set(range(1, c + 1)) - set(present.tolist()))
        raise ValueError(f"labels are not contiguous 1..{c}; missing {missing}")
    return y, c


def check_same_n_samples(matrices, names=None):
    ns = [len(m) for m in matrices]
    if len(set(ns)) > 1:
        raise ShapeMismatchError(f"sample counts disagree: {ns}")
    return ns[0]


def check_feature_dim(a, b):
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatchError(
            f"feature dimensions disagree: {a.shape[1]} vs {b.shape[1]}")


def check_square_symmetric(m, name="matrix", tol=1e-12):
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeMismatchError(f"{name} must be square, got {m.shape}")
    scale = max(1.0, float(np.abs(m).max()))
    if np.abs(m - m.T).max() > tol * scale:
        raise ValueError(f"{name} is not symmetric within {tol:g}")
    return m


def check_simplex_weights(alphas, n=None, tol=1e-12):
    """Validate nonnegative mixture weights summing to one."""
    a = np.asarray(alphas, dtype=np.float64)
    if a.ndim != 1:
        raise InvalidWeightsError("weights must be a 1-D sequence")
    if n is not None and len(a) != n:
        raise InvalidWeightsError(f"expected {n} weights, got {len(a)}")
    if (a < 0).any():
        raise InvalidWeightsError("weights must be nonnegative")
    if abs(a.sum() - 1.0) > tol:
        raise InvalidWeightsError(f"weights sum to {a.sum():.15g}, expected 1")
    return a


def check_unit_rows(x, tol=1e-12):
    norms = np.linalg.norm(x, axis=1)
    if np.abs(norms - 1.0).max() > tol:
        raise ValueError("rows are not unit-normalized; call unit_normalize first")
    return x
