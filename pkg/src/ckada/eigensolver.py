"""Symmetric-definite generalized eigenvalue solving.

Solves A v = lambda (B + ridge*I) v for the r smallest eigenpairs via
Cholesky-based reduction (LAPACK through scipy). Eigenvectors come back
B-orthonormal, ascending by eigenvalue, with a deterministic sign: the
largest-magnitude entry of each vector is positive.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import NotPositiveDefiniteError
from .validation import check_square_symmetric

#: ridge policy: start at RIDGE_SCALE * trace(B)/n, double on failure
RIDGE_SCALE = 1e-6
MAX_RIDGE_DOUBLINGS = 10


@dataclass(frozen=True)
class EigenResult:
    """Eigenpairs of one generalized solve.

    eigenvalues are ascending; eigenvectors[:, k] belongs to
    eigenvalues[k] and is normalized so v^T (B + ridge*I) v = 1.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    ridge: float


def _canonical_signs(vectors):
    idx = np.abs(vectors).argmax(axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def gsep_smallest(a, b, r, ridge=0.0) -> EigenResult:
    """Return the r smallest eigenpairs of a v = lambda (b + ridge*I) v.

    Parameters
    ----------
    a, b : ndarray of shape (n, n)
        Symmetric matrices; ``b + ridge*I`` must be positive definite.
    r : int
        Number of eigenpairs, 1 <= r <= n.
    ridge : float
        Nonnegative diagonal regularization added to ``b``.

    Raises
    ------
    NotPositiveDefiniteError
        If the regularized ``b`` fails its Cholesky factorization.
    """
    a = check_square_symmetric(a, "a")
    b = check_square_symmetric(b, "b")
    n = a.shape[0]
    if b.shape[0] != n:
        from .exceptions import ShapeMismatchError
        raise ShapeMismatchError(f"a is {a.shape}, b is {b.shape}")
    if not 1 <= r <= n:
        raise ValueError(f"r must be in [1, {n}], got {r}")
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    b_reg = b if ridge == 0 else b + ridge * np.eye(n)
    try:
        w, v = scipy.linalg.eigh(a, b_reg, subset_by_index=[0, r - 1])
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
        raise NotPositiveDefiniteError(ridge) from None
    return EigenResult(eigenvalues=w, eigenvectors=_canonical_signs(v),
                       ridge=float(ridge))


def default_ridge(b) -> float:
    """Starting ridge of the documented policy: RIDGE_SCALE * trace(b)/n."""
    b = np.asarray(b)
    return RIDGE_SCALE * max(float(np.trace(b)), 0.0) / len(b)


def gsep_with_policy(a, b, r, ridge=None) -> EigenResult:
    """Solve with the default ridge policy when ``ridge`` is None.

    Starts at :func:`default_ridge` and doubles the ridge on factorization
    failure, up to MAX_RIDGE_DOUBLINGS times. An explicit ``ridge`` is
    used as-is with no retry.
    """
    if ridge is not None:
        return gsep_smallest(a, b, r, ridge)
    eps = default_ridge(b)
    for _ in range(MAX_RIDGE_DOUBLINGS + 1):
        try:
            return gsep_smallest(a, b, r, eps)
        except NotPositiveDefiniteError:
            if eps == 0.0:
                eps = np.finfo(np.float64).tiny
            eps *= 2.0
    raise NotPositiveDefiniteError(eps)


def eigen_residuals(result: EigenResult, a, b) -> np.ndarray:
    """Per-pair residual norms ||A v - lambda (B + ridge*I) v||.

    ``b`` is the unregularized matrix; the stored ridge is re-applied.
    """
    b_reg = b + result.ridge * np.eye(len(b))
    av = a @ result.eigenvectors
    bv = b_reg @ result.eigenvectors
    return np.linalg.norm(av - bv * result.eigenvalues, axis=0)


def residual_bound(a, b) -> float:
    """Tolerance used by the residual invariant: 1e-8 * (||A||_F + ||B||_F)."""
    return 1e-8 * (np.linalg.norm(a) + np.linalg.norm(b))
