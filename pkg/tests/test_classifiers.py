import numpy as np
import pytest

from ckada.classifiers import (
    GaussianMlClassifier,
    KnnClassifier,
    SparseRepresentationClassifier,
    make_classifier,
    omp,
)
from ckada.exceptions import (
    ClassTooSmallError,
    DimensionMismatchError,
    LowConfidenceWarning,
    NotPositiveDefiniteError,
    NumericalBreakdownError,
)

from conftest import random_labels, random_unit_rows


# ---------------------------------------------------------------------------
# KNN

def test_knn_exact_match():
    refs = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    model = KnnClassifier(k=1).fit(refs, [1, 2, 3])
    assert model.predict(refs).tolist() == [1, 2, 3]


def test_knn_majority():
    refs = np.array([[0.0], [1.0], [1.1]])
    model = KnnClassifier(k=3).fit(refs, [1, 2, 2])
    assert model.predict([[0.9]]).tolist() == [2]


def test_knn_vote_tie_smallest_class():
    refs = np.array([[0.0], [1.0]])
    model = KnnClassifier(k=2).fit(refs, [1, 2])
    assert model.predict([[0.5]]).tolist() == [1]
    # label order must not matter for the tie
    model = KnnClassifier(k=2).fit(refs, [2, 1])
    assert model.predict([[0.5]]).tolist() == [1]


def test_knn_distance_tie_smallest_reference_index():
    refs = np.array([[1.0, 0.0], [-1.0, 0.0]])
    model = KnnClassifier(k=1).fit(refs, [2, 1])
    # both references sit at distance 1 from the origin
    assert model.predict([[0.0, 0.0]]).tolist() == [2]


def test_knn_rotation_invariance():
    rng = np.random.default_rng(0)
    refs = rng.normal(size=(30, 4))
    y = random_labels(rng, 30, 3)
    queries = rng.normal(size=(10, 4))
    rot = np.linalg.qr(rng.normal(size=(4, 4)))[0]
    base = KnnClassifier(k=3).fit(refs, y).predict(queries)
    rotated = KnnClassifier(k=3).fit(refs @ rot, y).predict(queries @ rot)
    assert np.array_equal(base, rotated)


def test_knn_validation():
    refs = np.ones((3, 2))
    with pytest.raises(ValueError):
        KnnClassifier(k=4).fit(refs, [1, 2, 3])
    model = KnnClassifier(k=1).fit(refs, [1, 2, 3])
    with pytest.raises(DimensionMismatchError):
        model.predict(np.ones((2, 5)))


# ---------------------------------------------------------------------------
# Gaussian ML

def test_gaussian_full_shrinkage_is_scaled_identity():
    rng = np.random.default_rng(1)
    coords = rng.normal(size=(20, 3))
    y = random_labels(rng, 20, 2)
    model = GaussianMlClassifier(shrinkage=1.0).fit(coords, y)
    for l in range(2):
        cov = model.covariances_[l]
        scale = cov[0, 0]
        assert np.allclose(cov, scale * np.eye(3), atol=1e-15)


def test_gaussian_midplane_decision():
    rng = np.random.default_rng(2)
    coords = np.vstack([np.array([1.0, 0.0]) + 0.05 * rng.normal(size=(10, 2)),
                        np.array([-1.0, 0.0]) + 0.05 * rng.normal(size=(10, 2))])
    y = np.array([1] * 10 + [2] * 10)
    model = GaussianMlClassifier(shrinkage=0.5).fit(coords, y)
    assert model.predict([[0.3, 0.0]]).tolist() == [1]
    assert model.predict([[-0.3, 0.0]]).tolist() == [2]
    # query at a class mean belongs to that class
    assert model.predict([model.means_[1]]).tolist() == [2]


def test_gaussian_shrinkage_fixes_singularity():
    # n_l < r would make the raw covariance singular
    rng = np.random.default_rng(3)
    coords = rng.normal(size=(10, 10))
    y = np.array([1] * 5 + [2] * 5)
    model = GaussianMlClassifier(shrinkage=0.1).fit(coords, y)
    for cov in model.covariances_:
        assert np.linalg.eigvalsh(cov).min() > 0


@pytest.mark.parametrize("shrinkage", [1e-6, 0.05, 0.5, 1.0])
def test_gaussian_pd_for_any_positive_shrinkage(shrinkage):
    rng = np.random.default_rng(4)
    coords = rng.normal(size=(8, 6))
    coords[1] = coords[0]  # degenerate two-sample class
    y = np.array([1, 1, 2, 2, 2, 2, 2, 2])
    model = GaussianMlClassifier(shrinkage=shrinkage).fit(coords, y)
    for cov in model.covariances_:
        assert np.linalg.eigvalsh(cov).min() > 0


def test_gaussian_zero_shrinkage_singular_raises():
    coords = np.zeros((4, 3))
    coords[:, 0] = [0.0, 1.0, 0.0, 1.0]
    y = np.array([1, 1, 2, 2])
    with pytest.raises(NotPositiveDefiniteError):
        GaussianMlClassifier(shrinkage=0.0).fit(coords, y)


def test_gaussian_class_too_small():
    with pytest.raises(ClassTooSmallError):
        GaussianMlClassifier().fit(np.ones((3, 2)), [1, 1, 2])


def test_gaussian_empirical_priors():
    rng = np.random.default_rng(5)
    coords = rng.normal(size=(30, 2))
    y = np.array([1] * 27 + [2] * 3)
    eq = GaussianMlClassifier(shrinkage=0.3, priors="equal").fit(coords, y)
    emp = GaussianMlClassifier(shrinkage=0.3, priors="empirical").fit(coords, y)
    assert np.array_equal(eq._log_priors, np.zeros(2))
    assert emp._log_priors[0] > emp._log_priors[1]


# ---------------------------------------------------------------------------
# OMP

def test_omp_single_atom_recovery():
    rng = np.random.default_rng(6)
    d = random_unit_rows(rng, 8, 5).T  # 5 x 8 unit columns
    y = 3.0 * d[:, 2]
    coeffs = omp(d, y, sparsity=4)
    assert abs(coeffs[2] - 3.0) < 1e-12
    assert np.count_nonzero(coeffs) == 1  # residual hit zero after one step


def test_omp_orthonormal_closed_form():
    rng = np.random.default_rng(7)
    q = np.linalg.qr(rng.normal(size=(6, 6)))[0]
    y = rng.normal(size=6)
    coeffs = omp(q, y, sparsity=2)
    inner = q.T @ y
    keep = np.argsort(-np.abs(inner), kind="stable")[:2]
    expected = np.zeros(6)
    expected[keep] = inner[keep]
    assert np.abs(coeffs - expected).max() < 1e-12


def test_omp_zero_target():
    rng = np.random.default_rng(8)
    d = random_unit_rows(rng, 4, 3).T
    coeffs = omp(d, np.zeros(3), sparsity=2)
    assert np.array_equal(coeffs, np.zeros(4))


def test_omp_residual_monotone_in_sparsity():
    rng = np.random.default_rng(9)
    d = random_unit_rows(rng, 12, 6).T
    y = rng.normal(size=6)
    prev = np.inf
    for s in range(1, 7):
        res = np.linalg.norm(y - d @ omp(d, y, sparsity=s))
        assert res <= prev + 1e-12
        prev = res


def test_omp_tie_breaks_to_smallest_atom_index():
    a = np.array([1.0, 0.0])
    d = np.column_stack([a, a.copy()])
    y = 2.0 * a
    coeffs = omp(d, y, sparsity=2)
    assert coeffs[0] == 2.0 and coeffs[1] == 0.0


def test_omp_numerical_breakdown():
    rng = np.random.default_rng(10)
    a = random_unit_rows(rng, 1, 6)[0]
    b = random_unit_rows(rng, 1, 6)[0]
    b -= (b @ a) * a
    b /= np.linalg.norm(b)
    near = a + 1e-9 * b
    near /= np.linalg.norm(near)
    d = np.column_stack([a, near])
    y = a + 0.5 * b
    with pytest.raises(NumericalBreakdownError):
        omp(d, y, sparsity=2)


def test_omp_validation():
    d = random_unit_rows(np.random.default_rng(0), 3, 2).T
    with pytest.raises(ValueError):
        omp(d, np.zeros(2), sparsity=0)
    with pytest.raises(DimensionMismatchError):
        omp(d, np.zeros(5), sparsity=1)


# ---------------------------------------------------------------------------
# SRC

def test_src_training_atom_recovers_own_class():
    rng = np.random.default_rng(11)
    coords = random_unit_rows(rng, 20, 6)
    y = random_labels(rng, 20, 4)
    model = SparseRepresentationClassifier(sparsity=3).fit(coords, y)
    assert np.array_equal(model.predict(coords), y)


def test_src_orthogonal_subspaces():
    # class 1 lives in span(e1, e2), class 2 in span(e3, e4)
    rng = np.random.default_rng(12)
    basis = np.eye(4)
    a = np.array([basis[0], basis[1],
                  (basis[0] + basis[1]) / np.sqrt(2)])
    b = np.array([basis[2], basis[3],
                  (basis[2] - basis[3]) / np.sqrt(2)])
    coords = np.vstack([a, b])
    y = np.array([1, 1, 1, 2, 2, 2])
    model = SparseRepresentationClassifier(sparsity=2).fit(coords, y)
    query = 0.7 * basis[0] + 0.3 * basis[1]
    assert model.predict([query]).tolist() == [1]
    query2 = 0.2 * basis[2] - 0.9 * basis[3]
    assert model.predict([query2]).tolist() == [2]


def test_src_zero_code_falls_back_to_class_one():
    coords = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0],
                       [1.0, 1.0, 0.0], [-1.0, 1.0, 0.0]])
    y = np.array([1, 1, 2, 2])
    model = SparseRepresentationClassifier(sparsity=2).fit(coords, y)
    with pytest.warns(LowConfidenceWarning):
        pred = model.predict([[0.0, 0.0, 5.0]])  # orthogonal to every atom
    assert pred.tolist() == [1]


def test_src_rejects_zero_atom():
    coords = np.array([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        SparseRepresentationClassifier(sparsity=1).fit(coords, [1, 2])


# ---------------------------------------------------------------------------

def test_make_classifier_ids():
    assert isinstance(make_classifier("knn", k=3), KnnClassifier)
    assert isinstance(make_classifier("ml"), GaussianMlClassifier)
    assert isinstance(make_classifier("src", sparsity=2),
                      SparseRepresentationClassifier)
    with pytest.raises(ValueError):
        make_classifier("svm")
