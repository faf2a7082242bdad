import numpy as np
import pytest

from ckada.classifiers import (
    GaussianMlClassifier,
    KnnClassifier,
    SparseRepresentationClassifier,
)
from ckada.embeddings import (
    AngularDiscriminantAnalysis,
    CompositeKernelDiscriminant,
    StackedKernelPCA,
)
from ckada.model_io import (
    load_classifier_model,
    load_embedding_model,
    read_container,
    save_classifier_model,
    save_embedding_model,
    write_container,
)

from conftest import random_labels


def _fit_inputs(seed=0, n=24, c=3):
    rng = np.random.default_rng(seed)
    y = random_labels(rng, n, c)
    x1 = rng.normal(size=(n, 5)) + 0.2
    x2 = rng.normal(size=(n, 3)) + 0.2
    q1 = rng.normal(size=(7, 5)) + 0.2
    q2 = rng.normal(size=(7, 3)) + 0.2
    return [x1, x2], y, [q1, q2]


def test_container_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    blocks = [("a", rng.normal(size=(3, 4))), ("b", rng.normal(size=(5,)))]
    path = tmp_path / "m.model"
    write_container(path, {"kind": "embedding", "method": "x"}, blocks)
    header, back = read_container(path)
    assert header["method"] == "x"
    assert header["blocks"][0] == {"name": "a", "shape": [3, 4]}
    for name, arr in blocks:
        assert np.array_equal(back[name], arr)


def test_container_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.model"
    path.write_bytes(b"NOTAMODEL" + b"\x00" * 40)
    with pytest.raises(ValueError, match="magic"):
        read_container(path)


def test_container_truncated_block(tmp_path):
    path = tmp_path / "m.model"
    write_container(path, {"kind": "embedding"}, [("a", np.ones((4, 4)))])
    data = path.read_bytes()
    path.write_bytes(data[:-16])
    with pytest.raises(ValueError, match="truncated"):
        read_container(path)


@pytest.mark.parametrize("variant", ["ckada", "cklada", "cklfda_baseline"])
def test_composite_model_round_trip(tmp_path, variant):
    xs, y, qs = _fit_inputs()
    model = CompositeKernelDiscriminant(variant=variant, n_components=3,
                                        alphas=(0.7, 0.3)).fit(xs, y)
    path = tmp_path / "emb.model"
    save_embedding_model(path, model)
    back = load_embedding_model(path)
    assert back.variant == variant
    assert np.array_equal(back.transform(qs), model.transform(qs))
    assert back.kernel_config_.alphas == (0.7, 0.3)


def test_input_space_model_round_trip(tmp_path):
    xs, y, qs = _fit_inputs()
    model = AngularDiscriminantAnalysis(n_components=2, local=True).fit(xs, y)
    path = tmp_path / "emb.model"
    save_embedding_model(path, model)
    back = load_embedding_model(path)
    assert back.local is True
    assert np.array_equal(back.transform(qs), model.transform(qs))


def test_kpca_model_round_trip(tmp_path):
    xs, y, qs = _fit_inputs()
    model = StackedKernelPCA(n_components=3).fit(xs)
    path = tmp_path / "emb.model"
    save_embedding_model(path, model)
    back = load_embedding_model(path)
    assert np.array_equal(back.transform(qs), model.transform(qs))


def test_knn_model_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    coords = rng.normal(size=(20, 3))
    y = random_labels(rng, 20, 4)
    queries = rng.normal(size=(9, 3))
    model = KnnClassifier(k=3).fit(coords, y)
    path = tmp_path / "clf.model"
    save_classifier_model(path, model)
    back = load_classifier_model(path)
    assert np.array_equal(back.predict(queries), model.predict(queries))


def test_ml_model_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    coords = rng.normal(size=(30, 4))
    y = random_labels(rng, 30, 3)
    queries = rng.normal(size=(9, 4))
    model = GaussianMlClassifier(shrinkage=0.2, priors="empirical").fit(coords, y)
    path = tmp_path / "clf.model"
    save_classifier_model(path, model)
    back = load_classifier_model(path)
    assert back.priors == "empirical"
    assert np.array_equal(back.predict(queries), model.predict(queries))


def test_src_model_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    coords = rng.normal(size=(15, 5))
    y = random_labels(rng, 15, 3)
    queries = rng.normal(size=(6, 5))
    model = SparseRepresentationClassifier(sparsity=4).fit(coords, y)
    path = tmp_path / "clf.model"
    save_classifier_model(path, model)
    back = load_classifier_model(path)
    assert np.array_equal(back.predict(queries), model.predict(queries))


def test_kind_cross_check(tmp_path):
    xs, y, _ = _fit_inputs()
    emb = CompositeKernelDiscriminant(variant="ckada", n_components=2).fit(xs, y)
    path = tmp_path / "emb.model"
    save_embedding_model(path, emb)
    with pytest.raises(ValueError, match="not a classifier"):
        load_classifier_model(path)
