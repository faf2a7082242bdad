"""Binary-safe model container: JSON header + float64 matrix blocks.

File layout::

    magic  b"CKADAMDL1\\n"                      (10 bytes)
    length little-endian uint64                  (8 bytes)
    header UTF-8 JSON of exactly `length` bytes
    blocks raw little-endian float64, C order, in header order

The header's ``blocks`` list records each block's name and shape, so the
payload parses without guessing. Both embedding and classifier models
use this container.
"""

import json
import struct

import numpy as np

from .classifiers import (
    GaussianMlClassifier,
    KnnClassifier,
    SparseRepresentationClassifier,
)
from .embeddings import (
    AngularDiscriminantAnalysis,
    CompositeKernelDiscriminant,
    StackedKernelPCA,
)
from .kernels import KernelConfig, KernelSpec

MAGIC = b"CKADAMDL1\n"


def write_container(path, header: dict, blocks):
    """Write named float64 arrays after a JSON header.

    ``blocks`` is a sequence of (name, array) pairs; shapes go into the
    header so the reader can reconstruct them.
    """
    header = dict(header)
    header["blocks"] = [{"name": name, "shape": list(np.asarray(arr).shape)}
                        for name, arr in blocks]
    payload = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(payload)))
        fh.write(payload)
        for _, arr in blocks:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_container(path):
    """Read back ``(header, {name: array})`` from :func:`write_container`."""
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"{path}: not a model container (bad magic)")
        (length,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(length).decode("utf-8"))
        blocks = {}
        for spec in header["blocks"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * 8)
            if len(raw) != count * 8:
                raise ValueError(f"{path}: truncated block {spec['name']!r}")
            blocks[spec["name"]] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
    return header, blocks


# ---------------------------------------------------------------------------
# embeddings

def save_embedding_model(path, model):
    if isinstance(model, CompositeKernelDiscriminant):
        header = {
            "kind": "embedding",
            "method": model.variant,
            "n_components": model.n_components,
            "k_nn": model.k_nn,
            "ridge": model.ridge_,
            "kernel_config": model.kernel_config_.to_dict(),
            "n_sources": len(model.train_features_),
        }
        blocks = [(f"train_features_{m}", feats)
                  for m, feats in enumerate(model.train_features_)]
        if model.variant == "cklfda_baseline":
            for m in range(len(model.train_features_)):
                blocks.append((f"standardize_mean_{m}", model.standardize_mean_[m]))
                blocks.append((f"standardize_std_{m}", model.standardize_std_[m]))
        blocks.append(("coefficients", model.coefficients_))
        blocks.append(("eigenvalues", model.eigenvalues_))
    elif isinstance(model, AngularDiscriminantAnalysis):
        header = {
            "kind": "embedding",
            "method": "lada" if model.local else "ada",
            "n_components": model.n_components,
            "k_nn": model.k_nn,
            "ridge": model.ridge_,
            "n_features": model.n_features_in_,
        }
        blocks = [("components", model.components_),
                  ("eigenvalues", model.eigenvalues_)]
    elif isinstance(model, StackedKernelPCA):
        header = {
            "kind": "embedding",
            "method": "kpca",
            "n_components": model.n_components,
            "ridge": 0.0,
            "kernel_config": {"kernels": [model.kernel_spec_.to_dict()],
                              "alphas": [1.0]},
            "gram_mean": model.gram_mean_,
        }
        blocks = [("train_features", model.train_features_),
                  ("standardize_mean", model.mean_),
                  ("standardize_std", model.std_),
                  ("gram_row_means", model.gram_row_means_),
                  ("coefficients", model.coefficients_),
                  ("eigenvalues", model.eigenvalues_)]
    else:
        raise TypeError(f"cannot persist {type(model).__name__}")
    write_container(path, header, blocks)


def load_embedding_model(path):
    header, blocks = read_container(path)
    if header.get("kind") != "embedding":
        raise ValueError(f"{path}: not an embedding model")
    method = header["method"]
    if method in ("ckada", "cklada", "cklfda_baseline"):
        config = KernelConfig.from_dict(header["kernel_config"])
        model = CompositeKernelDiscriminant(
            variant=method, n_components=header["n_components"],
            kernels=list(config.per_source), alphas=list(config.alphas),
            k_nn=header["k_nn"], ridge=header["ridge"])
        model.train_features_ = [blocks[f"train_features_{m}"]
                                 for m in range(header["n_sources"])]
        if method == "cklfda_baseline":
            model.standardize_mean_ = [blocks[f"standardize_mean_{m}"]
                                       for m in range(header["n_sources"])]
            model.standardize_std_ = [blocks[f"standardize_std_{m}"]
                                      for m in range(header["n_sources"])]
        model.alphas_ = config.alphas
        model.kernel_config_ = config
        model.coefficients_ = blocks["coefficients"]
        model.eigenvalues_ = blocks["eigenvalues"]
        model.ridge_ = header["ridge"]
        model.n_features_in_ = [f.shape[1] for f in model.train_features_]
        return model
    if method in ("ada", "lada"):
        model = AngularDiscriminantAnalysis(
            n_components=header["n_components"], local=(method == "lada"),
            k_nn=header["k_nn"], ridge=header["ridge"])
        model.components_ = blocks["components"]
        model.eigenvalues_ = blocks["eigenvalues"]
        model.ridge_ = header["ridge"]
        model.n_features_in_ = header["n_features"]
        return model
    if method == "kpca":
        spec = KernelSpec.from_dict(header["kernel_config"]["kernels"][0])
        model = StackedKernelPCA(n_components=header["n_components"], kernel=spec)
        model.kernel_spec_ = spec
        model.train_features_ = blocks["train_features"]
        model.mean_ = blocks["standardize_mean"]
        model.std_ = blocks["standardize_std"]
        model.gram_row_means_ = blocks["gram_row_means"]
        model.gram_mean_ = header["gram_mean"]
        model.coefficients_ = blocks["coefficients"]
        model.eigenvalues_ = blocks["eigenvalues"]
        model.n_features_in_ = model.train_features_.shape[1]
        return model
    raise ValueError(f"{path}: unknown embedding method {method!r}")


# ---------------------------------------------------------------------------
# classifiers

def save_classifier_model(path, model):
    if isinstance(model, KnnClassifier):
        header = {"kind": "classifier", "classifier": "knn", "k": model.k,
                  "n_classes": model.n_classes_}
        blocks = [("references", model.references_),
                  ("labels", model.labels_.astype(np.float64))]
    elif isinstance(model, GaussianMlClassifier):
        header = {"kind": "classifier", "classifier": "ml",
                  "shrinkage": model.shrinkage, "priors": model.priors,
                  "n_classes": model.n_classes_}
        blocks = [("means", model.means_), ("log_priors", model._log_priors)]
        for l in range(model.n_classes_):
            blocks.append((f"covariance_{l}", model.covariances_[l]))
    elif isinstance(model, SparseRepresentationClassifier):
        header = {"kind": "classifier", "classifier": "src",
                  "sparsity": model.sparsity, "tol": model.tol,
                  "n_classes": model.n_classes_}
        blocks = [("dictionary", model.dictionary_),
                  ("labels", model.labels_.astype(np.float64))]
    else:
        raise TypeError(f"cannot persist {type(model).__name__}")
    write_container(path, header, blocks)


def load_classifier_model(path):
    header, blocks = read_container(path)
    if header.get("kind") != "classifier":
        raise ValueError(f"{path}: not a classifier model")
    kind = header["classifier"]
    if kind == "knn":
        model = KnnClassifier(k=header["k"])
        model.references_ = blocks["references"]
        model.labels_ = blocks["labels"].astype(np.int64)
        model.n_classes_ = header["n_classes"]
        return model
    if kind == "ml":
        model = GaussianMlClassifier(shrinkage=header["shrinkage"],
                                     priors=header["priors"])
        c = header["n_classes"]
        model.means_ = blocks["means"]
        model._log_priors = blocks["log_priors"]
        model.covariances_ = np.stack([blocks[f"covariance_{l}"]
                                       for l in range(c)])
        model.n_classes_ = c
        import scipy.linalg
        model._cho_factors = [scipy.linalg.cho_factor(model.covariances_[l],
                                                      lower=True)
                              for l in range(c)]
        model._log_dets = np.array([2.0 * np.log(np.diag(f[0])).sum()
                                    for f in model._cho_factors])
        return model
    if kind == "src":
        model = SparseRepresentationClassifier(sparsity=header["sparsity"],
                                               tol=header["tol"])
        model.dictionary_ = blocks["dictionary"]
        model.labels_ = blocks["labels"].astype(np.int64)
        model.n_classes_ = header["n_classes"]
        return model
    raise ValueError(f"{path}: unknown classifier {kind!r}")
