"""Composite-kernel angular discriminant analysis for multi-source fusion.

Fit/transform estimators project aligned multi-source feature sets into
one discriminative low-dimensional subspace where classes separate in an
angular sense; classifiers, model selection, synthetic data, and a
benchmark CLI round out the toolkit.
"""

from .classifiers import (
    GaussianMlClassifier,
    KnnClassifier,
    SparseRepresentationClassifier,
    make_classifier,
    omp,
)
from .datasets import (
    MultiSourceDataset,
    PseudoWaveform,
    SynthSpec,
    build_pseudo_waveform,
    load_manifest,
    load_point_cloud_csv,
    load_source_csv,
    normalize_sources,
    save_manifest,
    stratified_split,
    synth_multisource,
    unit_normalize,
)
from .eigensolver import EigenResult, gsep_smallest, gsep_with_policy
from .embeddings import (
    AngularDiscriminantAnalysis,
    CompositeKernelDiscriminant,
    StackedKernelPCA,
    make_embedding,
)
from .kernels import (
    GramMatrix,
    KernelConfig,
    KernelSpec,
    composite_gram,
    gram,
    median_heuristic_sigma,
)
from .model_io import (
    load_classifier_model,
    load_embedding_model,
    save_classifier_model,
    save_embedding_model,
)
from .model_selection import (
    GridSpec,
    Metrics,
    evaluate,
    grid_search,
    kfold_stratified,
)
from .scatter import (
    OuterProductPair,
    WeightPair,
    ada_weights,
    angular_affinity,
    euclidean_affinity,
    lada_weights,
    lfda_baseline_weights,
    outer_products_direct,
)

__version__ = "0.1.0"

__all__ = [
    "AngularDiscriminantAnalysis",
    "CompositeKernelDiscriminant",
    "EigenResult",
    "GaussianMlClassifier",
    "GramMatrix",
    "GridSpec",
    "KernelConfig",
    "KernelSpec",
    "KnnClassifier",
    "Metrics",
    "MultiSourceDataset",
    "OuterProductPair",
    "PseudoWaveform",
    "SparseRepresentationClassifier",
    "StackedKernelPCA",
    "SynthSpec",
    "WeightPair",
    "ada_weights",
    "angular_affinity",
    "build_pseudo_waveform",
    "composite_gram",
    "euclidean_affinity",
    "evaluate",
    "gram",
    "grid_search",
    "gsep_smallest",
    "gsep_with_policy",
    "kfold_stratified",
    "lada_weights",
    "lfda_baseline_weights",
    "load_classifier_model",
    "load_embedding_model",
    "load_manifest",
    "load_point_cloud_csv",
    "load_source_csv",
    "make_classifier",
    "make_embedding",
    "median_heuristic_sigma",
    "normalize_sources",
    "omp",
    "outer_products_direct",
    "save_classifier_model",
    "save_embedding_model",
    "save_manifest",
    "stratified_split",
    "synth_multisource",
    "unit_normalize",
]
