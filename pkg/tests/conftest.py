import numpy as np
import pytest

from ckada.datasets import MultiSourceDataset, SynthSpec, synth_multisource


def unit_rows(x):
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def random_unit_rows(rng, n, d):
    return unit_rows(rng.normal(size=(n, d)))


def random_labels(rng, n, c):
    """Labels 1..c with every class present at least once."""
    y = np.concatenate([np.arange(1, c + 1),
                        rng.integers(1, c + 1, size=n - c)])
    return y[rng.permutation(n)]


def clustered_instance(rng, n, d, c, noise=0.3):
    """Unit-row matrix with c angular class clusters and its labels."""
    y = random_labels(rng, n, c)
    means = random_unit_rows(rng, c, d)
    x = unit_rows(means[y - 1] + noise * rng.normal(size=(n, d)))
    return x, y


@pytest.fixture
def small_synth():
    spec = SynthSpec(classes=3, per_class=20, dims=(6, 4),
                     separation=np.radians(40), jitter=np.radians(6),
                     scale_range=(0.5, 2.0))
    return synth_multisource(spec, seed=123)


def make_dataset(rng, n_per_class, c, dims):
    sources = []
    y = np.repeat(np.arange(1, c + 1), n_per_class)
    for d in dims:
        means = random_unit_rows(rng, c, d)
        x = unit_rows(means[y - 1] + 0.3 * rng.normal(size=(len(y), d)))
        sources.append(x * rng.uniform(0.5, 2.0, size=(len(y), 1)))
    return MultiSourceDataset(sources=sources, labels=y)
