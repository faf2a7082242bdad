"""Multi-source sample sets: loading, validation, splitting, synthesis.

All random generation uses numpy's PCG64 generator seeded through
``numpy.random.SeedSequence``; synthetic datasets spawn one child
sequence per source and, inside each source, one per class, so streams
are splittable and reproducible across platforms.
"""

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import (
    EmptyClassError,
    EmptyCloudError,
    InfeasibleSeparationError,
    InsufficientClassError,
    ParseError,
    RaggedRowsError,
    SampleCountMismatchError,
    ZeroSampleError,
)
from .validation import as_float_matrix, check_labels

NORM_FLOOR = 1e-12
#: numerical slack allowed when checking direction-placement feasibility
ANGLE_TOL = 1e-9


# ---------------------------------------------------------------------------
# containers

@dataclass
class MultiSourceDataset:
    """Aligned per-source feature matrices sharing one label vector.

    sources[m] has shape (n_samples, d_m); labels take every value in
    1..n_classes at least once. ``label_mapping`` records how original
    file labels were remapped to the contiguous range.
    """

    sources: list
    labels: np.ndarray
    source_ids: list = None
    class_names: list = None
    label_mapping: dict = None

    def __post_init__(self):
        self.sources = [as_float_matrix(s, f"source {m}")
                        for m, s in enumerate(self.sources)]
        n = len(self.sources[0])
        for m, s in enumerate(self.sources):
            if len(s) != n:
                sid = self.source_ids[m] if self.source_ids else str(m)
                raise SampleCountMismatchError(sid, n, len(s))
        self.labels, self._n_classes = check_labels(self.labels, n_samples=n)
        if self.source_ids is None:
            self.source_ids = [f"source_{m}" for m in range(len(self.sources))]

    @property
    def n_samples(self):
        return len(self.labels)

    @property
    def n_sources(self):
        return len(self.sources)

    @property
    def n_classes(self):
        return self._n_classes

    def class_counts(self):
        return np.bincount(self.labels, minlength=self.n_classes + 1)[1:]

    def subset(self, indices):
        indices = np.asarray(indices)
        return MultiSourceDataset(
            sources=[s[indices] for s in self.sources],
            labels=self.labels[indices],
            source_ids=list(self.source_ids),
            class_names=self.class_names,
            label_mapping=self.label_mapping,
        )


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a synthetic multi-source angular dataset.

    Class mean directions are placed so the smallest pairwise angle is
    the requested separation (0 means all classes share one direction).
    A sample is its class direction rotated in a random in-sphere plane
    by an angle drawn uniformly from [0, jitter), then multiplied by a
    scale drawn log-uniformly from ``scale_range``.
    """

    classes: int
    per_class: int
    dims: tuple
    separation: float = 0.0
    jitter: float = 0.0
    scale_range: tuple = (1.0, 1.0)
    source_ids: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in np.atleast_1d(self.dims)))
        if self.classes < 1:
            raise ValueError("classes must be >= 1")
        if self.per_class < 1:
            raise ValueError("per_class must be >= 1")
        if any(d < 1 for d in self.dims):
            raise ValueError("dims must be >= 1")
        if self.separation < 0:
            raise ValueError("separation must be >= 0")
        if self.jitter < 0:
            raise ValueError("jitter must be >= 0")
        lo, hi = self.scale_range
        if not (lo > 0 and hi > 0):
            raise ValueError("scale_range bounds must be positive")
        if lo > hi:
            raise ValueError("scale_range must be (low, high) with low <= high")
        if self.source_ids is not None:
            ids = tuple(self.source_ids)
            if len(ids) != len(self.dims):
                raise ValueError("source_ids length must match dims")
            object.__setattr__(self, "source_ids", ids)

    @property
    def n_sources(self):
        return len(self.dims)

    def to_dict(self):
        d = {
            "classes": self.classes,
            "per_class": self.per_class,
            "dims": list(self.dims),
            "separation_rad": self.separation,
            "jitter_rad": self.jitter,
            "scale_range": list(self.scale_range),
        }
        if self.source_ids is not None:
            d["source_ids"] = list(self.source_ids)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            classes=d["classes"],
            per_class=d["per_class"],
            dims=tuple(d["dims"]),
            separation=d.get("separation_rad", 0.0),
            jitter=d.get("jitter_rad", 0.0),
            scale_range=tuple(d.get("scale_range", (1.0, 1.0))),
            source_ids=tuple(d["source_ids"]) if "source_ids" in d else None,
        )


@dataclass(frozen=True)
class PseudoWaveform:
    """Rasterized point cloud: one elevation-bin vector per occupied cell.

    ``cell_ids`` gives each raster row's linear cell index in row-major
    order over ``grid_dims``; ``counts`` holds per-bin point counts.
    """

    raster: np.ndarray      # (n_occupied, n_bins) mean intensity per bin
    grid_dims: tuple        # (rows, cols)
    cell_ids: np.ndarray    # (n_occupied,), row-major linear indices
    counts: np.ndarray      # (n_occupied, n_bins) in-range point counts


# ---------------------------------------------------------------------------
# normalization

def unit_normalize(m):
    """Scale every sample row to unit Euclidean norm.

    Raises ZeroSampleError for the first row whose norm falls below
    1e-12; angular methods are undefined there, so this is a hard error
    rather than a silent drop.
    """
    m = as_float_matrix(m, "m")
    norms = np.linalg.norm(m, axis=1)
    bad = np.where(norms < NORM_FLOOR)[0]
    if len(bad):
        raise ZeroSampleError(int(bad[0]))
    return m / norms[:, None]


def normalize_sources(ds: MultiSourceDataset):
    """Unit-normalized view of every source matrix."""
    return [unit_normalize(s) for s in ds.sources]


# ---------------------------------------------------------------------------
# CSV / manifest loading

def _parse_csv_rows(path, header):
    rows = []
    expected = None
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and row[0].strip() == ""):
                continue
            if header and lineno == 1:
                continue
            if expected is None:
                expected = len(row)
            elif len(row) != expected:
                raise RaggedRowsError(lineno)
            rows.append((lineno, row))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return rows


def load_source_csv(path, header=False):
    """Load one comma-separated feature matrix (optional single header line)."""
    rows = _parse_csv_rows(path, header)
    out = np.empty((len(rows), len(rows[0][1])))
    for i, (lineno, row) in enumerate(rows):
        for j, cell in enumerate(row):
            try:
                out[i, j] = float(cell)
            except ValueError:
                raise ParseError(lineno, j + 1, f"cannot parse {cell.strip()!r}") from None
    return out


def load_labels_csv(path):
    """Load integer labels, one per line."""
    rows = _parse_csv_rows(path, header=False)
    labels = np.empty(len(rows), dtype=np.int64)
    for i, (lineno, row) in enumerate(rows):
        if len(row) != 1:
            raise RaggedRowsError(lineno)
        try:
            labels[i] = int(row[0])
        except ValueError:
            raise ParseError(lineno, 1, f"cannot parse {row[0].strip()!r} as integer") from None
    return labels


def remap_labels(labels):
    """Map arbitrary integer labels onto contiguous 1..c (ascending order).

    Returns ``(remapped, mapping)`` where mapping is original -> new.
    """
    labels = np.asarray(labels, dtype=np.int64)
    uniq = np.unique(labels)
    mapping = {int(orig): new for new, orig in enumerate(uniq, start=1)}
    remapped = np.searchsorted(uniq, labels) + 1
    return remapped.astype(np.int64), mapping


DEFAULT_WAVEFORM_BINS = 16


def _load_waveform_source(base, entry):
    pts = load_point_cloud_csv(base / entry["point_cloud"],
                               header=entry.get("header", False))
    z_min = entry.get("z_min", float(pts[:, 2].min()))
    z_max = entry.get("z_max")
    if z_max is None:
        # half-open bins would drop the exact maximum; nudge past it
        top = float(pts[:, 2].max())
        z_max = top + max(1e-9, 1e-12 * abs(top))
    pw = build_pseudo_waveform(pts, cell_size=entry["cell_size"],
                               z_min=z_min, z_max=z_max,
                               n_bins=entry.get("n_bins", DEFAULT_WAVEFORM_BINS))
    return pw.raster


def load_sources(path):
    """Load just the feature matrices of a manifest (labels not required).

    Each source entry either points at a CSV matrix (``path``) or at a
    LiDAR point cloud (``point_cloud`` plus ``cell_size`` and optional
    ``z_min``/``z_max``/``n_bins``), which is rasterized into per-cell
    pseudo-waveforms on load. Paths resolve relative to the manifest's
    directory.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    base = path.parent
    sources, ids = [], []
    for entry in doc["sources"]:
        if "point_cloud" in entry:
            mat = _load_waveform_source(base, entry)
        else:
            mat = load_source_csv(base / entry["path"],
                                  header=entry.get("header", False))
        sources.append(mat)
        ids.append(entry["id"])
    return sources, ids


def load_manifest(path) -> MultiSourceDataset:
    """Load a JSON manifest into an aligned multi-source dataset.

    The manifest lists per-source CSV paths plus one label CSV; labels
    are remapped to contiguous 1..c with the mapping recorded on the
    dataset. Optional ``names`` must name each of the c classes.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    sources, ids = load_sources(path)
    n = len(sources[0])
    for sid, mat in zip(ids, sources):
        if len(mat) != n:
            raise SampleCountMismatchError(sid, n, len(mat))
    labels_raw = load_labels_csv(path.parent / doc["labels"])
    if len(labels_raw) != n:
        raise SampleCountMismatchError("labels", n, len(labels_raw))
    labels, mapping = remap_labels(labels_raw)
    c = int(labels.max())
    names = doc.get("names")
    if names is not None:
        if len(names) > c:
            raise EmptyClassError(names[c])
        if len(names) < c:
            raise ValueError(f"manifest names {len(names)} classes, data has {c}")
    return MultiSourceDataset(sources=sources, labels=labels, source_ids=ids,
                              class_names=names, label_mapping=mapping)


def save_manifest(out_dir, ds: MultiSourceDataset, name="manifest.json"):
    """Write a dataset as per-source CSVs + labels CSV + manifest JSON."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for sid, mat in zip(ds.source_ids, ds.sources):
        fname = f"src_{sid}.csv"
        np.savetxt(out_dir / fname, mat, fmt="%.17g", delimiter=",")
        entries.append({"id": sid, "path": fname})
    np.savetxt(out_dir / "labels.csv", ds.labels, fmt="%d")
    doc = {"sources": entries, "labels": "labels.csv"}
    if ds.class_names:
        doc["names"] = list(ds.class_names)
    manifest_path = out_dir / name
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest_path


# ---------------------------------------------------------------------------
# splitting

def stratified_split(ds: MultiSourceDataset, n_train_per_class, seed):
    """Draw exactly n_train_per_class training samples from every class.

    The complement forms the test set. Classes are processed in
    ascending label order with one PCG64 stream, so a fixed seed gives
    identical index sets. Each class must have strictly more samples
    than requested (the test side may not be empty).
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    train_idx, test_idx = [], []
    for l in range(1, ds.n_classes + 1):
        idx = np.where(ds.labels == l)[0]
        if len(idx) <= n_train_per_class:
            raise InsufficientClassError(l, len(idx), n_train_per_class)
        perm = rng.permutation(idx)
        train_idx.extend(sorted(perm[:n_train_per_class].tolist()))
        test_idx.extend(sorted(perm[n_train_per_class:].tolist()))
    return ds.subset(np.array(train_idx)), ds.subset(np.array(test_idx))


# ---------------------------------------------------------------------------
# synthetic data

def _slerp(a, b, t, fallback_perp=None):
    """Spherical interpolation from unit vector a toward b."""
    dot = float(np.clip(a @ b, -1.0, 1.0))
    omega = np.arccos(dot)
    if omega < 1e-14:
        return a.copy()
    if np.pi - omega < 1e-14:
        # antipodal: rotate through a fixed perpendicular direction
        w = fallback_perp
        return np.cos(t * np.pi) * a + np.sin(t * np.pi) * w
    return (np.sin((1.0 - t) * omega) * a + np.sin(t * omega) * b) / np.sin(omega)


def _perp_direction(u, candidates):
    for cand in candidates:
        w = cand - (cand @ u) * u
        norm = np.linalg.norm(w)
        if norm > 1e-8:
            return w / norm
    raise RuntimeError("no perpendicular direction found")


def _spread_directions(c, d, rng):
    """Maximally spread base arrangement of c unit directions in R^d.

    Returns (directions, min_pairwise_angle). Constructions: equal
    spacing on the circle for d=2, regular simplex for c <= d+1,
    +/- orthonormal axes for c <= 2d, and a repulsion descent otherwise
    (that last regime is a conservative feasibility bound).
    """
    if c == 1:
        v = rng.normal(size=d)
        return (v / np.linalg.norm(v))[None, :], np.pi
    if d == 1:
        dirs = np.array([[1.0] if k % 2 == 0 else [-1.0] for k in range(c)])
        ang = np.pi if c == 2 else 0.0
        return dirs, ang
    if d == 2:
        theta = 2.0 * np.pi * np.arange(c) / c
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        ang = np.pi if c == 2 else 2.0 * np.pi / c
        return dirs, ang
    if c <= d + 1:
        # regular simplex vertices, expressed in their (c-1)-dim span
        eye = np.eye(c)
        centered = eye - eye.mean(axis=0)
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        coords = centered @ vt[:c - 1].T
        coords /= np.linalg.norm(coords, axis=1, keepdims=True)
        dirs = np.zeros((c, d))
        dirs[:, :c - 1] = coords
        return dirs, float(np.arccos(max(-1.0, -1.0 / (c - 1))))
    if c <= 2 * d:
        dirs = np.zeros((c, d))
        for k in range(c):
            axis = k // 2
            dirs[k, axis] = 1.0 if k % 2 == 0 else -1.0
        return dirs, np.pi / 2.0
    return _repulsion_spread(c, d, rng)


def _min_pairwise_angle(dirs):
    dots = np.clip(dirs @ dirs.T, -1.0, 1.0)
    iu = np.triu_indices(len(dirs), 1)
    return float(np.arccos(dots[iu]).min())


def _repulsion_spread(c, d, rng, iters=500, step=0.1, beta=50.0):
    u = rng.normal(size=(c, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    for _ in range(iters):
        dots = u @ u.T
        np.fill_diagonal(dots, -np.inf)
        w = np.exp(beta * (dots - dots.max()))
        np.fill_diagonal(w, 0.0)
        grad = w @ u
        u = u - step * grad
        u /= np.linalg.norm(u, axis=1, keepdims=True)
    return u, _min_pairwise_angle(u)


def _place_directions(c, d, separation, rng):
    """Class mean directions with minimum pairwise angle >= separation.

    The maximally spread arrangement is shrunk toward its first
    direction by spherical interpolation until the minimum pairwise
    angle lands at the requested separation (so separation 0 collapses
    every class onto one direction). Feasibility carries a 1e-9 slack.
    """
    base, max_angle = _spread_directions(c, d, rng)
    if c > 1 and separation > max_angle + ANGLE_TOL:
        raise InfeasibleSeparationError(
            f"cannot place {c} directions in dimension {d} with pairwise "
            f"separation {separation:.6g} rad (max achievable "
            f"{max_angle:.6g} rad)")
    rot = np.linalg.qr(rng.normal(size=(d, d)))[0] if d > 1 else np.ones((1, 1))
    base = base @ rot
    if c == 1 or d == 1 or separation <= 0.0:
        if separation <= 0.0 and d > 1:
            return np.tile(base[0], (c, 1))
        return base
    hub = base[0]
    perp = _perp_direction(hub, list(base[1:]) + list(np.eye(d)))

    def arrangement(t):
        return np.array([_slerp(hub, b, t, fallback_perp=perp) for b in base])

    if _min_pairwise_angle(arrangement(1.0)) < separation:
        # feasibility slack case: base arrangement is as good as it gets
        return arrangement(1.0)
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _min_pairwise_angle(arrangement(mid)) >= separation:
            hi = mid
        else:
            lo = mid
    return arrangement(hi)


def synth_multisource(spec: SynthSpec, seed) -> MultiSourceDataset:
    """Generate a labeled multi-source dataset per ``spec``.

    Stream layout: SeedSequence(seed) spawns one child per source; each
    source child spawns one placement stream plus one stream per class.
    Identical seeds therefore reproduce the dataset bitwise.
    """
    root = np.random.SeedSequence(seed)
    source_seqs = root.spawn(spec.n_sources)
    c, per_class = spec.classes, spec.per_class
    lo, hi = spec.scale_range
    log_lo, log_hi = np.log(lo), np.log(hi)
    sources = []
    for m, d in enumerate(spec.dims):
        subs = source_seqs[m].spawn(1 + c)
        placement_rng = np.random.default_rng(subs[0])
        dirs = _place_directions(c, d, spec.separation, placement_rng)
        rows = np.empty((c * per_class, d))
        for l in range(c):
            class_rng = np.random.default_rng(subs[1 + l])
            mu = dirs[l]
            for i in range(per_class):
                if d > 1:
                    g = class_rng.normal(size=d)
                    w = g - (g @ mu) * mu
                    norm = np.linalg.norm(w)
                    w = w / norm if norm > 1e-12 else mu
                    phi = class_rng.uniform(0.0, spec.jitter) if spec.jitter > 0 else 0.0
                    x = np.cos(phi) * mu + np.sin(phi) * w
                else:
                    x = mu.copy()
                scale = np.exp(class_rng.uniform(log_lo, log_hi)) if log_hi > log_lo else lo
                rows[l * per_class + i] = scale * x
        sources.append(rows)
    labels = np.repeat(np.arange(1, c + 1), per_class)
    ids = list(spec.source_ids) if spec.source_ids else None
    return MultiSourceDataset(sources=sources, labels=labels, source_ids=ids)


# ---------------------------------------------------------------------------
# LiDAR pseudo-waveforms

def load_point_cloud_csv(path, header=False):
    """Load an x,y,z,intensity point cloud; intensities must be >= 0."""
    pts = load_source_csv(path, header=header)
    if pts.shape[1] != 4:
        raise ValueError(f"point cloud needs 4 columns (x,y,z,intensity), got {pts.shape[1]}")
    if (pts[:, 3] < 0).any():
        raise ValueError("point intensities must be >= 0")
    return pts


def build_pseudo_waveform(points, cell_size, z_min, z_max, n_bins) -> PseudoWaveform:
    """Rasterize a point cloud into per-cell elevation-binned intensity means.

    Cells tile the x/y extent of the cloud at ``cell_size``; elevations
    are quantized into ``n_bins`` uniform half-open bins
    [z_min + k*dz, z_min + (k+1)*dz). Points with z outside
    [z_min, z_max) are dropped, not clamped. Each occupied cell yields
    one vector of per-bin mean intensities (empty bins stay 0).
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 4:
        raise ValueError("points must have shape (n, 4)")
    if len(points) == 0:
        raise EmptyCloudError("point cloud is empty")
    if not np.isfinite(points).all():
        raise ValueError("point cloud contains non-finite values")
    if (points[:, 3] < 0).any():
        raise ValueError("point intensities must be >= 0")
    if not z_max > z_min:
        raise ValueError("z_max must exceed z_min")
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    if not cell_size > 0:
        raise ValueError("cell_size must be positive")

    x, y, z, intensity = points.T
    col = np.floor((x - x.min()) / cell_size).astype(np.int64)
    row = np.floor((y - y.min()) / cell_size).astype(np.int64)
    n_rows = int(row.max()) + 1
    n_cols = int(col.max()) + 1

    in_range = (z >= z_min) & (z < z_max)
    dz = (z_max - z_min) / n_bins
    zbin = np.floor((z[in_range] - z_min) / dz).astype(np.int64)
    zbin = np.minimum(zbin, n_bins - 1)
    cell = row[in_range] * n_cols + col[in_range]

    occupied = np.unique(cell)
    cell_pos = {int(cid): i for i, cid in enumerate(occupied)}
    sums = np.zeros((len(occupied), n_bins))
    counts = np.zeros((len(occupied), n_bins))
    for cid, b, w in zip(cell, zbin, intensity[in_range]):
        i = cell_pos[int(cid)]
        sums[i, b] += w
        counts[i, b] += 1.0
    raster = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    return PseudoWaveform(raster=raster, grid_dims=(n_rows, n_cols),
                          cell_ids=occupied, counts=counts)
