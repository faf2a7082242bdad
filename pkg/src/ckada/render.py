"""False-color rendering of embedding coordinates to binary PPM (P6)."""

import numpy as np

from .exceptions import ShapeMismatchError


def percentile_stretch(values, low, high):
    """Map the [low, high] percentiles of ``values`` onto 0..255 bytes.

    Values outside the stretch window clip to 0/255; a constant channel
    renders as mid-gray 128.
    """
    values = np.asarray(values, dtype=np.float64)
    if not 0 <= low < high <= 100:
        raise ValueError("stretch bounds must satisfy 0 <= low < high <= 100")
    lo, hi = np.percentile(values, [low, high])
    if hi - lo < 1e-300:
        return np.full(values.shape, 128, dtype=np.uint8)
    scaled = np.clip((values - lo) / (hi - lo), 0.0, 1.0)
    return np.rint(scaled * 255.0).astype(np.uint8)


def render_false_color(coords, grid_dims, channels=(0, 1, 2), stretch=(2.0, 98.0)):
    """Compose three embedding dimensions into P6 PPM bytes.

    ``coords`` has shape (n_dims, n_samples) with samples covering the
    rows x cols grid in row-major order; each selected channel is
    percentile-stretched independently.
    """
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2:
        raise ShapeMismatchError("coords must be 2-D (n_dims, n_samples)")
    rows, cols = grid_dims
    if coords.shape[1] != rows * cols:
        raise ShapeMismatchError(
            f"{coords.shape[1]} samples cannot fill a {rows}x{cols} grid")
    if len(channels) != 3:
        raise ValueError("exactly 3 channel indices required")
    if max(channels) >= coords.shape[0]:
        raise ShapeMismatchError(
            f"channel {max(channels)} out of range for {coords.shape[0]} dims")
    low, high = stretch
    image = np.empty((rows, cols, 3), dtype=np.uint8)
    for band, ch in enumerate(channels):
        image[:, :, band] = percentile_stretch(coords[ch], low, high).reshape(rows, cols)
    header = f"P6\n{cols} {rows}\n255\n".encode("ascii")
    return header + image.tobytes()


def write_ppm(path, ppm_bytes):
    with open(path, "wb") as fh:
        fh.write(ppm_bytes)
