"""Image modeling and rescaling with the bivariate Kantorovich operator.

An ``M x N`` grayscale image is read as the step function that takes the
value ``a[i, j]`` on the unit cell ``(i-1, i] x (j-1, j]`` of ``[0, M] x [0, N]``.
Modeling evaluates the operator at the pixel centers; rescaling by ``S``
evaluates it at the centers of the refined ``(M S) x (N S)`` pixel lattice.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from nnkop.operators import (
    Box,
    OperatorConfig,
    StepFunction,
    kantorovich_apply,
    mean_value_grid,
)
from nnkop.sigmoid import DensityKernel

__all__ = [
    "ImageFunction",
    "as_image",
    "image_to_function",
    "image_mean_grid",
    "model_image",
    "rescale_image",
    "quantize",
    "sar_to_gray",
    "target_shape",
    "DB_WINDOW",
]

DB_WINDOW = 60.0


def as_image(buffer) -> np.ndarray:
    """Validate and return `buffer` as a 2-d (or banded 3-d) uint8 array."""
    arr = np.asarray(buffer)
    if arr.ndim not in (2, 3) or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected an M x N (x bands) image, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if not np.all(np.isfinite(arr)) or arr.min() < 0 or arr.max() > 255 or np.any(arr != np.round(arr)):
            raise ValueError("pixel values must be integers in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


class ImageFunction(StepFunction):
    """The step function of a single-band image on ``[0, M] x [0, N]``."""

    def __init__(self, buffer):
        img = as_image(buffer)
        if img.ndim != 2:
            raise ValueError("image functions are single-band; split bands first")
        self.image = img
        m, n = img.shape
        super().__init__([np.arange(m + 1.0), np.arange(n + 1.0)], img.astype(np.float64))

    def __call__(self, x, y=None):
        if y is not None:
            pts = np.stack(np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float)), axis=-1)
        else:
            pts = x
        return super().__call__(pts)


def image_to_function(buffer) -> ImageFunction:
    return ImageFunction(buffer)


def image_mean_grid(buffer, n: int):
    f = ImageFunction(buffer)
    return mean_value_grid(f, f.box, n)


def quantize(m) -> np.ndarray:
    """Clamp to [0, 255] and round half away from zero."""
    m = np.asarray(m, dtype=np.float64)
    if not np.all(np.isfinite(m)):
        raise ValueError("cannot quantize non-finite values")
    c = np.clip(m, 0.0, 255.0)
    return np.floor(c + 0.5).astype(np.uint8)


def _as_scale(S) -> Fraction:
    if isinstance(S, float):
        S = Fraction(repr(S))
    S = Fraction(S)
    if S <= 0:
        raise ValueError(f"scale must be positive, got {S}")
    return S


def target_shape(shape, S) -> tuple:
    S = _as_scale(S)
    out = []
    for m in shape[:2]:
        t = m * S
        if t.denominator != 1:
            raise ValueError(f"{m} * {S} is not an integer; choose a scale giving integral dimensions")
        out.append(int(t))
    return tuple(out)


def _lattice(m: int, S: float) -> np.ndarray:
    return (np.arange(1, m + 1, dtype=np.float64) - 0.5) / S


def _per_band(fn, buffer, *args):
    img = as_image(buffer)
    if img.ndim == 2:
        return fn(img, *args)
    results = [fn(img[:, :, c], *args) for c in range(img.shape[2])]
    return (
        np.stack([r[0] for r in results], axis=-1),
        np.stack([r[1] for r in results], axis=-1),
    )


def _rescale_band(img, S, n, kernel):
    S = _as_scale(S)
    mo, no = target_shape(img.shape, S)
    grid = image_mean_grid(img, n)
    config = OperatorConfig(n, kernel)
    s = float(S)
    values = kantorovich_apply(config, grid, [_lattice(mo, s), _lattice(no, s)])
    return quantize(values), values


def model_image(buffer, n: int, kernel: DensityKernel | None = None):
    """Model an image with the operator evaluated at its own pixel centers.

    Returns ``(quantized image, unquantized float matrix)`` of the input size.
    """
    return _per_band(_rescale_band, buffer, 1, n, kernel or DensityKernel())


def rescale_image(buffer, S, n: int, kernel: DensityKernel | None = None):
    """Resample an ``M x N`` image to ``(M S) x (N S)``.

    The mean-value grid is the one used for modeling; only the evaluation
    lattice ``((i - 1/2) / S, (j - 1/2) / S)`` is refined, so ``S = 1``
    reproduces :func:`model_image` exactly.
    """
    return _per_band(_rescale_band, buffer, S, n, kernel or DensityKernel())


def sar_to_gray(m, window: float = DB_WINDOW) -> np.ndarray:
    """Map linear backscatter to 8-bit gray through a dB display window.

    ``10 log10`` of each value, clamped to ``[top - window, top]`` where ``top``
    is the largest dB value, then stretched to [0, 255].  Nonpositive and
    non-finite inputs land on the lower clamp.
    """
    if window <= 0:
        raise ValueError(f"dB window must be positive, got {window}")
    m = np.asarray(m, dtype=np.float64)
    valid = np.isfinite(m) & (m > 0)
    if not np.any(valid):
        raise ValueError("no positive backscatter values to convert")
    db = np.full(m.shape, -np.inf)
    db[valid] = 10.0 * np.log10(m[valid])
    top = db[valid & np.isfinite(db)].max()
    bottom = top - window
    db = np.clip(db, bottom, top)
    return quantize((db - bottom) / window * 255.0)
