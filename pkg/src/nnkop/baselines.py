"""Classical resampling used for comparison: nearest-neighbor downscaling,
bilinear and bicubic upscaling.

Upscalers use center-aligned coordinates ``src = (dst + 1/2) / S - 1/2`` and
replicate edge pixels.  Both are separable: each axis contributes a sparse
weight matrix and the image is resampled as ``Wr @ A @ Wc.T``.
"""
import numpy as np

from nnkop.imaging import as_image, quantize, target_shape

__all__ = [
    "downscale_nearest",
    "resize_bilinear",
    "resize_bicubic",
    "cubic_kernel",
    "bilinear_weights",
    "bicubic_weights",
    "CUBIC_A",
]

CUBIC_A = -0.5


def downscale_nearest(buffer, factor: int) -> np.ndarray:
    """Keep one pixel per ``factor x factor`` block, the one nearest its center.

    Block ``(i, j)`` is represented by source pixel
    ``(i * factor + factor // 2, j * factor + factor // 2)`` (0-based).
    """
    img = as_image(buffer)
    if int(factor) != factor or factor < 1:
        raise ValueError(f"factor must be a positive integer, got {factor}")
    factor = int(factor)
    m, n = img.shape[:2]
    if m % factor or n % factor:
        raise ValueError(f"factor {factor} does not divide image dimensions {m} x {n}")
    off = factor // 2
    return img[off::factor, off::factor].copy()


def cubic_kernel(x, a: float = CUBIC_A):
    """Keys cubic-convolution kernel."""
    x = np.abs(np.asarray(x, dtype=np.float64))
    x2 = x * x
    x3 = x2 * x
    near = (a + 2.0) * x3 - (a + 3.0) * x2 + 1.0
    far = a * x3 - 5.0 * a * x2 + 8.0 * a * x - 4.0 * a
    return np.where(x <= 1.0, near, np.where(x < 2.0, far, 0.0))


def _src_coords(size_in: int, size_out: int) -> np.ndarray:
    s = size_out / size_in
    return (np.arange(size_out) + 0.5) / s - 0.5


def bilinear_weights(size_in: int, size_out: int) -> np.ndarray:
    src = np.clip(_src_coords(size_in, size_out), 0.0, size_in - 1)
    i0 = np.floor(src).astype(int)
    i1 = np.minimum(i0 + 1, size_in - 1)
    t = src - i0
    W = np.zeros((size_out, size_in))
    rows = np.arange(size_out)
    np.add.at(W, (rows, i0), 1.0 - t)
    np.add.at(W, (rows, i1), t)
    return W


def bicubic_weights(size_in: int, size_out: int, a: float = CUBIC_A) -> np.ndarray:
    src = _src_coords(size_in, size_out)
    base = np.floor(src).astype(int)
    W = np.zeros((size_out, size_in))
    rows = np.arange(size_out)
    for tap in range(-1, 3):
        idx = base + tap
        w = cubic_kernel(src - idx, a)
        np.add.at(W, (rows, np.clip(idx, 0, size_in - 1)), w)
    return W


def _resize(buffer, S, weights):
    img = as_image(buffer)
    mo, no = target_shape(img.shape, S)
    m, n = img.shape[:2]
    Wr, Wc = weights(m, mo), weights(n, no)
    bands = img[:, :, None] if img.ndim == 2 else img
    out = np.stack(
        [quantize(Wr @ bands[:, :, c].astype(np.float64) @ Wc.T) for c in range(bands.shape[2])],
        axis=-1,
    )
    return out[:, :, 0] if img.ndim == 2 else out


def resize_bilinear(buffer, S) -> np.ndarray:
    return _resize(buffer, S, bilinear_weights)


def resize_bicubic(buffer, S) -> np.ndarray:
    return _resize(buffer, S, bicubic_weights)
