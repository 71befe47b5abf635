"""Image similarity metrics and discrete L^p norms.

All metrics widen pixels to float64 before differencing, so 8-bit inputs can
never wrap around.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from nnkop.operators import Box

__all__ = [
    "SsimParams",
    "MetricsReport",
    "mse",
    "psnr",
    "ssim",
    "ssim_components",
    "lp_norm",
    "metrics_report",
    "format_psnr",
]


@dataclass(frozen=True)
class SsimParams:
    L: float = 255.0
    K1: float = 0.01
    K2: float = 0.03
    mode: str = "windowed"
    win_size: int = 11
    sigma: float = 1.5

    def __post_init__(self):
        if self.mode not in ("global", "windowed"):
            raise ValueError(f"ssim mode must be 'global' or 'windowed', got {self.mode!r}")
        if self.L <= 0 or self.K1 <= 0 or self.K2 <= 0:
            raise ValueError("SSIM constants must be positive")
        if self.win_size < 1 or self.win_size % 2 == 0:
            raise ValueError("window size must be odd")

    @property
    def C1(self) -> float:
        return (self.K1 * self.L) ** 2

    @property
    def C2(self) -> float:
        return (self.K2 * self.L) ** 2

    @property
    def C3(self) -> float:
        return self.C2 / 2.0

    def window(self) -> np.ndarray:
        """Normalized 1-d Gaussian taps; the 2-d window is their outer product."""
        r = self.win_size // 2
        x = np.arange(-r, r + 1, dtype=np.float64)
        g = np.exp(-(x * x) / (2.0 * self.sigma**2))
        return g / g.sum()


@dataclass(frozen=True)
class MetricsReport:
    mse: float
    psnr: float
    ssim: float
    ssim_mode: str = "windowed"


def _pair(A, B):
    a = np.asarray(A, dtype=np.float64)
    b = np.asarray(B, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def mse(A, B) -> float:
    a, b = _pair(A, B)
    d = a - b
    return float(np.mean(d * d))


def psnr(A, B, max_i: float = 255.0) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` for identical inputs."""
    e = mse(A, B)
    if e == 0.0:
        return math.inf
    return 20.0 * math.log10(max_i / math.sqrt(e))


def format_psnr(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.6g}"


def _global_stats(a, b):
    dof = a.size - 1
    if dof < 1:
        raise ValueError("global SSIM needs at least two pixels")
    mu_a, mu_b = float(a.mean()), float(b.mean())
    da, db = a - mu_a, b - mu_b
    var_a = float(np.sum(da * da)) / dof
    var_b = float(np.sum(db * db)) / dof
    cov = float(np.sum(da * db)) / dof
    return mu_a, mu_b, var_a, var_b, cov


def ssim_components(A, B, params: SsimParams | None = None) -> tuple:
    """Global luminance, contrast and structure terms ``(l, c, s)``.

    Variances and covariance use the ``1 / (N M - 1)`` normalization.
    """
    p = params or SsimParams(mode="global")
    mu_a, mu_b, var_a, var_b, cov = _global_stats(*_pair(A, B))
    sd_a, sd_b = math.sqrt(var_a), math.sqrt(var_b)
    lum = (2 * mu_a * mu_b + p.C1) / (mu_a**2 + mu_b**2 + p.C1)
    con = (2 * sd_a * sd_b + p.C2) / (var_a + var_b + p.C2)
    struct = (cov + p.C3) / (sd_a * sd_b + p.C3)
    return lum, con, struct


def _ssim_global(a, b, p: SsimParams) -> float:
    mu_a, mu_b, var_a, var_b, cov = _global_stats(a, b)
    lum = (2 * mu_a * mu_b + p.C1) / (mu_a**2 + mu_b**2 + p.C1)
    return lum * (2 * cov + p.C2) / (var_a + var_b + p.C2)


def _ssim_windowed(a, b, p: SsimParams) -> float:
    if min(a.shape) < p.win_size:
        raise ValueError(f"windowed SSIM needs both dimensions >= {p.win_size}, got {a.shape}")
    g = p.window()
    r = p.win_size // 2

    def filt(x):
        y = ndimage.correlate1d(x, g, axis=0, mode="reflect")
        y = ndimage.correlate1d(y, g, axis=1, mode="reflect")
        # keep only windows lying fully inside the image
        return y[r:-r or None, r:-r or None]

    mu_a, mu_b = filt(a), filt(b)
    var_a = filt(a * a) - mu_a * mu_a
    var_b = filt(b * b) - mu_b * mu_b
    cov = filt(a * b) - mu_a * mu_b
    num = (2 * mu_a * mu_b + p.C1) * (2 * cov + p.C2)
    den = (mu_a * mu_a + mu_b * mu_b + p.C1) * (var_a + var_b + p.C2)
    return float(np.mean(num / den))


def ssim(A, B, params: SsimParams | None = None) -> float:
    """Structural similarity, either global or mean over Gaussian windows."""
    p = params or SsimParams()
    a, b = _pair(A, B)
    if a.ndim != 2:
        raise ValueError("SSIM expects single-band images")
    if p.mode == "global":
        return _ssim_global(a, b, p)
    return _ssim_windowed(a, b, p)


def metrics_report(reference, candidate, ssim_mode: str = "windowed") -> MetricsReport:
    return MetricsReport(
        mse=mse(reference, candidate),
        psnr=psnr(reference, candidate),
        ssim=ssim(reference, candidate, SsimParams(mode=ssim_mode)),
        ssim_mode=ssim_mode,
    )


def lp_norm(values, p: float, box: Box | None = None) -> float:
    """Exact ``L^p`` norm of the step function with equal cells on `box`."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    v = np.abs(np.asarray(values, dtype=np.float64))
    box = box or Box.unit(v.ndim)
    if box.d != v.ndim:
        raise ValueError(f"{v.ndim}-d values on a {box.d}-d box")
    cell = box.volume / v.size
    if math.isinf(p):
        return float(v.max())
    return float((cell * np.sum(v**p)) ** (1.0 / p))
