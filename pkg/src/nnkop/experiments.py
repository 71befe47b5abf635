"""Numerical experiments: convergence rates, operator-norm bounds and the
down/up-scaling benchmark against bilinear and bicubic resampling.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from nnkop.baselines import downscale_nearest, resize_bicubic, resize_bilinear
from nnkop.imaging import rescale_image, sar_to_gray, DB_WINDOW
from nnkop.metrics import MetricsReport, format_psnr, metrics_report
from nnkop.operators import (
    Box,
    OperatorConfig,
    StepFunction,
    kantorovich_apply,
    mean_value_grid,
)
from nnkop.sigmoid import DensityKernel

__all__ = [
    "ConvergenceRecord",
    "ConvergenceStudy",
    "BenchmarkRow",
    "modulus_estimate",
    "convergence_study",
    "empirical_order",
    "operator_norm_check",
    "rescale_benchmark",
    "speckle_image",
    "pipeline_trend",
    "rows_to_csv",
    "CSV_HEADER",
    "BENCH_N_VALUES",
]

BENCH_N_VALUES = (5, 10, 15, 20, 25, 30)
CSV_HEADER = ("method", "n", "psnr_db", "ssim", "mse", "seconds")

# lattice refinement relative to 1/n_max, and interior margin in units of 1/n_min
LATTICE_REFINE = 8
MARGIN_CELLS = 2
ROUNDOFF_ULPS = 64


@dataclass(frozen=True)
class ConvergenceRecord:
    n: int
    sup_error: float
    l1_error: float
    l2_error: float


@dataclass(frozen=True)
class ConvergenceStudy:
    records: tuple
    order: float

    @property
    def ns(self) -> list:
        return [r.n for r in self.records]

    @property
    def sup_errors(self) -> list:
        return [r.sup_error for r in self.records]


@dataclass(frozen=True)
class BenchmarkRow:
    method: str
    n: int | None
    report: MetricsReport
    seconds: float


def _as_box(box, d: int) -> Box:
    if box is None:
        return Box.unit(d)
    return box if isinstance(box, Box) else Box(tuple(box))


def _evaluate(f, mesh: list) -> np.ndarray:
    if isinstance(f, StepFunction):
        return f(np.stack(mesh, axis=-1))
    return np.broadcast_to(np.asarray(f(*mesh), dtype=np.float64), mesh[0].shape)


def modulus_estimate(f: Callable, delta: float, resolution: int, box: Box | None = None, d: int = 1) -> float:
    """Lower estimate of the modulus of continuity from a uniform grid.

    Maximum of ``|f(x) - f(y)|`` over grid pairs at Euclidean distance at most
    `delta`; `resolution` points per axis including both endpoints.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    box = _as_box(box, d)
    axes = [np.linspace(a, b, resolution) for a, b in box.intervals]
    F = _evaluate(f, np.meshgrid(*axes, indexing="ij"))
    h = (box.upper - box.lower) / (resolution - 1)
    reach = [min(resolution - 1, int(math.floor(delta / hi + 1e-9))) for hi in h]
    best = 0.0
    for off in itertools.product(*[range(0, r + 1) for r in reach]):
        for signs in itertools.product(*[(1, -1) if o else (1,) for o in off]):
            o = [s * v for s, v in zip(signs, off)]
            if math.sqrt(sum((oi * hi) ** 2 for oi, hi in zip(o, h))) > delta * (1 + 1e-12):
                continue
            if not any(o):
                continue
            src = tuple(slice(max(0, -oi), resolution - max(0, oi)) for oi in o)
            dst = tuple(slice(max(0, oi), resolution - max(0, -oi)) for oi in o)
            best = max(best, float(np.max(np.abs(F[dst] - F[src]))))
    return best


def empirical_order(ns: Sequence[int], errors: Sequence[float], drop_first: bool = True) -> float:
    """Negative least-squares slope of ``log(error)`` against ``log(n)``.

    The smallest ``n`` is discarded (pre-asymptotic).  Returns NaN when the
    fit is undefined, e.g. for zero errors.
    """
    ns = np.asarray(ns, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    order = np.argsort(ns)
    ns, errors = ns[order], errors[order]
    if drop_first:
        ns, errors = ns[1:], errors[1:]
    if ns.size < 2 or np.any(errors <= 0) or not np.all(np.isfinite(errors)):
        return math.nan
    slope = np.polyfit(np.log(ns), np.log(errors), 1)[0]
    return float(-slope)


def convergence_study(
    f,
    kernel: DensityKernel | None,
    n_list: Sequence[int],
    box: Box | None = None,
    d: int | None = None,
) -> ConvergenceStudy:
    """Errors of the operator against `f` for each rate in `n_list`.

    The lattice is the set of cell midpoints of a uniform partition with step
    ``1 / (8 n_max)``.  The sup error is taken over lattice points at least
    ``2 / n_min`` away from the boundary; the L^1 and L^2 errors are midpoint
    sums over the whole lattice.  Errors at round-off level (below
    ``ROUNDOFF_ULPS`` ulps of the largest ``|f|``) are reported as 0, so exact
    reproduction yields zero errors and a NaN order.
    """
    kernel = kernel or DensityKernel()
    ns = [int(n) for n in n_list]
    if not ns or ns != sorted(ns):
        raise ValueError("n_list must be a non-empty ascending sequence")
    if isinstance(f, StepFunction):
        box = box or f.box
    box = _as_box(box, d or 1)
    if box.d > 2:
        raise ValueError("convergence studies support d <= 2")
    h = 1.0 / (LATTICE_REFINE * ns[-1])
    axes, inner = [], []
    margin = MARGIN_CELLS / ns[0]
    for a, b in box.intervals:
        m = max(1, int(math.ceil((b - a) / h - 1e-9)))
        x = a + (np.arange(m) + 0.5) * (b - a) / m
        axes.append(x)
        inner.append((x >= a + margin) & (x <= b - margin))
    cell = float(np.prod([(b - a) / ax.size for (a, b), ax in zip(box.intervals, axes)]))
    mesh = np.meshgrid(*axes, indexing="ij")
    truth = _evaluate(f, mesh)
    mask = inner[0] if box.d == 1 else inner[0][:, None] & inner[1][None, :]
    if not mask.any():
        raise ValueError("interior margin swallows the whole lattice; use a larger smallest n")
    noise = ROUNDOFF_ULPS * np.finfo(np.float64).eps * max(1.0, float(np.max(np.abs(truth))))
    records = []
    for n in ns:
        grid = mean_value_grid(f, box, n)
        approx = kantorovich_apply(OperatorConfig(n, kernel), grid, axes)
        err = np.abs(approx - truth)
        err[err <= noise] = 0.0
        records.append(
            ConvergenceRecord(
                n=n,
                sup_error=float(err[mask].max()),
                l1_error=float(cell * err.sum()),
                l2_error=float(math.sqrt(cell * np.sum(err * err))),
            )
        )
    order = empirical_order(ns, [r.sup_error for r in records])
    return ConvergenceStudy(tuple(records), order)


def _step_lp(f: StepFunction, p: float) -> float:
    vol = np.ones(())
    for e in f.edges:
        vol = np.multiply.outer(vol, np.diff(e))
    return float(np.sum(vol * np.abs(f.values) ** p) ** (1.0 / p))


def operator_norm_check(
    f: StepFunction,
    p: float,
    n: int,
    kernel: DensityKernel | None = None,
    pieces: int = 64,
    nodes: int = 4,
) -> float:
    """Ratio ``||K_n f||_p / ||f||_p`` for a step function `f` (d <= 2).

    ``||f||_p`` is exact; ``||K_n f||_p`` uses a composite Gauss-Legendre
    rule with `pieces` subintervals of `nodes` points per axis.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    kernel = kernel or DensityKernel()
    if np.all(f.values == 0):
        raise ZeroDivisionError("f vanishes identically")
    box = f.box
    t, w = np.polynomial.legendre.leggauss(nodes)
    axes, weights = [], []
    for a, b in box.intervals:
        edges = np.linspace(a, b, pieces + 1)
        half = 0.5 * np.diff(edges)
        axes.append((edges[:-1, None] + half[:, None] * (t[None, :] + 1.0)).ravel())
        weights.append((half[:, None] * w[None, :]).ravel())
    grid = mean_value_grid(f, box, n)
    k = np.abs(kantorovich_apply(OperatorConfig(n, kernel), grid, axes)) ** p
    if box.d == 1:
        integral = float(np.dot(weights[0], k))
    else:
        integral = float(weights[0] @ k @ weights[1])
    return integral ** (1.0 / p) / _step_lp(f, p)


def rescale_benchmark(
    reference,
    factor: int,
    n_list: Sequence[int] = BENCH_N_VALUES,
    ssim_mode: str = "windowed",
    kernel: DensityKernel | None = None,
) -> list:
    """Downscale `reference` by `factor` (nearest neighbor), upscale it back
    with every method and score each result against `reference`.
    """
    kernel = kernel or DensityKernel()
    small = downscale_nearest(reference, factor)
    rows = []
    label = f"nn-{kernel.family.value}"
    for n in n_list:
        t0 = time.perf_counter()
        up, _ = rescale_image(small, factor, n, kernel)
        dt = time.perf_counter() - t0
        rows.append(BenchmarkRow(label, int(n), metrics_report(reference, up, ssim_mode), dt))
    for name, fn in (("bilinear", resize_bilinear), ("bicubic", resize_bicubic)):
        t0 = time.perf_counter()
        up = fn(small, factor)
        dt = time.perf_counter() - t0
        rows.append(BenchmarkRow(name, None, metrics_report(reference, up, ssim_mode), dt))
    return rows


def pipeline_trend(rows: Sequence[BenchmarkRow]) -> dict:
    """Check the ordering reported for remote-sensing imagery: best-n NN SSIM
    above bilinear above bicubic, and bilinear PSNR above NN PSNR (best-n row).
    """
    nn = [r for r in rows if r.n is not None]
    by = {r.method: r for r in rows if r.n is None}
    best = max(nn, key=lambda r: r.report.ssim)
    bil, bic = by["bilinear"], by["bicubic"]
    return {
        "best_n": best.n,
        "ssim_nn_gt_bilinear": best.report.ssim > bil.report.ssim,
        "ssim_bilinear_gt_bicubic": bil.report.ssim > bic.report.ssim,
        "psnr_bilinear_gt_nn": bil.report.psnr > best.report.psnr,
    }


def rows_to_csv(rows: Sequence[BenchmarkRow], timing: bool = False) -> str:
    """Serialize rows; the seconds column is left empty unless `timing`."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([
            r.method,
            "" if r.n is None else r.n,
            format_psnr(r.report.psnr),
            f"{r.report.ssim:.6g}",
            f"{r.report.mse:.6g}",
            f"{r.seconds:.6g}" if timing else "",
        ])
    return buf.getvalue()


def speckle_image(shape=(256, 256), seed: int = 0, looks: int = 1, window: float = DB_WINDOW) -> np.ndarray:
    """Synthetic SAR-like 8-bit image.

    A smooth backscatter field (random low-frequency cosines in dB) is
    multiplied by gamma speckle with `looks` looks (exponential for one look)
    and mapped to gray through the dB window.
    """
    rng = np.random.default_rng(seed)
    m, n = shape
    y, x = np.meshgrid(np.linspace(0, 1, m), np.linspace(0, 1, n), indexing="ij")
    db = np.full(shape, -15.0)
    for _ in range(6):
        fx, fy = rng.uniform(0.5, 4.0, size=2)
        ph = rng.uniform(0, 2 * np.pi)
        db += rng.uniform(1.0, 4.0) * np.cos(2 * np.pi * (fx * x + fy * y) + ph)
    speckle = rng.gamma(looks, 1.0 / looks, size=shape)
    return sar_to_gray(10.0 ** (db / 10.0) * speckle, window)
