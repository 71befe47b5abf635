"""Kantorovich and Durrmeyer-type neural network operators.

The multivariate Kantorovich operator of rate ``n`` on a box ``I`` is

    K_n(f, x) = sum_k m_k Psi(n x - k) / sum_k Psi(n x - k),

where ``k`` runs over the admissible index set ``V_n`` and ``m_k`` is the mean
of ``f`` over the cell ``[k/n, (k+1)/n]^d``.  Sums are truncated to
``|n x_i - k_i| <= r`` with ``r`` the kernel's truncation radius; numerator
and denominator use the same truncated set, so constants are reproduced
exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import sparse

from nnkop import _backend
from nnkop.sigmoid import DensityKernel

__all__ = [
    "Box",
    "IndexSet",
    "StepFunction",
    "MeanValueGrid",
    "OperatorConfig",
    "DurrmeyerKernel",
    "EmptyIndexRangeError",
    "DomainError",
    "index_set",
    "mean_value_grid",
    "kantorovich_eval",
    "kantorovich_apply",
    "kantorovich_denominator",
    "durrmeyer_eval_1d",
]

# Gauss-Legendre nodes per axis and cell when averaging a callable
DEFAULT_CELL_NODES = 8
# nodes per piece in the Durrmeyer inner integrals
DURRMEYER_NODES = 16


class EmptyIndexRangeError(ValueError):
    """Rate ``n`` too small: some axis has no admissible index."""


class DomainError(ValueError):
    """Evaluation point outside the operator's domain."""


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[a_1, b_1] x ... x [a_d, b_d]``."""

    intervals: tuple

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        if not ivs:
            raise ValueError("a box needs at least one dimension")
        for a, b in ivs:
            if not a < b:
                raise ValueError(f"degenerate interval [{a}, {b}]")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def of(cls, *intervals) -> "Box":
        return cls(tuple(intervals))

    @classmethod
    def unit(cls, d: int = 1) -> "Box":
        return cls(((0.0, 1.0),) * d)

    @property
    def d(self) -> int:
        return len(self.intervals)

    @property
    def lower(self) -> np.ndarray:
        return np.array([a for a, _ in self.intervals])

    @property
    def upper(self) -> np.ndarray:
        return np.array([b for _, b in self.intervals])

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def contains(self, x) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        return x.shape == (self.d,) and bool(np.all((self.lower <= x) & (x <= self.upper)))


@dataclass(frozen=True)
class IndexSet:
    lo: tuple
    hi: tuple

    @property
    def d(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple:
        return tuple(h - l + 1 for l, h in zip(self.lo, self.hi))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def ranges(self) -> list:
        return [range(l, h + 1) for l, h in zip(self.lo, self.hi)]


def _exact(v: float) -> Fraction:
    # decimal literal semantics: 0.1 * 10 has ceiling 1, not 2
    return Fraction(repr(float(v)))


def index_set(box: Box, n: int) -> IndexSet:
    """Admissible indices ``ceil(n a_i) <= k_i <= floor(n b_i) - 1``."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    n = int(n)
    lo, hi = [], []
    for i, (a, b) in enumerate(box.intervals):
        l = math.ceil(n * _exact(a))
        h = math.floor(n * _exact(b)) - 1
        if l > h:
            raise EmptyIndexRangeError(
                f"n={n} leaves axis {i} of {box} without admissible indices "
                f"(ceil(n*a)={l} > floor(n*b)-1={h})"
            )
        lo.append(l)
        hi.append(h)
    return IndexSet(tuple(lo), tuple(hi))


class StepFunction:
    """Piecewise-constant function on a tensor grid of cells.

    Cell ``(i_1, ..., i_d)`` is ``(e_1[i_1], e_1[i_1+1]] x ...`` (half-open on
    the left; the first cell of each axis also contains its left endpoint) and
    carries ``values[i_1, ..., i_d]``.
    """

    def __init__(self, edges: Sequence, values):
        values = np.asarray(values, dtype=np.float64)
        edges = tuple(np.asarray(e, dtype=np.float64) for e in edges)
        if values.ndim != len(edges):
            raise ValueError(f"{len(edges)} edge vectors for a {values.ndim}-d value array")
        for i, e in enumerate(edges):
            if e.ndim != 1 or e.size != values.shape[i] + 1:
                raise ValueError(f"axis {i}: need {values.shape[i] + 1} edges, got {e.size}")
            if np.any(np.diff(e) <= 0):
                raise ValueError(f"axis {i}: edges must be strictly increasing")
        self.edges = edges
        self.values = values

    @classmethod
    def uniform(cls, values, box: Box | None = None) -> "StepFunction":
        values = np.asarray(values, dtype=np.float64)
        box = box or Box.unit(values.ndim)
        edges = [np.linspace(a, b, m + 1) for (a, b), m in zip(box.intervals, values.shape)]
        return cls(edges, values)

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def box(self) -> Box:
        return Box(tuple((e[0], e[-1]) for e in self.edges))

    def cell_index(self, points) -> tuple:
        """Cell indices of an ``(..., d)`` array of points."""
        pts = np.asarray(points, dtype=np.float64)
        if self.d == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
            pts = pts[..., None]
        if pts.shape[-1] != self.d:
            raise ValueError(f"expected points with trailing dimension {self.d}")
        idx = []
        for i, e in enumerate(self.edges):
            x = pts[..., i]
            if np.any((x < e[0]) | (x > e[-1])):
                raise DomainError(f"point outside [{e[0]}, {e[-1]}] on axis {i}")
            j = np.searchsorted(e, x, side="left") - 1
            idx.append(np.clip(j, 0, e.size - 2))
        return tuple(idx)

    def __call__(self, points):
        return self.values[self.cell_index(points)]


Integrand = "StepFunction | Callable"


@dataclass(frozen=True)
class MeanValueGrid:
    """Cell means ``n^d * integral of f over R_k`` for ``k`` in ``V_n``."""

    n: int
    box: Box
    indices: IndexSet
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.values.shape != self.indices.shape:
            raise ValueError(f"grid shape {self.values.shape} != index set shape {self.indices.shape}")
        self.values.setflags(write=False)

    @property
    def d(self) -> int:
        return self.box.d


def _overlap_matrix(edges: np.ndarray, n: int, lo: int, hi: int) -> sparse.csr_matrix:
    """Row k - lo: ``n * |[k/n, (k+1)/n] intersected with step i|`` for each step i."""
    ne = n * edges  # step boundaries in units of 1/n; exact for integer edges
    ks = np.arange(lo, hi + 1)
    first = np.searchsorted(ne, ks, side="right") - 1
    last = np.searchsorted(ne, ks + 1, side="left") - 1
    first = np.clip(first, 0, edges.size - 2)
    last = np.clip(last, 0, edges.size - 2)
    counts = last - first + 1
    rows = np.repeat(np.arange(ks.size), counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    cols = np.repeat(first, counts) + offs
    kk = ks[rows].astype(np.float64)
    w = np.minimum(kk + 1.0, ne[cols + 1]) - np.maximum(kk, ne[cols])
    keep = w > 0.0
    return sparse.csr_matrix(
        (w[keep], (rows[keep], cols[keep])), shape=(ks.size, edges.size - 1)
    )


def _apply_along(mat, arr: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(arr, axis, 0)
    shape = moved.shape
    res = mat @ moved.reshape(shape[0], -1)
    res = np.asarray(res).reshape((mat.shape[0],) + shape[1:])
    return np.moveaxis(res, 0, axis)


def _step_means(f: StepFunction, box: Box, n: int, idx: IndexSet) -> np.ndarray:
    fbox = f.box
    for (a, b), (fa, fb) in zip(box.intervals, fbox.intervals):
        if a < fa or b > fb:
            raise DomainError(f"box {box} is not contained in the step function's domain {fbox}")
    out = f.values
    for axis, (e, l, h) in enumerate(zip(f.edges, idx.lo, idx.hi)):
        out = _apply_along(_overlap_matrix(e, n, l, h), out, axis)
    return np.ascontiguousarray(out)


def _callable_means(f: Callable, n: int, idx: IndexSet, nodes: int) -> np.ndarray:
    t, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    coords = []
    for l, h in zip(idx.lo, idx.hi):
        ks = np.arange(l, h + 1, dtype=np.float64)
        coords.append(((ks[:, None] + t[None, :]) / n).ravel())
    mesh = np.meshgrid(*coords, indexing="ij")
    vals = np.asarray(f(*mesh), dtype=np.float64)
    vals = np.broadcast_to(vals, mesh[0].shape)
    shape = []
    for s in idx.shape:
        shape += [s, nodes]
    vals = vals.reshape(shape)
    for axis in range(idx.d):
        vals = np.tensordot(vals, w, axes=([axis + 1], [0]))
    return np.ascontiguousarray(vals)


def mean_value_grid(f, box: Box | None, n: int, nodes: int = DEFAULT_CELL_NODES) -> MeanValueGrid:
    """Build the matrix of cell means of `f` at rate `n`.

    Parameters
    ----------
    f : StepFunction or callable
        Step functions are integrated exactly from per-axis overlap lengths.
        A callable takes ``d`` broadcastable coordinate arrays and is averaged
        with a tensor Gauss-Legendre rule of `nodes` points per axis and cell.
    box : Box or None
        Domain; defaults to the step function's own domain.
    n : int
        Operator rate.
    """
    if box is None:
        if not isinstance(f, StepFunction):
            raise ValueError("a box is required for callable integrands")
        box = f.box
    idx = index_set(box, n)
    if isinstance(f, StepFunction):
        if f.d != box.d:
            raise ValueError(f"{f.d}-d step function on a {box.d}-d box")
        values = _step_means(f, box, int(n), idx)
    else:
        values = _callable_means(f, int(n), idx, nodes)
    return MeanValueGrid(int(n), box, idx, values)


@dataclass(frozen=True)
class OperatorConfig:
    n: int
    kernel: DensityKernel = field(default_factory=DensityKernel)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def tol(self) -> float:
        return self.kernel.tol


def _window_radius(kernel: DensityKernel) -> float:
    # at least 2 so the window always meets V_n for points inside the box
    return max(kernel.radius, 2.0)


def _axis_weights(kernel: DensityKernel, n: int, lo: int, hi: int, coords: np.ndarray):
    """Truncated per-axis windows for every coordinate.

    Returns ``(start, length, weights, den)``; ``weights[p, a]`` is
    ``phi(n x_p - (start_p + a))`` and ``den[p]`` their left-to-right sum.
    """
    r = _window_radius(kernel)
    coords = np.asarray(coords, dtype=np.float64)
    P = coords.size
    starts = np.empty(P, dtype=np.int64)
    lengths = np.empty(P, dtype=np.int64)
    rows = []
    dens = np.empty(P)
    phi = kernel.phi_scalar
    for p, x in enumerate(coords.tolist()):
        t = n * x
        k0 = max(lo, math.ceil(t - r))
        k1 = min(hi, math.floor(t + r))
        if k0 > k1:
            raise DomainError(f"coordinate {x} has no admissible index within the kernel window")
        ws = [phi(t - k) for k in range(k0, k1 + 1)]
        s = 0.0
        for v in ws:
            s += v
        starts[p] = k0 - lo
        lengths[p] = k1 - k0 + 1
        dens[p] = s
        rows.append(ws)
    width = int(lengths.max()) if P else 0
    weights = np.zeros((P, width))
    for p, ws in enumerate(rows):
        weights[p, : len(ws)] = ws
    return starts, lengths, weights, dens


def _check_axis(coords: np.ndarray, interval: tuple, axis: int):
    a, b = interval
    if coords.size and (coords.min() < a or coords.max() > b):
        raise DomainError(f"evaluation points leave [{a}, {b}] on axis {axis}")


def _check_grid(config: OperatorConfig, grid: MeanValueGrid):
    if grid.n != config.n:
        raise ValueError(f"grid built with n={grid.n}, operator configured with n={config.n}")


def kantorovich_eval(config: OperatorConfig, grid: MeanValueGrid, x) -> float:
    """Evaluate the operator at a single point `x` of the grid's box."""
    _check_grid(config, grid)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.shape != (grid.d,):
        raise ValueError(f"expected a point of dimension {grid.d}, got shape {x.shape}")
    if not grid.box.contains(x):
        raise DomainError(f"point {x.tolist()} outside {grid.box}")
    axes = []
    for i in range(grid.d):
        s, l, w, den = _axis_weights(
            config.kernel, config.n, grid.indices.lo[i], grid.indices.hi[i], x[i : i + 1]
        )
        axes.append((int(s[0]), int(l[0]), w[0].tolist(), float(den[0])))
    den = 1.0
    for _, _, _, dv in axes:
        den = den * dv
    if not den > 0.0:
        raise ArithmeticError(f"vanishing kernel denominator at {x.tolist()}")
    acc = _nested_sum(grid.values, axes, 0, ())
    return acc / den


def _nested_sum(values, axes, axis, prefix):
    start, length, w, _ = axes[axis]
    acc = 0.0
    last = axis == len(axes) - 1
    for a in range(length):
        key = prefix + (start + a,)
        term = float(values[key]) if last else _nested_sum(values, axes, axis + 1, key)
        acc = acc + w[a] * term
    return acc


def kantorovich_apply(config: OperatorConfig, grid: MeanValueGrid, axes: Sequence) -> np.ndarray:
    """Evaluate the operator on the tensor lattice spanned by per-axis coordinates.

    Supports ``d`` in {1, 2}.  Entry ``[p]`` (or ``[p, q]``) is bit-identical
    to ``kantorovich_eval`` at the corresponding lattice point.
    """
    _check_grid(config, grid)
    if len(axes) != grid.d:
        raise ValueError(f"need {grid.d} coordinate vectors, got {len(axes)}")
    if grid.d > 2:
        raise NotImplementedError("lattice application is implemented for d <= 2; use kantorovich_eval")
    axes = [np.asarray(a, dtype=np.float64).ravel() for a in axes]
    for i, a in enumerate(axes):
        _check_axis(a, grid.box.intervals[i], i)
    rs, rl, rw, rden = _axis_weights(config.kernel, config.n, grid.indices.lo[0], grid.indices.hi[0], axes[0])
    if grid.d == 1:
        values = grid.values.reshape(-1, 1)
        q = 1
        cs = np.zeros(q, dtype=np.int64)
        cl = np.ones(q, dtype=np.int64)
        cw = np.ones((q, 1))
        cden = np.ones(q)
    else:
        values = grid.values
        cs, cl, cw, cden = _axis_weights(config.kernel, config.n, grid.indices.lo[1], grid.indices.hi[1], axes[1])
    if np.any(rden <= 0.0) or np.any(cden <= 0.0):
        raise ArithmeticError("vanishing kernel denominator on the lattice")
    out = _backend.apply_separable(
        np.ascontiguousarray(values, dtype=np.float64),
        rs, rl, np.ascontiguousarray(rw), rden,
        cs, cl, np.ascontiguousarray(cw), cden,
    )
    out = np.asarray(out)
    return out[:, 0] if grid.d == 1 else out


def kantorovich_denominator(kernel: DensityKernel, box: Box, n: int, x, truncate: bool = False) -> float:
    """``sum_{k in V_n} Psi(n x - k)``, over the full index set unless `truncate`."""
    idx = index_set(box, n)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = 1.0
    for i in range(box.d):
        if truncate:
            out *= float(_axis_weights(kernel, n, idx.lo[i], idx.hi[i], x[i : i + 1])[3][0])
        else:
            ks = np.arange(idx.lo[i], idx.hi[i] + 1)
            out *= float(np.sum(kernel.phi(n * x[i] - ks)))
    return out


@dataclass(frozen=True)
class DurrmeyerKernel:
    """Admissible weight ``chi`` for the Durrmeyer-type operator.

    ``box01`` is the indicator of [0, 1]; ``hat`` is ``max(0, 1 - |t|)``.
    Both are piecewise linear, so the inner integrals are computed exactly.
    """

    kind: str = "box01"

    def __post_init__(self):
        if self.kind not in ("box01", "hat"):
            raise ValueError(f"unknown Durrmeyer kernel {self.kind!r}")

    @property
    def breakpoints(self) -> tuple:
        return (0.0, 1.0) if self.kind == "box01" else (-1.0, 0.0, 1.0)

    @property
    def support(self) -> tuple:
        bp = self.breakpoints
        return bp[0], bp[-1]

    @property
    def normalization(self) -> float:
        """``integral of chi over [0, 1]``."""
        return 1.0 if self.kind == "box01" else 0.5

    @property
    def discrete_moment(self) -> float:
        """``sup_u sum_k chi(u - k)``."""
        return 1.0

    def __call__(self, u):
        u = np.asarray(u, dtype=np.float64)
        if self.kind == "box01":
            return ((u >= 0.0) & (u <= 1.0)).astype(np.float64)
        return np.maximum(0.0, 1.0 - np.abs(u))


def _pieces(a: float, b: float, cuts) -> list:
    pts = sorted({a, b, *[c for c in cuts if a < c < b]})
    return list(zip(pts[:-1], pts[1:]))


def durrmeyer_eval_1d(
    config: OperatorConfig,
    f,
    chi: DurrmeyerKernel,
    x: float,
    box: Box | tuple | None = None,
) -> float:
    """One-dimensional Durrmeyer-type operator at `x`.

    Inner integrals ``n * int_a^b chi(n t - k) g(t) dt`` are split at the
    breakpoints of ``chi(n . - k)``, at the steps of `f` (when it is a
    `StepFunction`) and at ``a, b``; each piece uses a 16-node Gauss-Legendre
    rule, which is exact for step functions against piecewise-linear ``chi``.
    """
    if box is None:
        if not isinstance(f, StepFunction):
            raise ValueError("a box is required for callable integrands")
        box = f.box
    if not isinstance(box, Box):
        box = Box.of(box)
    if box.d != 1:
        raise ValueError("the Durrmeyer-type operator is one-dimensional")
    (a, b), = box.intervals
    x = float(x)
    if not a <= x <= b:
        raise DomainError(f"x={x} outside [{a}, {b}]")
    n = config.n
    idx = index_set(box, n)
    s, l, w, _ = _axis_weights(config.kernel, n, idx.lo[0], idx.hi[0], np.array([x]))
    k0 = idx.lo[0] + int(s[0])
    weights = w[0, : int(l[0])].tolist()

    fcuts = list(f.edges[0]) if isinstance(f, StepFunction) else []
    t_ref, w_ref = np.polynomial.legendre.leggauss(DURRMEYER_NODES)
    lo_s, hi_s = chi.support
    num = 0.0
    den = 0.0
    for a_i, phi_k in enumerate(weights):
        k = k0 + a_i
        ca, cb = max(a, (k + lo_s) / n), min(b, (k + hi_s) / n)
        mass = 0.0
        fmass = 0.0
        if ca < cb:
            cuts = [(k + c) / n for c in chi.breakpoints] + fcuts
            for p0, p1 in _pieces(ca, cb, cuts):
                half = 0.5 * (p1 - p0)
                tt = p0 + half * (t_ref + 1.0)
                cw = half * w_ref * chi(n * tt - k)
                mass += float(np.sum(cw))
                fmass += float(np.sum(cw * np.asarray(f(tt), dtype=np.float64)))
        num += n * fmass * phi_k
        den += n * mass * phi_k
    if not den > 0.0:
        raise ArithmeticError(f"chi carries no mass on the cells near x={x}")
    return num / den
