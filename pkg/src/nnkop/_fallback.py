"""Numpy implementation of the separable operator sum.

Vectorized over output points, sequential over kernel taps, so every output
entry sees exactly the same sequence of floating-point operations as the
compiled kernel.  Rows shorter than the widest window are padded with zero
weights; adding ``+-0.0`` leaves the accumulators unchanged.
"""
import numpy as np


def apply_separable(grid, rs, rl, rw, rden, cs, cl, cw, cden):
    grid = np.ascontiguousarray(grid, dtype=np.float64)
    P, T1 = rw.shape
    Q, T2 = cw.shape
    acc = np.zeros((P, Q))
    for a in range(T1):
        rows = np.where(a < rl, rs + a, rs)
        inner = np.zeros((P, Q))
        for b in range(T2):
            cols = np.where(b < cl, cs + b, cs)
            w = np.where(b < cl, cw[:, b], 0.0)
            inner = inner + grid[rows[:, None], cols[None, :]] * w[None, :]
        wa = np.where(a < rl, rw[:, a], 0.0)
        acc = acc + wa[:, None] * inner
    return acc / (rden[:, None] * cden[None, :])
