"""Sigmoidal activations and the density kernels they generate.

A sigmoidal function ``sigma`` of the admissible class produces the bell-shaped
density ``phi(x) = (sigma(x + 1) - sigma(x - 1)) / 2`` and, by tensor product,
the multivariate kernel ``Psi(x) = phi(x_1) * ... * phi(x_d)``.

Every family is evaluated in a cancellation-free form: the density is even, so
it is always computed at ``-|x|`` where both sigmoid values are small and can be
obtained to full relative precision.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SigmoidFamily",
    "DensityKernel",
    "sigma_eval",
    "density_eval",
    "density_multi_eval",
    "truncation_radius",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-10

# bisection bracket and resolution for the truncation radius
_RADIUS_MAX = 100.0
_RADIUS_RES = 0.01


class SigmoidFamily(enum.Enum):
    TANH = "tanh"
    LOGISTIC = "logistic"
    RAMP = "ramp"

    @property
    def decay_class(self) -> str:
        # all three decay at least exponentially at -inf (ramp is compactly
        # supported), so the polynomial-decay condition holds for every alpha
        return "exponential"

    @classmethod
    def parse(cls, name: "str | SigmoidFamily") -> "SigmoidFamily":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown sigmoid family {name!r} (choose from {choices})") from None


def _sigma_scalar(family: SigmoidFamily, x: float) -> float:
    if family is SigmoidFamily.TANH:
        # (tanh x + 1) / 2 == 1 / (1 + exp(-2x))
        return _logistic_scalar(2.0 * x)
    if family is SigmoidFamily.LOGISTIC:
        return _logistic_scalar(x)
    if x <= -0.5:
        return 0.0
    if x >= 0.5:
        return 1.0
    return x + 0.5


def _logistic_scalar(x: float) -> float:
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _logistic(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _sigma_array(family: SigmoidFamily, x: np.ndarray) -> np.ndarray:
    if family is SigmoidFamily.TANH:
        return _logistic(2.0 * x)
    if family is SigmoidFamily.LOGISTIC:
        return _logistic(x)
    return np.clip(x + 0.5, 0.0, 1.0)


def sigma_eval(family, x):
    """Evaluate the sigmoid of `family` at `x` (scalar or array)."""
    family = SigmoidFamily.parse(family)
    if np.ndim(x) == 0:
        return _sigma_scalar(family, float(x))
    return _sigma_array(family, np.asarray(x, dtype=np.float64))


@dataclass(frozen=True)
class DensityKernel:
    """Density ``phi`` generated by a sigmoid, plus its truncation metadata.

    Parameters
    ----------
    family : SigmoidFamily or str
        Generating sigmoid.
    tol : float
        Truncation tolerance; ``phi(x) < tol`` for ``|x| > radius``.
    """

    family: SigmoidFamily = SigmoidFamily.TANH
    tol: float = DEFAULT_TOL
    radius: float = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "family", SigmoidFamily.parse(self.family))
        if not 0.0 < self.tol < 1.0:
            raise ValueError(f"truncation tolerance must lie in (0, 1), got {self.tol}")
        object.__setattr__(self, "radius", _radius(self.family, self.tol))

    def sigma(self, x):
        return sigma_eval(self.family, x)

    def phi_scalar(self, x: float) -> float:
        """Scalar density, computed with ``math`` only.

        Operator weights always go through this path so that pointwise and
        lattice evaluation see bit-identical kernel values.
        """
        return _phi_scalar(self.family, x)

    def phi(self, x):
        """Density at `x`; vectorized over arrays."""
        if np.ndim(x) == 0:
            return self.phi_scalar(float(x))
        t = -np.abs(np.asarray(x, dtype=np.float64))
        return 0.5 * (_sigma_array(self.family, t + 1.0) - _sigma_array(self.family, t - 1.0))

    def psi(self, x) -> float:
        """Tensor-product density ``prod_i phi(x_i)``."""
        return density_multi_eval(self, x)


def density_eval(kernel: DensityKernel, x):
    return kernel.phi(x)


def density_multi_eval(kernel: DensityKernel, x) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.ndim != 1 or x.size == 0:
        raise ValueError("density_multi_eval needs a non-empty 1-d vector")
    out = 1.0
    for xi in x:
        out *= kernel.phi_scalar(float(xi))
    return out


def _phi_scalar(family: SigmoidFamily, x: float) -> float:
    t = -abs(x)
    return 0.5 * (_sigma_scalar(family, t + 1.0) - _sigma_scalar(family, t - 1.0))


def _radius(family: SigmoidFamily, tol: float) -> float:
    if _phi_scalar(family, 0.0) < tol:
        return 0.0
    lo, hi = 0.0, _RADIUS_MAX
    while hi - lo > _RADIUS_RES:
        mid = 0.5 * (lo + hi)
        if _phi_scalar(family, mid) < tol:
            hi = mid
        else:
            lo = mid
    # phi is non-increasing on [0, inf): everything beyond hi is below tol
    return hi


def truncation_radius(kernel: "DensityKernel | SigmoidFamily | str", tol: float | None = None) -> float:
    """Smallest ``r`` (to 0.01) with ``phi(x) < tol`` for all ``|x| > r``."""
    family = kernel.family if isinstance(kernel, DensityKernel) else SigmoidFamily.parse(kernel)
    if tol is None:
        if not isinstance(kernel, DensityKernel):
            raise TypeError("tol is required when passing a bare family")
        return kernel.radius
    if not 0.0 < tol:
        raise ValueError(f"tolerance must be positive, got {tol}")
    return _radius(family, tol)
