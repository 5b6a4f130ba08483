"""Divergences between eigenvalue distributions."""

from __future__ import annotations

import warnings
from typing import Tuple, Union

import numpy as np

from .spectrum import DensityCurve, EmpiricalCDF

DIVERGENCES = ("kl", "l1-density", "l1-cdf")


class DisjointSupportWarning(UserWarning):
    """The two curves share less than half of their probability mass."""


def resample_common(a: DensityCurve, b: DensityCurve) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Linear resampling of both curves onto a shared uniform grid.

    The grid spans the union of both spans with the larger point count;
    curves are extended by zero outside their own span.
    """
    lo = min(a.x[0], b.x[0])
    hi = max(a.x[-1], b.x[-1])
    points = max(a.x.size, b.x.size)
    xs = np.linspace(lo, hi, points)
    av = np.interp(xs, a.x, a.values, left=0.0, right=0.0)
    bv = np.interp(xs, b.x, b.values, left=0.0, right=0.0)
    return xs, av, bv


def l1_density(a: DensityCurve, b: DensityCurve) -> float:
    """Trapezoidal integral of |a - b| on a common grid."""
    xs, av, bv = resample_common(a, b)
    overlap = float(np.trapezoid(np.minimum(av, bv), xs))
    if overlap < 0.5:
        warnings.warn(f"curves share only {overlap:.3f} probability mass",
                      DisjointSupportWarning, stacklevel=2)
    return float(np.trapezoid(np.abs(av - bv), xs))


def kl_divergence_detail(a: DensityCurve, b: DensityCurve,
                         floor: float = 1e-12) -> Tuple[float, float]:
    """KL integral and the fraction of grid points where b was floored."""
    if floor <= 0:
        raise ValueError("floor must be positive")
    xs, av, bv = resample_common(a, b)
    mask = av > 0
    floored = float(np.mean(bv[mask] < floor)) if mask.any() else 0.0
    integrand = np.zeros_like(av)
    integrand[mask] = av[mask] * np.log(av[mask] / np.maximum(bv[mask], floor))
    return float(np.trapezoid(integrand, xs)), floored


def kl_divergence(a: DensityCurve, b: DensityCurve, floor: float = 1e-12) -> float:
    return kl_divergence_detail(a, b, floor)[0]


# -- l1 between CDFs ----------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)

CdfLike = Union[EmpiricalCDF, object]  # anything with .cdf(x) and .support


def _is_step(f) -> bool:
    return isinstance(f, EmpiricalCDF)


def _breakpoints(f) -> np.ndarray:
    if _is_step(f):
        return f.support
    lo, hi = f.support
    # subdivide smooth supports so panel quadrature resolves the shape
    return np.linspace(lo, hi, 257)


def _eval_cdf(f, x):
    if _is_step(f):
        return f(x)
    lo, hi = f.support
    return np.asarray(f.cdf(np.clip(x, lo, hi)), dtype=np.float64)


def l1_cdf(a: CdfLike, b: CdfLike) -> float:
    """Exact integral of |F_a - F_b| (the Wasserstein-1 distance).

    Step-step segments integrate exactly; segments where either side is
    smooth use 64-point Gauss-Legendre panels between breakpoints.
    """
    pts = np.unique(np.concatenate([_breakpoints(a), _breakpoints(b)]))
    if pts.size < 2:
        return 0.0
    left, right = pts[:-1], pts[1:]
    if _is_step(a) and _is_step(b):
        fa = _eval_cdf(a, left)  # constant on [t_i, t_{i+1})
        fb = _eval_cdf(b, left)
        return float(np.sum(np.abs(fa - fb) * (right - left)))
    half = (right - left) / 2.0
    mid = (right + left) / 2.0
    xs = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    diff = np.abs(_eval_cdf(a, xs) - _eval_cdf(b, xs))
    return float(np.sum(half * (diff @ _GL_WEIGHTS)))
