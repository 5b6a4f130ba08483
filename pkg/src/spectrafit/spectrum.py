"""Eigenvalues, scaling conventions, ECDF, and kernel density estimates."""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import ConvergenceFailureError, DegenerateSpectrumError, GridTooNarrowError
from .generators import BMParams
from .graphs import Graph, adjacency_dense, degrees

SQRT_2PI = float(np.sqrt(2.0 * np.pi))


# -- scaling conventions ----------------------------------------------------

@dataclass(frozen=True)
class SqrtN:
    """Eigenvalues of A divided by sqrt(n)."""

    label = "sqrt-n"


@dataclass(frozen=True)
class Raw:
    """Eigenvalues of A, unscaled."""

    label = "raw"


@dataclass(frozen=True)
class ErVariance:
    """Eigenvalues of A divided by sqrt(n p (1-p))."""

    p: float
    label = "er-variance"

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError("need 0 < p < 1")


@dataclass(frozen=True)
class DrScaled:
    """Eigenvalues of A divided by sqrt(d-1)."""

    d: int
    label = "dr-scaled"

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("need d >= 2")


@dataclass(frozen=True)
class BmCentered:
    """Eigenvalues of (A - E[A]) / sqrt(n p*(1-p*)) for a block model."""

    params: BMParams
    label = "bm-centered"

    def __post_init__(self):
        p_star = max(self.params.p_within)
        if not 0.0 < p_star < 1.0:
            raise ValueError("need 0 < p* < 1")


@dataclass(frozen=True)
class DrCentered:
    """Centered regular-graph matrix [d/n (1-1/n)]^{-1/2} (A - d/n J) / sqrt(n)."""

    d: int
    label = "dr-centered"

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("need d >= 1")


ScalingMode = Union[SqrtN, Raw, ErVariance, DrScaled, BmCentered, DrCentered]


@dataclass(frozen=True)
class Spectrum:
    """All n eigenvalues, non-increasing, with their scaling convention."""

    values: np.ndarray
    mode: ScalingMode

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size


def _scaled_matrix(g: Graph, mode: ScalingMode) -> np.ndarray:
    a = adjacency_dense(g)
    if isinstance(mode, BmCentered):
        params = mode.params
        member = params.membership()
        expected = params.off_block_matrix()[np.ix_(member, member)].astype(float)
        for m, p_in in enumerate(params.p_within):
            idx = np.nonzero(member == m)[0]
            expected[np.ix_(idx, idx)] = p_in
        np.fill_diagonal(expected, 0.0)
        p_star = max(params.p_within)
        return (a - expected) / np.sqrt(g.n * p_star * (1.0 - p_star))
    if isinstance(mode, DrCentered):
        n = g.n
        scale = (mode.d / n * (1.0 - 1.0 / n)) ** -0.5
        return scale * (a - mode.d / n) / np.sqrt(n)
    raise TypeError(f"not a matrix-level mode: {mode!r}")


def _scalar_divisor(g: Graph, mode: ScalingMode) -> float:
    if isinstance(mode, SqrtN):
        return float(np.sqrt(g.n))
    if isinstance(mode, Raw):
        return 1.0
    if isinstance(mode, ErVariance):
        return float(np.sqrt(g.n * mode.p * (1.0 - mode.p)))
    if isinstance(mode, DrScaled):
        return float(np.sqrt(mode.d - 1.0))
    raise TypeError(f"not a scalar mode: {mode!r}")


def eigenvalues(g: Graph, mode: ScalingMode = SqrtN()) -> Spectrum:
    """Full symmetric eigendecomposition under the given scaling.

    Modes that only rescale eigenvalues warn (not fail) when the graph
    visibly violates their assumption (e.g. DrScaled on a non-regular
    graph).
    """
    if isinstance(mode, DrScaled):
        deg = degrees(g)
        if deg.size and not np.all(deg == mode.d):
            warnings.warn(f"graph is not {mode.d}-regular; DrScaled is nominal",
                          stacklevel=2)
    if isinstance(mode, (BmCentered, DrCentered)):
        matrix = _scaled_matrix(g, mode)
    else:
        matrix = adjacency_dense(g)
    try:
        vals = np.linalg.eigvalsh(matrix)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailureError(str(exc)) from exc
    if isinstance(mode, (BmCentered, DrCentered)):
        scaled = vals
    else:
        scaled = vals / _scalar_divisor(g, mode)
    return Spectrum(values=scaled[::-1].copy(), mode=mode)


# -- empirical CDF ----------------------------------------------------------

@dataclass(frozen=True)
class EmpiricalCDF:
    """Right-continuous step CDF with jumps 1/n at the sample points."""

    support: np.ndarray  # unique sorted values
    levels: np.ndarray   # F at and after each support point

    def __post_init__(self):
        s = np.asarray(self.support, dtype=np.float64)
        f = np.asarray(self.levels, dtype=np.float64)
        s.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "levels", f)

    @classmethod
    def from_values(cls, values) -> "EmpiricalCDF":
        v = np.sort(np.asarray(values, dtype=np.float64))
        support, counts = np.unique(v, return_counts=True)
        levels = np.cumsum(counts) / v.size
        return cls(support=support, levels=levels)

    def __call__(self, x) -> np.ndarray:
        idx = np.searchsorted(self.support, np.asarray(x, dtype=np.float64),
                              side="right")
        padded = np.concatenate([[0.0], self.levels])
        return padded[idx]

    def to_csv(self) -> str:
        return _curve_csv(self.support, self.levels)


def ecdf(s: Spectrum) -> EmpiricalCDF:
    return EmpiricalCDF.from_values(s.values)


# -- bandwidth and kernel density -------------------------------------------

def silverman_bandwidth(values) -> float:
    """Robust rule of thumb: 0.9 min(sd, IQR/1.34) n^(-1/5).

    Falls back to sd when the IQR degenerates to zero but the spread
    does not.
    """
    if isinstance(values, Spectrum):
        values = values.values
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size < 2:
        raise DegenerateSpectrumError("need at least two eigenvalues")
    sd = float(np.std(v, ddof=1))
    if sd == 0.0:
        raise DegenerateSpectrumError("all eigenvalues equal")
    q75, q25 = np.percentile(v, [75.0, 25.0])
    iqr = float(q75 - q25)
    scale = min(sd, iqr / 1.34) if iqr > 0 else sd
    return 0.9 * scale * v.size ** (-0.2)


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    points: int = 2048

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.points >= 2):
            raise ValueError("grid needs x_max > x_min and >= 2 points")

    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.points)


def default_grid(values, sigma: float, extra_span=None, points: int = 2048) -> GridSpec:
    """Grid covering the values +- 4 sigma, optionally unioned with a
    law's support interval. The 4 sigma margin keeps well over 99.9%
    of every kernel's mass inside the grid."""
    v = values.values if isinstance(values, Spectrum) else np.asarray(values)
    lo = float(np.min(v)) - 4.0 * sigma
    hi = float(np.max(v)) + 4.0 * sigma
    if extra_span is not None:
        lo = min(lo, extra_span[0])
        hi = max(hi, extra_span[1])
    if hi <= lo:
        lo, hi = lo - 0.5, hi + 0.5
    return GridSpec(lo, hi, points)


@dataclass(frozen=True)
class DensityCurve:
    """Density sampled on a uniform grid; bandwidth 0 marks analytic laws."""

    x: np.ndarray
    values: np.ndarray
    bandwidth: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if x.shape != v.shape or x.ndim != 1:
            raise ValueError("x and values must be 1-d arrays of equal length")
        x.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)

    def mass(self) -> float:
        return float(np.trapezoid(self.values, self.x))

    def to_csv(self) -> str:
        return _curve_csv(self.x, self.values)

    @classmethod
    def from_csv(cls, text: str, bandwidth: float = 0.0) -> "DensityCurve":
        xs, vs = _parse_curve_csv(text)
        return cls(x=xs, values=vs, bandwidth=bandwidth)


def _curve_csv(xs, vs) -> str:
    buf = io.StringIO()
    buf.write("x,value\n")
    for x, v in zip(np.asarray(xs), np.asarray(vs)):
        buf.write(f"{x:.12g},{v:.12g}\n")
    return buf.getvalue()


def _parse_curve_csv(text: str):
    xs, vs = [], []
    for lineno, line in enumerate(text.splitlines()):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if lineno == 0 and line.lower().startswith("x,"):
            continue
        a, b = line.split(",")
        xs.append(float(a))
        vs.append(float(b))
    return np.asarray(xs), np.asarray(vs)


def gaussian_kde_on_grid(values: np.ndarray, sigma: float, xs: np.ndarray,
                         chunk: int = 256) -> np.ndarray:
    """Mean of Gaussian kernels centred at the values, evaluated on xs."""
    out = np.zeros_like(xs)
    v = np.asarray(values, dtype=np.float64)
    for start in range(0, v.size, chunk):
        block = v[start:start + chunk]
        z = (xs[None, :] - block[:, None]) / sigma
        out += np.exp(-0.5 * z * z).sum(axis=0)
    out /= v.size * sigma * SQRT_2PI
    return out


def kernel_density(s: Spectrum, sigma: float, grid: Optional[GridSpec] = None,
                   mass_tolerance: float = 1e-3) -> DensityCurve:
    """Gaussian kernel estimate of the spectral density.

    Raises GridTooNarrowError when the grid misses more than
    mass_tolerance of the total kernel mass.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if grid is None:
        grid = default_grid(s, sigma)
    xs = grid.xs()
    from scipy.stats import norm
    inside = norm.cdf((grid.x_max - s.values) / sigma) - \
        norm.cdf((grid.x_min - s.values) / sigma)
    if float(np.mean(inside)) < 1.0 - mass_tolerance:
        raise GridTooNarrowError(
            f"grid [{grid.x_min}, {grid.x_max}] keeps only "
            f"{np.mean(inside):.5f} of the kernel mass")
    return DensityCurve(x=xs, values=gaussian_kde_on_grid(s.values, sigma, xs),
                        bandwidth=sigma)
