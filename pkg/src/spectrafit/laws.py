"""Closed-form limiting spectral laws and the block-model Stieltjes solver."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple, Union

import numpy as np
from scipy.integrate import quad

from .errors import BranchViolationError, NoConvergenceError
from .generators import BMParams
from .spectrum import DensityCurve, GridSpec

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SemicircleUnit:
    """Semicircle on [-2, 2] (unit-variance Wigner limit)."""

    label = "semicircle"

    @property
    def support(self) -> Tuple[float, float]:
        return (-2.0, 2.0)

    def density(self, x):
        x = np.asarray(x, dtype=np.float64)
        inside = np.clip(4.0 - x * x, 0.0, None)
        return np.where(np.abs(x) <= 2.0, np.sqrt(inside) / TWO_PI, 0.0)

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=np.float64), -2.0, 2.0)
        return 0.5 + x * np.sqrt(4.0 - x * x) / (4.0 * np.pi) + \
            np.arcsin(x / 2.0) / np.pi


@dataclass(frozen=True)
class SemicircleP:
    """Rescaled semicircle limit for G(n, p) under the sqrt(n) scaling."""

    p: float
    label = "semicircle-p"

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError("need 0 < p < 1")

    @property
    def _s(self) -> float:
        return float(np.sqrt(self.p * (1.0 - self.p)))

    @property
    def support(self) -> Tuple[float, float]:
        return (-2.0 * self._s, 2.0 * self._s)

    def density(self, x):
        x = np.asarray(x, dtype=np.float64)
        v = self.p * (1.0 - self.p)
        inside = np.clip(4.0 * v - x * x, 0.0, None)
        return np.where(np.abs(x) <= 2.0 * self._s,
                        np.sqrt(inside) / (TWO_PI * v), 0.0)

    def cdf(self, x):
        return SemicircleUnit().cdf(np.asarray(x, dtype=np.float64) / self._s)


@dataclass(frozen=True)
class KestenMcKay:
    """Limiting law of random d-regular graphs, unscaled eigenvalues."""

    d: int
    label = "kesten-mckay"

    def __post_init__(self):
        if self.d < 3:
            raise ValueError("need integer d >= 3")

    @property
    def support(self) -> Tuple[float, float]:
        r = 2.0 * np.sqrt(self.d - 1.0)
        return (-r, r)

    def density(self, x):
        x = np.asarray(x, dtype=np.float64)
        d = float(self.d)
        inside = np.clip(4.0 * (d - 1.0) - x * x, 0.0, None)
        dens = d * np.sqrt(inside) / (TWO_PI * (d * d - x * x))
        return np.where(np.abs(x) <= 2.0 * np.sqrt(d - 1.0), dens, 0.0)

    def cdf(self, x):
        return _tabulated_cdf(self)(x)


@dataclass(frozen=True)
class KestenMcKayScaled:
    """Kesten-McKay law for eigenvalues divided by sqrt(d-1)."""

    d: int
    label = "kesten-mckay-scaled"

    def __post_init__(self):
        if self.d < 3:
            raise ValueError("need integer d >= 3")

    @property
    def support(self) -> Tuple[float, float]:
        return (-2.0, 2.0)

    def density(self, x):
        x = np.asarray(x, dtype=np.float64)
        d = float(self.d)
        inside = np.clip(4.0 - x * x, 0.0, None)
        prefactor = 1.0 + 1.0 / (d - 1.0) - x * x / d
        dens = np.sqrt(inside) / (TWO_PI * prefactor)
        return np.where(np.abs(x) <= 2.0, dens, 0.0)

    def cdf(self, x):
        return _tabulated_cdf(self)(x)


AnalyticLaw = Union[SemicircleUnit, SemicircleP, KestenMcKay, KestenMcKayScaled]


def law_density(law: AnalyticLaw, x):
    """Closed-form density, zero outside the support."""
    return law.density(x)


def law_cdf(law: AnalyticLaw, x) -> float:
    """CDF by adaptive quadrature from the lower support edge.

    Scalar contract used as the reference; `law.cdf` is the fast
    vectorized evaluation (closed form or tabulated) checked against
    this in the tests.
    """
    lo, hi = law.support
    x = float(x)
    if x <= lo:
        return 0.0
    if x >= hi:
        x = hi
    val, _ = quad(lambda t: float(law.density(t)), lo, x, limit=400)
    return float(val)


@lru_cache(maxsize=64)
def _cdf_table(law: AnalyticLaw, points: int = 100001):
    lo, hi = law.support
    xs = np.linspace(lo, hi, points)
    dens = law.density(xs)
    cum = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2.0 *
                                           np.diff(xs))])
    # the square-root edges lose a little trapezoid mass; renormalize
    cum /= cum[-1]
    return xs, cum


def _tabulated_cdf(law: AnalyticLaw):
    xs, cum = _cdf_table(law)

    def f(x):
        return np.interp(np.asarray(x, dtype=np.float64), xs, cum,
                         left=0.0, right=cum[-1])

    return f


# -- block-model limiting law ------------------------------------------------

@dataclass(frozen=True)
class BlockModelLaw:
    """Input to the block-model fixed-point system.

    ratios[0] is the off-block variance ratio, ratios[1..M] the within
    ratios, all relative to the variance-maximizing normalization
    p*(1-p*) with p* the largest within-block probability.
    """

    ratios: tuple  # length M+1
    M: int
    p_star: float = float("nan")
    within_hypotheses: bool = True
    notes: tuple = ()

    def __post_init__(self):
        if len(self.ratios) != self.M + 1:
            raise ValueError("need M+1 variance ratios")
        if any(r <= 0 for r in self.ratios):
            raise ValueError("variance ratios must be positive")


def block_variance_ratios(params: BMParams) -> BlockModelLaw:
    """Finite-n plug-in ratios p_l(1-p_l) / (p*(1-p*)) for l = 0..M.

    Generalized inputs (unequal blocks, pairwise off-block matrix) are
    accepted but flagged as outside the limit theorem's hypotheses.
    """
    params.validate()
    p_within = np.asarray(params.p_within, dtype=float)
    p_star = float(p_within.max())
    denom = p_star * (1.0 - p_star)
    if denom <= 0:
        raise ValueError("need 0 < p* < 1 for the centered normalization")
    notes = []
    within_hyp = True
    off = params.off_block_matrix()
    off_vals = off[np.triu_indices(params.M, k=1)] if params.M > 1 \
        else np.array([float(off[0, 0])])
    if params.M > 1 and not np.allclose(off_vals, off_vals[0]):
        within_hyp = False
        notes.append("pairwise off-block probabilities; using their mean")
    p0 = float(np.mean(off_vals))
    if len(set(params.block_sizes)) > 1:
        within_hyp = False
        notes.append("unequal block sizes")
    ratios = [p0 * (1.0 - p0) / denom]
    ratios += [float(p * (1.0 - p)) / denom for p in p_within]
    return BlockModelLaw(ratios=tuple(ratios), M=params.M, p_star=p_star,
                         within_hypotheses=within_hyp, notes=tuple(notes))


@dataclass(frozen=True)
class StieltjesSolution:
    z: complex
    c: np.ndarray
    iterations: int
    residual: float

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.complex128)
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def s(self) -> complex:
        return complex(np.sum(self.c))


def block_stieltjes(law: BlockModelLaw, z: complex, tol: float = 1e-10,
                    max_iter: int = 20000, damping: float = 0.5,
                    c0: Optional[np.ndarray] = None) -> StieltjesSolution:
    """Solve the per-block fixed-point system at one upper-half-plane point.

    Damped iteration c_m <- (1-damping) c_m + damping G(c)_m with
    G(c)_m = (-1/M) / (z + r_m c_m + r_0 sum_{l != m} c_l).
    """
    if z.imag <= 0:
        raise ValueError("z must lie in the upper half-plane")
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = law.M
    r0 = law.ratios[0]
    r = np.asarray(law.ratios[1:], dtype=np.float64)
    c = np.full(M, -1.0 / (M * z), dtype=np.complex128) if c0 is None \
        else np.asarray(c0, dtype=np.complex128).copy()

    def step(cur):
        total = cur.sum()
        denom = z + r * cur + r0 * (total - cur)
        return (-1.0 / M) / denom

    residual = np.inf
    for it in range(1, max_iter + 1):
        nxt = step(c)
        residual = float(np.max(np.abs(nxt - c)))
        c = (1.0 - damping) * c + damping * nxt
        if residual <= tol:
            break
    else:
        raise NoConvergenceError(max_iter, residual, point=z)
    if np.any(c.imag * z.imag <= 0):
        raise BranchViolationError(f"branch condition violated at z={z}")
    return StieltjesSolution(z=z, c=c, iterations=it, residual=residual)


def block_model_density(law: BlockModelLaw, grid: GridSpec,
                        eta: float = 1e-3, tol: float = 1e-10,
                        max_iter: int = 20000) -> Tuple[DensityCurve, float]:
    """Invert the Stieltjes transform along a grid: density = Im s(x+i eta)/pi.

    Grid points are solved left to right, each warm-started from the
    previous solution. Returns the curve renormalized to unit trapezoid
    mass together with the pre-normalization mass.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    xs = grid.xs()
    values = np.empty_like(xs)
    warm = None
    for k, x in enumerate(xs):
        sol = block_stieltjes(law, complex(x, eta), tol=tol,
                              max_iter=max_iter, c0=warm)
        warm = sol.c
        values[k] = max(sol.s.imag / np.pi, 0.0)
    raw_mass = float(np.trapezoid(values, xs))
    if raw_mass <= 0:
        raise NoConvergenceError(max_iter, raw_mass, point="zero mass on grid")
    return DensityCurve(x=xs, values=values / raw_mass, bandwidth=0.0), raw_mass


def block_law_support_radius(law: BlockModelLaw) -> float:
    """Cheap upper bound for the support half-width, used to size grids."""
    return 2.2 * float(np.sqrt(max(law.ratios)))
