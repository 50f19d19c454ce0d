"""Fourier-parameterized m-fold symmetric boundaries and geometric diagnostics.

A boundary is the star-shaped curve

    z(theta) = e^{i theta} [ b + sum_{k=1}^{M} a_k cos(m k theta) ],

with mean radius ``b``, fold ``m`` and real cosine coefficients ``a_k``.
Real coefficients make the curve symmetric about the x-axis, and the
cos(m k theta) basis makes it invariant under rotation by 2 pi / m.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, DegenerateContourError

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class FourierContour:
    """Immutable boundary: mean radius, fold and cosine coefficients."""

    mean_radius: float
    fold: int
    coeffs: np.ndarray

    def __post_init__(self):
        if not 0.0 < self.mean_radius < 1.0:
            raise ConfigurationError(
                f"mean radius must lie in (0,1), got {self.mean_radius}")
        if self.fold < 1:
            raise ConfigurationError(f"fold must be >= 1, got {self.fold}")
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size < 1:
            raise ConfigurationError("coeffs must be a 1-D vector of length >= 1")
        if not np.all(np.isfinite(coeffs)):
            raise ConfigurationError("coeffs contain non-finite values")
        coeffs = coeffs.copy()
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def mode_count(self) -> int:
        return self.coeffs.size

    def radius(self, theta):
        """Radial profile b + sum a_k cos(m k theta)."""
        theta = np.asarray(theta, dtype=float)
        k = np.arange(1, self.coeffs.size + 1)
        return self.mean_radius + np.cos(np.multiply.outer(theta, self.fold * k)) @ self.coeffs

    def to_dict(self) -> dict:
        return {"b": self.mean_radius, "m": self.fold, "coeffs": self.coeffs.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "FourierContour":
        return cls(float(data["b"]), int(data["m"]), np.asarray(data["coeffs"], dtype=float))


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform periodic grid theta_i = 2 pi i / N."""

    node_count: int

    def __post_init__(self):
        if self.node_count < 4:
            raise ConfigurationError(f"node count must be >= 4, got {self.node_count}")

    @classmethod
    def for_fold(cls, fold: int, resolution_exponent: int) -> "SpectralGrid":
        """Canonical grid N = m 2^r; the matching mode count is 2^{r-1} - 1."""
        if resolution_exponent < 2:
            raise ConfigurationError("resolution exponent must be >= 2")
        return cls(fold * 2 ** resolution_exponent)

    @property
    def nodes(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.node_count) / self.node_count


def mode_count(grid: SpectralGrid, fold: int) -> int:
    """Largest M with N >= 2 m M + 1; requires N to be a multiple of m."""
    n = grid.node_count
    if n % fold != 0:
        raise ConfigurationError(
            f"grid size {n} is not a multiple of the fold {fold}")
    return (n - 1) // (2 * fold)


def eval_boundary(c: FourierContour, theta):
    """Boundary point e^{i theta} (b + sum a_k cos(m k theta))."""
    theta = np.asarray(theta, dtype=float)
    return np.exp(1j * theta) * c.radius(theta)


def eval_tangent(c: FourierContour, theta):
    """Analytic d z / d theta (no numerical differentiation)."""
    theta = np.asarray(theta, dtype=float)
    k = np.arange(1, c.coeffs.size + 1)
    ang = np.multiply.outer(theta, c.fold * k)
    r = c.mean_radius + np.cos(ang) @ c.coeffs
    rp = -np.sin(ang) @ (c.coeffs * c.fold * k)
    return np.exp(1j * theta) * (1j * r + rp)


def sample(c: FourierContour, grid: SpectralGrid):
    """Boundary and tangent values on the grid.

    Rejects grids that are not a multiple of the fold, and contours whose
    sampled radius is non-positive (star-shaped ansatz broken).
    """
    mode_count(grid, c.fold)
    theta = grid.nodes
    k = np.arange(1, c.coeffs.size + 1)
    ang = np.multiply.outer(theta, c.fold * k)
    r = c.mean_radius + np.cos(ang) @ c.coeffs
    if r.min() <= 0.0:
        raise DegenerateContourError(
            "sampled radius is non-positive; contour degenerates through the origin")
    rp = -np.sin(ang) @ (c.coeffs * c.fold * k)
    e = np.exp(1j * theta)
    return e * r, e * (1j * r + rp)


def max_radius(c: FourierContour, oversample: int = 4) -> float:
    """Max |z| over an oversampled grid (diagnostic for the gap to the unit circle)."""
    n = oversample * 2 * (c.fold * c.coeffs.size + 1)
    theta = 2.0 * np.pi * np.arange(n) / n
    return float(np.abs(c.radius(theta)).max())


def enclosed_area(c: FourierContour, grid: SpectralGrid) -> float:
    """Area by the Green line integral (1/2) Im oint conj(z) dz on the grid."""
    z, zt = sample(c, grid)
    return float(np.pi / grid.node_count * np.sum((np.conj(z) * zt).imag))


def _golden_min(f, lo: np.ndarray, hi: np.ndarray, iters: int = 64):
    """Vectorized golden-section minimization of f over [lo, hi] per component."""
    for _ in range(iters):
        x1 = hi - _GOLDEN * (hi - lo)
        x2 = lo + _GOLDEN * (hi - lo)
        take_left = f(x1) < f(x2)
        hi = np.where(take_left, x2, hi)
        lo = np.where(take_left, lo, x1)
    xm = 0.5 * (lo + hi)
    return xm, f(xm)


def distance_to_contour(c: FourierContour, points: np.ndarray,
                        coarse: int = 2048, tol: float = 1e-10) -> np.ndarray:
    """Distance from each point to the curve, by coarse scan + golden refinement."""
    points = np.atleast_1d(np.asarray(points, dtype=complex))
    theta = 2.0 * np.pi * np.arange(coarse) / coarse
    zc = eval_boundary(c, theta)
    j = np.argmin(np.abs(points[:, None] - zc[None, :]), axis=1)
    step = 2.0 * np.pi / coarse
    lo, hi = theta[j] - step, theta[j] + step
    iters = max(1, int(np.ceil(np.log(tol / (2 * step)) / np.log(_GOLDEN))))

    def f(t):
        return np.abs(eval_boundary(c, t) - points)

    _, d = _golden_min(f, lo, hi, iters)
    return d


def min_separation(c1: FourierContour, c2: FourierContour, grid: SpectralGrid,
                   tol: float = 1e-10) -> float:
    """Minimum distance between the two curves.

    Grid-level pairwise minimum, then coordinate-descent refinement over the
    two curve parameters with golden-section line searches.
    """
    t1 = grid.nodes
    z1 = eval_boundary(c1, t1)
    z2 = eval_boundary(c2, t1)
    d = np.abs(z1[:, None] - z2[None, :])
    i, j = np.unravel_index(np.argmin(d), d.shape)
    th1, th2 = t1[i], t1[j]
    window = 2.0 * np.pi / grid.node_count
    best = d[i, j]
    for _ in range(40):
        th1, _ = _golden_min(
            lambda t: np.abs(eval_boundary(c1, t) - eval_boundary(c2, th2)),
            np.atleast_1d(th1 - window), np.atleast_1d(th1 + window))
        th1 = float(th1[0])
        th2, val = _golden_min(
            lambda t: np.abs(eval_boundary(c1, th1) - eval_boundary(c2, t)),
            np.atleast_1d(th2 - window), np.atleast_1d(th2 + window))
        th2 = float(th2[0])
        val = float(val[0])
        if best - val < tol:
            best = min(best, val)
            break
        best = val
    return float(best)


@lru_cache(maxsize=32)
def _sine_basis(node_count: int, fold: int, modes: int) -> np.ndarray:
    """Cached matrix S[k-1, i] = sin(m k theta_i), k = 1..M."""
    theta = 2.0 * np.pi * np.arange(node_count) / node_count
    s = np.sin(np.outer(fold * np.arange(1, modes + 1), theta))
    s.flags.writeable = False
    return s
