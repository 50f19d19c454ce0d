"""Boundary-equation residuals for rotating patches in the unit disc.

At each boundary node the residual is

    Re{ (2 Omega conj(z) + C[z] - W[z]) z_theta },

where C is the mean-value Cauchy-type integral (1/2 pi i) oint conj(z-zeta)
/ (z-zeta) dzeta over the patch boundary and W the wall correction
(1/2 pi i) oint |zeta|^2 / (1 - z zeta) dzeta.  Both are evaluated by the
N-point trapezoidal rule, which is spectrally accurate here because the
Cauchy kernel has a removable singularity: its diagonal value is
conj(z_theta)/z_theta.  For a doubly-connected patch each boundary carries
one equation and the inner boundary's contributions enter with opposite
sign.  The residual of an x-axis-symmetric contour is odd in theta, so an
M-term sine expansion captures it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .contour import FourierContour, SpectralGrid, mode_count, sample, _sine_basis
from .errors import (
    BoundaryOrderingError,
    ConfigurationError,
    DegenerateContourError,
    DomainViolationError,
)

# Strict-interior safety margin for |z| < 1; the wall kernel 1/(1 - z zeta)
# is then evaluated directly, |z zeta| < 1 needs no regularization.
_DISC_MARGIN = 1e-12


@dataclass(frozen=True)
class ResidualSpectrum:
    """Sine coefficients of the node residual plus its sup-norm."""

    fold: int
    coeffs: np.ndarray
    sup_norm: float


@dataclass(frozen=True)
class SimplyConnected:
    """Patch with one boundary of mean radius b, at angular velocity omega."""

    b: float
    omega: float
    fold: int

    def __post_init__(self):
        if not 0.0 < self.b < 1.0:
            raise ConfigurationError(f"b must lie in (0,1), got {self.b}")
        if self.fold < 1:
            raise ConfigurationError(f"fold must be >= 1, got {self.fold}")


@dataclass(frozen=True)
class DoublyConnected:
    """Annular patch with mean radii b2 < b1, at angular velocity omega."""

    b1: float
    b2: float
    omega: float
    fold: int

    def __post_init__(self):
        if not 0.0 < self.b2 < self.b1 < 1.0:
            raise ConfigurationError(
                f"radii must satisfy 0 < b2 < b1 < 1, got b1={self.b1}, b2={self.b2}")
        if self.fold < 1:
            raise ConfigurationError(f"fold must be >= 1, got {self.fold}")


Problem = Union[SimplyConnected, DoublyConnected]


def _check_inside_disc(z: np.ndarray) -> None:
    if np.abs(z).max() >= 1.0 - _DISC_MARGIN:
        raise DomainViolationError("boundary node on or outside the unit circle")


def _self_interaction(z: np.ndarray, zt: np.ndarray) -> np.ndarray:
    """(1/2 pi) oint of the Cauchy-ratio kernel over the node's own curve.

    Diagonal j = i uses the kernel's limit conj(z_theta)/z_theta.
    """
    n = z.size
    d = z[:, None] - z[None, :]
    np.fill_diagonal(d, 1.0)
    if np.any(d == 0.0):
        raise DegenerateContourError("boundary nodes collide")
    kern = np.conj(d) / d
    idx = np.arange(n)
    kern[idx, idx] = np.conj(zt) / zt
    return (kern @ zt) / n


def _cross_interaction(z_target: np.ndarray, z_src: np.ndarray,
                       zt_src: np.ndarray) -> np.ndarray:
    """Same kernel with source nodes on the other (disjoint) curve."""
    d = z_target[:, None] - z_src[None, :]
    if np.any(d == 0.0):
        raise BoundaryOrderingError("inner and outer boundary nodes collide")
    return ((np.conj(d) / d) @ zt_src) / z_src.size


def _wall_interaction(z_target: np.ndarray, z_src: np.ndarray,
                      zt_src: np.ndarray) -> np.ndarray:
    """(1/2 pi) oint |zeta|^2 zt /(1 - z zeta): image-vorticity term of the wall."""
    w = (z_src.real**2 + z_src.imag**2) * zt_src
    return ((1.0 / (1.0 - z_target[:, None] * z_src[None, :])) @ w) / z_src.size


def sc_residual_nodes(c: FourierContour, omega: float, grid: SpectralGrid) -> np.ndarray:
    """Node values of the simply-connected V-state equation."""
    z, zt = sample(c, grid)
    _check_inside_disc(z)
    bracket = (2.0 * omega * np.conj(z)
               - 1j * _self_interaction(z, zt)
               + 1j * _wall_interaction(z, z, zt))
    return (bracket * zt).real


def dc_residual_nodes(c1: FourierContour, c2: FourierContour, omega: float,
                      grid: SpectralGrid):
    """Node values of the two coupled equations of an annular V-state.

    c1 is the outer boundary, c2 the inner one; both counterclockwise.
    Requires c2 strictly inside c1 (radial ordering at the shared nodes).
    """
    if c1.fold != c2.fold:
        raise ConfigurationError("outer and inner contours must share the fold")
    z1, zt1 = sample(c1, grid)
    z2, zt2 = sample(c2, grid)
    _check_inside_disc(z1)
    _check_inside_disc(z2)
    theta = grid.nodes
    if np.any(c2.radius(theta) >= c1.radius(theta)):
        raise BoundaryOrderingError(
            "inner boundary is not strictly inside the outer one")
    bracket1 = (2.0 * omega * np.conj(z1)
                - 1j * (_self_interaction(z1, zt1) - _cross_interaction(z1, z2, zt2)
                        - _wall_interaction(z1, z1, zt1) + _wall_interaction(z1, z2, zt2)))
    bracket2 = (2.0 * omega * np.conj(z2)
                - 1j * (_cross_interaction(z2, z1, zt1) - _self_interaction(z2, zt2)
                        - _wall_interaction(z2, z1, zt1) + _wall_interaction(z2, z2, zt2)))
    return (bracket1 * zt1).real, (bracket2 * zt2).real


def sine_project(values: np.ndarray, fold: int, modes: int) -> ResidualSpectrum:
    """Orthogonal projection b_k = (2/N) sum_i values_i sin(m k theta_i)."""
    values = np.asarray(values, dtype=float)
    n = values.size
    if n % fold != 0:
        raise ConfigurationError(f"value count {n} is not a multiple of the fold {fold}")
    if n < 2 * fold * modes + 1:
        raise ConfigurationError(
            f"N={n} undersamples M={modes} modes of fold {fold} (need N >= 2mM+1)")
    basis = _sine_basis(n, fold, modes)
    coeffs = (2.0 / n) * (basis @ values)
    return ResidualSpectrum(fold=fold, coeffs=coeffs, sup_norm=float(np.abs(values).max()))


def sine_series_sup(coeffs: np.ndarray, fold: int, node_count: int) -> float:
    """Sup over grid nodes of the reconstructed series sum b_k sin(m k theta)."""
    coeffs = np.asarray(coeffs, dtype=float)
    basis = _sine_basis(node_count, fold, coeffs.size)
    return float(np.abs(coeffs @ basis).max())


def residual_modes(grid: SpectralGrid, fold: int) -> int:
    """Mode count M used for the sine expansion on this grid."""
    return mode_count(grid, fold)
