"""Newton iteration on the sine-coefficient map of the V-state equations.

The unknown vector holds the cosine coefficients of the boundary ansatz
(stacked outer-then-inner for an annular patch).  The map F returns the
sine coefficients of the node residual; V-states are its nontrivial roots.
The Jacobian is assembled column-by-column from forward differences, and
the stopping criterion is the sup over grid nodes of the reconstructed
sine series of the residual.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .contour import FourierContour, SpectralGrid, mode_count
from .errors import ConfigurationError, GeometryError, SingularSystemError
from .residual import (
    DoublyConnected,
    Problem,
    SimplyConnected,
    dc_residual_nodes,
    sc_residual_nodes,
    sine_project,
    sine_series_sup,
)
from . import spectra

_SINGULAR_COND = 1e14
_TRIVIAL_NORM = 1e-8
_GEOMETRY_HALVINGS = 20


@dataclass(frozen=True)
class NewtonConfig:
    """Iteration controls; fd_step None resolves per problem kind."""

    fd_step: float | None = None
    tol: float = 1e-13
    max_iter: int = 50

    def __post_init__(self):
        if self.fd_step is not None and self.fd_step <= 0.0:
            raise ConfigurationError("fd_step must be positive")
        if self.tol <= 0.0:
            raise ConfigurationError("tol must be positive")
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be >= 1")

    def step_for(self, problem: Problem) -> float:
        if self.fd_step is not None:
            return self.fd_step
        return 1e-9 if isinstance(problem, DoublyConnected) else 1e-10


@dataclass(frozen=True)
class NewtonReport:
    converged: bool
    iterations: int
    final_sup_norm: float
    final_coeff_norm: float

    @property
    def trivial(self) -> bool:
        """True when the iteration landed on the circle/annulus root."""
        return self.final_coeff_norm <= _TRIVIAL_NORM


def unknown_count(problem: Problem, grid: SpectralGrid) -> int:
    m = mode_count(grid, problem.fold)
    return 2 * m if isinstance(problem, DoublyConnected) else m


def contours_from_unknowns(problem: Problem, unknowns: np.ndarray,
                           grid: SpectralGrid):
    """Rebuild the boundary contour(s) encoded by an unknown vector."""
    unknowns = np.asarray(unknowns, dtype=float)
    m = mode_count(grid, problem.fold)
    if isinstance(problem, SimplyConnected):
        if unknowns.size != m:
            raise ConfigurationError(f"expected {m} unknowns, got {unknowns.size}")
        return (FourierContour(problem.b, problem.fold, unknowns),)
    if unknowns.size != 2 * m:
        raise ConfigurationError(f"expected {2 * m} unknowns, got {unknowns.size}")
    return (FourierContour(problem.b1, problem.fold, unknowns[:m]),
            FourierContour(problem.b2, problem.fold, unknowns[m:]))


def assemble_F(problem: Problem, unknowns: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """Sine coefficients of the residual(s); zero exactly at V-states."""
    m = mode_count(grid, problem.fold)
    contours = contours_from_unknowns(problem, unknowns, grid)
    if isinstance(problem, SimplyConnected):
        nodes = sc_residual_nodes(contours[0], problem.omega, grid)
        return sine_project(nodes, problem.fold, m).coeffs
    nodes1, nodes2 = dc_residual_nodes(contours[0], contours[1], problem.omega, grid)
    return np.concatenate([
        sine_project(nodes1, problem.fold, m).coeffs,
        sine_project(nodes2, problem.fold, m).coeffs,
    ])


def residual_sup(problem: Problem, coeffs: np.ndarray, grid: SpectralGrid) -> float:
    """Sup over nodes of the reconstructed sine series (both series for annuli)."""
    m = mode_count(grid, problem.fold)
    n = grid.node_count
    if isinstance(problem, SimplyConnected):
        return sine_series_sup(coeffs, problem.fold, n)
    return max(sine_series_sup(coeffs[:m], problem.fold, n),
               sine_series_sup(coeffs[m:], problem.fold, n))


def fd_jacobian(problem: Problem, unknowns: np.ndarray, grid: SpectralGrid,
                h: float, base: np.ndarray | None = None) -> np.ndarray:
    """Forward-difference Jacobian, column j = (F(u + h e_j) - F(u)) / h."""
    if h <= 0.0:
        raise ConfigurationError("finite-difference step must be positive")
    unknowns = np.asarray(unknowns, dtype=float)
    if base is None:
        base = assemble_F(problem, unknowns, grid)
    n = unknowns.size
    jac = np.empty((n, n))
    for j in range(n):
        shifted = unknowns.copy()
        shifted[j] += h
        jac[:, j] = (assemble_F(problem, shifted, grid) - base) / h
    return jac


def alternating_flip(problem: Problem, coeffs: np.ndarray) -> np.ndarray:
    """Exact half-period rotation of the patch: a_k -> (-1)^k a_k.

    Maps roots to roots (the rotated patch is the same V-state), flipping
    the sign of every odd harmonic, the first one included.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    m = coeffs.size // 2 if isinstance(problem, DoublyConnected) else coeffs.size
    signs = np.where(np.arange(1, m + 1) % 2 == 1, -1.0, 1.0)
    if isinstance(problem, DoublyConnected):
        signs = np.concatenate([signs, signs])
    return coeffs * signs


def normalize_signs(problem: Problem, coeffs: np.ndarray) -> np.ndarray:
    """Fix the leading-coefficient sign by the exact half-period rotation,
    so simply-connected roots return with a_1 > 0 and annular roots with
    a_{1,1} > 0."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs[0] >= 0.0:
        return coeffs.copy()
    return alternating_flip(problem, coeffs)


def _nearest_bifurcation(problem: Problem, grid: SpectralGrid) -> str:
    """Closest spectral Omega to the problem's, for singular-system reporting."""
    m = mode_count(grid, problem.fold)
    best: tuple[float, str] | None = None
    for k in range(1, m + 1):
        n = problem.fold * k
        if isinstance(problem, SimplyConnected):
            candidates = [(spectra.sc_eigen(n, problem.b)[1], f"Omega_{n}")]
        else:
            spec = spectra.dc_spectrum(n, problem.b1, problem.b2)
            if spec.omega_plus is None:
                continue
            candidates = [(spec.omega_plus, f"Omega_{n}^+"), (spec.omega_minus, f"Omega_{n}^-")]
        for omega, name in candidates:
            gap = abs(omega - problem.omega)
            if best is None or gap < best[0]:
                best = (gap, f"{name} = {omega:.10g}")
    if best is None:
        return "no real eigenvalue nearby"
    return best[1]


def newton_solve(problem: Problem, initial: np.ndarray, grid: SpectralGrid,
                 cfg: NewtonConfig = NewtonConfig()):
    """Root-find the sine-coefficient map from an initial coefficient vector.

    Returns (root, NewtonReport).  Non-convergence is reported, not raised;
    a geometry-violating Newton step is retried with a halved step, and a
    numerically singular Jacobian raises SingularSystemError naming the
    nearest bifurcation point.
    """
    a = np.asarray(initial, dtype=float).copy()
    if a.size != unknown_count(problem, grid):
        raise ConfigurationError(
            f"expected {unknown_count(problem, grid)} unknowns, got {a.size}")
    if not np.all(np.isfinite(a)):
        raise ConfigurationError("initial vector contains non-finite values")
    h = cfg.step_for(problem)
    f_val = assemble_F(problem, a, grid)
    sup = residual_sup(problem, f_val, grid)
    iterations = 0
    while sup >= cfg.tol and iterations < cfg.max_iter:
        jac = fd_jacobian(problem, a, grid, h, base=f_val)
        if np.linalg.cond(jac) > _SINGULAR_COND:
            raise SingularSystemError(
                "Jacobian numerically singular; nearest bifurcation: "
                + _nearest_bifurcation(problem, grid))
        step = np.linalg.solve(jac, f_val)
        scale = 1.0
        for _ in range(_GEOMETRY_HALVINGS):
            try:
                trial = a - scale * step
                f_trial = assemble_F(problem, trial, grid)
                break
            except GeometryError:
                scale *= 0.5
        else:
            break
        a, f_val = trial, f_trial
        sup = residual_sup(problem, f_val, grid)
        iterations += 1
    converged = sup < cfg.tol
    if converged:
        a = normalize_signs(problem, a)
        f_val = assemble_F(problem, a, grid)
        sup = residual_sup(problem, f_val, grid)
        converged = sup < cfg.tol
    report = NewtonReport(converged=converged, iterations=iterations,
                          final_sup_norm=sup,
                          final_coeff_norm=float(np.abs(a).max()))
    return a, report


def with_omega(problem: Problem, omega: float) -> Problem:
    """Copy of the problem at a different angular velocity."""
    return replace(problem, omega=omega)
