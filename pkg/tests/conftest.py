"""Shared fixtures: converged states and traced branches, built once per session."""

from __future__ import annotations

import numpy as np
import pytest

from vstates import sc_eigen
from vstates.continuation import ContinuationConfig, seed_from_bifurcation, trace_branch
from vstates.contour import SpectralGrid, mode_count
from vstates.residual import DoublyConnected, SimplyConnected
from vstates.solver import newton_solve, with_omega


@pytest.fixture(scope="session")
def sc3_state():
    """Converged m=3, b=0.8 state just below the bifurcation velocity. N=192."""
    grid = SpectralGrid.for_fold(3, 6)
    _, om3 = sc_eigen(3, 0.8)
    problem = SimplyConnected(b=0.8, omega=om3 - 2e-4, fold=3)
    initial = np.zeros(mode_count(grid, 3))
    initial[0] = 5e-2
    root, report = newton_solve(problem, initial, grid)
    assert report.converged and not report.trivial
    return problem, root, grid


@pytest.fixture(scope="session")
def sc4_state():
    """Converged m=4, b=0.8 state just below the bifurcation velocity. N=256."""
    grid = SpectralGrid.for_fold(4, 6)
    _, om4 = sc_eigen(4, 0.8)
    problem = SimplyConnected(b=0.8, omega=om4 - 2e-4, fold=4)
    initial = np.zeros(mode_count(grid, 4))
    initial[0] = 5e-2
    root, report = newton_solve(problem, initial, grid)
    assert report.converged and not report.trivial
    return problem, root, grid


@pytest.fixture(scope="session")
def sc3_branch():
    """Full m=3, b=0.8 branch at N=192 with a fine step cap (diagram quality)."""
    import time
    grid = SpectralGrid.for_fold(3, 6)
    problem = SimplyConnected(b=0.8, omega=0.0, fold=3)
    seed = seed_from_bifurcation(problem, "sc", grid)
    cfg = ContinuationConfig(step_max=1e-2, max_points=250)
    t0 = time.time()
    branch = trace_branch(seed, grid, cfg)
    return branch, grid, cfg, time.time() - t0


@pytest.fixture(scope="session")
def dc4_branch():
    """Connecting branch m=4, b1=0.8, b2=0.53 from the plus side. N=256."""
    import time
    grid = SpectralGrid.for_fold(4, 6)
    problem = DoublyConnected(b1=0.8, b2=0.53, omega=0.0, fold=4)
    seed = seed_from_bifurcation(problem, "plus", grid)
    cfg = ContinuationConfig(step_max=2e-2, max_points=250)
    t0 = time.time()
    branch = trace_branch(seed, grid, cfg)
    return branch, grid, cfg, time.time() - t0


def reconverge_at_omega(branch, omega_target, grid_out):
    """Re-converge every branch crossing of omega_target on grid_out.

    Consecutive points bracketing the target are linearly interpolated
    (zero-padded to grid_out's mode count) to seed a plain Newton solve at
    the fixed target velocity; distinct converged roots are returned.
    """
    from vstates.continuation import _pad_unknowns

    problem = branch.problem
    modes_out = mode_count(grid_out, problem.fold)
    roots = []
    for prev, cur in zip(branch.points, branch.points[1:]):
        lo, hi = prev.omega, cur.omega
        if not min(lo, hi) <= omega_target <= max(lo, hi):
            continue
        if max(np.abs(prev.coeffs).max(), np.abs(cur.coeffs).max()) < 1e-4:
            continue
        frac = 0.5 if hi == lo else (omega_target - lo) / (hi - lo)
        pc = _pad_unknowns(problem, prev.coeffs, modes_out)
        cc = _pad_unknowns(problem, cur.coeffs, modes_out)
        guess = (1.0 - frac) * pc + frac * cc
        root, rep = newton_solve(with_omega(problem, omega_target), guess, grid_out)
        if rep.converged and not rep.trivial:
            if all(np.abs(root - r).max() > 1e-3 for r in roots):
                roots.append(root)
    return roots


@pytest.fixture(scope="session")
def dc4_state(dc4_branch):
    """Converged m=4, b1=0.8, b2=0.53 state at omega=0.15, from the branch."""
    branch, grid, _, _ = dc4_branch
    roots = reconverge_at_omega(branch, 0.15, grid)
    assert roots, "connecting branch does not cross omega=0.15"
    problem = with_omega(branch.problem, 0.15)
    return problem, roots[0], grid


@pytest.fixture(scope="session")
def contours_of():
    from vstates.solver import contours_from_unknowns
    return contours_from_unknowns
