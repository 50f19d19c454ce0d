"""Rotating vortex patches (V-states) of the 2D Euler equations in the unit disc."""

from .contour import (
    FourierContour,
    SpectralGrid,
    enclosed_area,
    eval_boundary,
    eval_tangent,
    min_separation,
    mode_count,
    sample,
)
from .continuation import (
    Branch,
    BranchPoint,
    ContinuationConfig,
    Seed,
    limiting_estimate,
    seed_from_bifurcation,
    trace_branch,
)
from .dynamics import EvolutionState, boundary_velocity, evolve_rigid_check
from .residual import (
    DoublyConnected,
    Problem,
    ResidualSpectrum,
    SimplyConnected,
    dc_residual_nodes,
    sc_residual_nodes,
    sine_project,
)
from .solver import (
    NewtonConfig,
    NewtonReport,
    assemble_F,
    fd_jacobian,
    newton_solve,
)
from .spectra import (
    DcSpectrum,
    KernelVector,
    b_star,
    dc_matrix,
    dc_spectrum,
    kernel_vector,
    onefold_eigen,
    onefold_intersections,
    sc_eigen,
    transversality_ok,
)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "FourierContour", "SpectralGrid", "enclosed_area", "eval_boundary",
    "eval_tangent", "min_separation", "mode_count", "sample",
    "Branch", "BranchPoint", "ContinuationConfig", "Seed",
    "limiting_estimate", "seed_from_bifurcation", "trace_branch",
    "EvolutionState", "boundary_velocity", "evolve_rigid_check",
    "DoublyConnected", "Problem", "ResidualSpectrum", "SimplyConnected",
    "dc_residual_nodes", "sc_residual_nodes", "sine_project",
    "NewtonConfig", "NewtonReport", "assemble_F", "fd_jacobian", "newton_solve",
    "DcSpectrum", "KernelVector", "b_star", "dc_matrix", "dc_spectrum",
    "kernel_vector", "onefold_eigen", "onefold_intersections", "sc_eigen",
    "transversality_ok", "errors",
]
