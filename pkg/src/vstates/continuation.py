"""Branch tracing from bifurcation points through saddle-node folds.

The first nontrivial point is found by plain Newton at a small offset from
the bifurcation velocity; because branch amplitude grows like the square
root of the offset, the offset is halved geometrically until the seed
amplitude lands inside the Newton basin of the nontrivial root.  From
there the branch is advanced by pseudo-arclength steps in (coefficients,
Omega) space: secant predictor, Newton corrector on the residual map
augmented with the arclength constraint.  Folds are traversed naturally
and recorded where the Omega-direction reverses.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .contour import max_radius, min_separation, SpectralGrid
from .errors import (
    ConfigurationError,
    GeometryError,
    NoBifurcationError,
    SeedError,
    SingularSystemError,
)
from .residual import DoublyConnected, Problem, SimplyConnected
from .solver import (
    NewtonConfig,
    assemble_F,
    contours_from_unknowns,
    fd_jacobian,
    newton_solve,
    residual_sup,
    with_omega,
)
from . import spectra


@dataclass(frozen=True)
class ContinuationConfig:
    step0: float = 5e-3
    step_min: float = 1e-6
    step_max: float = 5e-2
    gap_floor: float = 5e-3
    max_points: int = 400
    epsilon: float = 1e-3
    delta_omega: float = 1e-3
    seed_shrinks: int = 22
    auto_flip_direction: bool = True
    corrector_max_iter: int = 8
    fast_iterations: int = 3
    grow_after: int = 2
    tail_energy_threshold: float = 1e-10
    max_node_count: int = 2048
    refine_folds: bool = True
    fold_refine_rounds: int = 7
    corner_slope_threshold: float = -1.8
    near_contact_threshold: float = 1.5e-2
    boundary_touch_threshold: float = 1e-2
    trivial_norm: float = 1e-5
    newton: NewtonConfig = field(default_factory=NewtonConfig)


@dataclass(frozen=True)
class Seed:
    """Starting data for trace_branch: problem at Omega_start plus seed vector."""

    problem: Problem
    coeffs: np.ndarray
    bifurcation_omega: float
    branch: str
    epsilon: float
    delta_omega: float


@dataclass(frozen=True)
class BranchPoint:
    omega: float
    coeffs: np.ndarray
    sup_residual: float
    a_first: float
    a_inner_first: float | None
    gap_unit_circle: float
    gap_boundaries: float | None
    node_count: int


@dataclass
class Branch:
    problem: Problem
    branch_label: str
    bifurcation_omega: float
    points: list[BranchPoint]
    fold_indices: list[int]
    termination_reason: str

    @property
    def omegas(self) -> np.ndarray:
        return np.array([p.omega for p in self.points])


def seed_from_bifurcation(problem: Problem, branch: str, grid: SpectralGrid,
                          eps: float = 1e-3, delta_omega: float = -1e-3) -> Seed:
    """Seed at Omega offset from the bifurcation point of the requested branch.

    branch is 'sc' for a simply-connected problem and 'plus'/'minus' for an
    annular one.  The seed vector puts eps on the first harmonic; annular
    seeds distribute it along the kernel direction of the mode matrix.
    Raises NoBifurcationError when the mode has no real eigenvalue pair.
    """
    from .solver import unknown_count

    if eps == 0.0:
        raise ConfigurationError("seed amplitude must be nonzero")
    n_unknowns = unknown_count(problem, grid)
    coeffs = np.zeros(n_unknowns)
    if isinstance(problem, SimplyConnected):
        if branch != "sc":
            raise ConfigurationError("simply-connected problems seed the 'sc' branch")
        _, omega_bif = spectra.sc_eigen(problem.fold, problem.b)
        coeffs[0] = eps
    else:
        if branch not in ("plus", "minus"):
            raise ConfigurationError("annular problems seed the 'plus' or 'minus' branch")
        m, b1, b2 = problem.fold, problem.b1, problem.b2
        spec = spectra.dc_spectrum(m, b1, b2)
        if spec.delta < 0.0:
            raise NoBifurcationError(
                f"mode {m} does not bifurcate at b1={b1}, b2={b2}: the mode condition "
                f"m > (2 + 2(b2/b1)^m - (b1^m + b2^m)^2)/(1 - (b2/b1)^2) fails "
                f"(Delta_{m} = {spec.delta:.3e} < 0)")
        omega_bif = spec.omega_plus if branch == "plus" else spec.omega_minus
        # Omega^+ pairs with lambda^-, Omega^- with lambda^+.
        lam_branch = "minus" if branch == "plus" else "plus"
        kv = spectra.kernel_vector(m, lam_branch, b1, b2)
        if m == 1 and branch == "plus":
            warnings.warn(
                "bifurcation from Omega_1^+ (the lambda_1^- eigenvalue) has no "
                "theoretical guarantee; proceeding numerically", stacklevel=2)
        if m == 1:
            inters = spectra.onefold_intersections(b1, n_max=max(2, int(2.0 / (1 - b1))))
            nearest = min((abs(b2 - x) for _, x in inters), default=np.inf)
            if nearest < 1e-6:
                warnings.warn(
                    f"inner radius within {nearest:.1e} of an exceptional radius "
                    "(two-dimensional kernel); bifurcation behavior is not guaranteed",
                    stacklevel=2)
        half = n_unknowns // 2
        coeffs[0] = eps * kv.components[0]
        coeffs[half] = eps * kv.components[1]
    return Seed(problem=with_omega(problem, omega_bif + delta_omega),
                coeffs=coeffs, bifurcation_omega=omega_bif, branch=branch,
                epsilon=eps, delta_omega=delta_omega)


def _validate_first_point(problem: Problem, root: np.ndarray, omega: float,
                          grid: SpectralGrid, cfg: ContinuationConfig) -> bool:
    """Re-converge a candidate first point at doubled resolution.

    Very close to the bifurcation the finite-difference Jacobian cannot
    resolve the near-singular mode and Newton can fabricate spurious small
    roots; those are resolution-dependent, while genuine roots re-converge
    at 2N with matching coefficients.
    """
    from .contour import mode_count

    fine = SpectralGrid(2 * grid.node_count)
    padded = _pad_unknowns(problem, root, mode_count(fine, problem.fold))
    try:
        refined, rep = newton_solve(with_omega(problem, omega), padded, fine,
                                    cfg.newton)
    except (GeometryError, SingularSystemError):
        return False
    if not rep.converged:
        return False
    outer_old, inner_old = _split(problem, root)
    outer_new, inner_new = _split(problem, refined)
    agree = np.abs(outer_new[:outer_old.size] - outer_old).max()
    if inner_old is not None:
        agree = max(agree, np.abs(inner_new[:inner_old.size] - inner_old).max())
    # spurious roots move by their own magnitude under refinement; genuine
    # ones by the discretization error amplified through the nearly
    # singular leading mode, three-plus orders smaller
    return agree <= max(1e-8, 1e-3 * np.abs(root).max())


def _polish(problem: Problem, root: np.ndarray, omega: float,
            grid: SpectralGrid, cfg: ContinuationConfig) -> np.ndarray:
    """Two extra Newton steps past the stopping tolerance.

    Near the bifurcation the leading mode of the Jacobian is tiny, so a
    root stopped at the sup-norm tolerance still carries a 1e3..1e6 times
    larger error along that mode; the extra steps push it to the roundoff
    floor, which keeps branches seeded from opposite signs coincident.
    """
    p_om = with_omega(problem, omega)
    h = cfg.newton.step_for(problem)
    best = root
    best_sup = residual_sup(p_om, assemble_F(p_om, best, grid), grid)
    current = root
    for _ in range(2):
        try:
            f_val = assemble_F(p_om, current, grid)
            jac = fd_jacobian(p_om, current, grid, h, base=f_val)
            current = current - np.linalg.solve(jac, f_val)
            sup = residual_sup(p_om, assemble_F(p_om, current, grid), grid)
        except (GeometryError, np.linalg.LinAlgError):
            break
        if sup <= best_sup:
            best, best_sup = current, sup
    return best


def _hunt_first_point(seed: Seed, grid: SpectralGrid, cfg: ContinuationConfig):
    """Plain Newton at geometrically shrinking offsets until a nontrivial root.

    The branch amplitude shrinks like sqrt(offset), so halving the offset
    walks the root amplitude down toward the seed amplitude; the first
    converged root inside the amplitude window is validated at doubled
    resolution before being accepted.
    """
    eps = abs(seed.epsilon)
    directions = [seed.delta_omega]
    if cfg.auto_flip_direction:
        directions.append(-seed.delta_omega)
    for delta in directions:
        for k in range(cfg.seed_shrinks):
            omega = seed.bifurcation_omega + delta * 0.5 ** k
            try:
                root, rep = newton_solve(with_omega(seed.problem, omega),
                                         seed.coeffs, grid, cfg.newton)
            except (GeometryError, SingularSystemError):
                continue
            amp = np.abs(root).max()
            if not (rep.converged and 0.3 * eps <= amp <= 10.0 * eps):
                continue
            if _validate_first_point(seed.problem, root, omega, grid, cfg):
                return _polish(seed.problem, root, omega, grid, cfg), omega
    raise SeedError(
        "no nontrivial root near the bifurcation point; try a smaller seed "
        "amplitude or offset, or the opposite offset sign")


def _split(problem: Problem, coeffs: np.ndarray):
    if isinstance(problem, DoublyConnected):
        half = coeffs.size // 2
        return coeffs[:half], coeffs[half:]
    return coeffs, None


def _pad_unknowns(problem: Problem, coeffs: np.ndarray, new_modes: int) -> np.ndarray:
    outer, inner = _split(problem, coeffs)
    padded = np.zeros(new_modes)
    padded[:outer.size] = outer
    if inner is None:
        return padded
    padded2 = np.zeros(new_modes)
    padded2[:inner.size] = inner
    return np.concatenate([padded, padded2])


def _make_point(problem: Problem, coeffs: np.ndarray, omega: float,
                grid: SpectralGrid) -> BranchPoint:
    p = with_omega(problem, omega)
    contours = contours_from_unknowns(p, coeffs, grid)
    sup = residual_sup(p, assemble_F(p, coeffs, grid), grid)
    gap_unit = 1.0 - max(max_radius(c) for c in contours)
    outer, inner = _split(problem, coeffs)
    if inner is None:
        gap_bnd = None
        a_inner = None
    else:
        gap_bnd = min_separation(contours[0], contours[1], grid)
        a_inner = float(inner[0])
    return BranchPoint(omega=omega, coeffs=coeffs.copy(), sup_residual=sup,
                       a_first=float(outer[0]), a_inner_first=a_inner,
                       gap_unit_circle=gap_unit, gap_boundaries=gap_bnd,
                       node_count=grid.node_count)


def _corrector(problem: Problem, coeffs: np.ndarray, omega: float,
               tangent: np.ndarray, anchor: np.ndarray, step: float,
               grid: SpectralGrid, cfg: ContinuationConfig):
    """Newton on the residual map plus the arclength constraint."""
    n = coeffs.size
    h = cfg.newton.step_for(problem)
    tol = cfg.newton.tol
    for it in range(1, cfg.corrector_max_iter + 1):
        try:
            f_val = assemble_F(with_omega(problem, omega), coeffs, grid)
        except GeometryError:
            return None
        sup = residual_sup(problem, f_val, grid)
        cons = tangent[:n] @ (coeffs - anchor[:n]) + tangent[n] * (omega - anchor[n]) - step
        if sup < tol and abs(cons) < 1e-10:
            return coeffs, omega, it
        try:
            jac = np.empty((n + 1, n + 1))
            jac[:n, :n] = fd_jacobian(with_omega(problem, omega), coeffs, grid, h,
                                      base=f_val)
            jac[:n, n] = (assemble_F(with_omega(problem, omega + h), coeffs, grid)
                          - f_val) / h
            jac[n, :n] = tangent[:n]
            jac[n, n] = tangent[n]
            update = np.linalg.solve(jac, np.concatenate([f_val, [cons]]))
        except (GeometryError, np.linalg.LinAlgError):
            return None
        coeffs = coeffs - update[:n]
        omega = omega - update[n]
    return None


def _refine_fold(problem: Problem, triple: list[np.ndarray], grid: SpectralGrid,
                 cfg: ContinuationConfig) -> np.ndarray | None:
    """Locate the Omega-extremum between three consecutive branch points.

    Successive parabolic interpolation of Omega against arclength: fit the
    three points, correct a new point at the parabola's vertex, and refit.
    Returns the extremal point, or None when refinement cannot improve it.
    """
    pts = list(triple)
    maximizing = pts[1][-1] > 0.5 * (pts[0][-1] + pts[2][-1])
    best = pts[1]
    tangent = pts[2] - pts[0]
    norm = np.linalg.norm(tangent)
    if norm == 0.0:
        return None
    tangent /= norm

    def correct_at(anchor, s):
        predicted = anchor + s * tangent
        result = _corrector(problem, predicted[:-1].copy(), predicted[-1],
                            tangent, anchor, s, grid, cfg)
        if result is None:
            return None
        coeffs, omega, _ = result
        return np.concatenate([coeffs, [omega]])

    # stage 1: parabolic interpolation of Omega(s), down to Omega resolution
    for _ in range(cfg.fold_refine_rounds):
        anchor = pts[1]
        s = np.array([tangent @ (p - anchor) for p in pts])
        omegas = np.array([p[-1] for p in pts])
        try:
            quad, lin, _ = np.polyfit(s, omegas, 2)
        except np.linalg.LinAlgError:
            break
        if quad == 0.0 or (quad > 0) == maximizing:
            break
        vertex = -lin / (2.0 * quad)
        if abs(vertex) < 1e-12:
            break
        fresh = correct_at(anchor, vertex)
        if fresh is None:
            break
        pts.append(fresh)
        pts.sort(key=lambda p: abs(tangent @ (p - fresh)))
        pts = pts[:3]
        pts.sort(key=lambda p: tangent @ (p - fresh))
        better = (fresh[-1] > best[-1]) if maximizing else (fresh[-1] < best[-1])
        if better:
            best = fresh

    # stage 2: secant on dOmega/ds, a signal linear in the arclength offset
    anchor = best
    probe = 1e-4

    def slope(s):
        left = correct_at(anchor, s - probe)
        right = correct_at(anchor, s + probe)
        if left is None or right is None:
            return None
        return (right[-1] - left[-1]) / (2.0 * probe)

    s0, s1 = 0.0, 2.0 * probe
    g0, g1 = slope(s0), slope(s1)
    for _ in range(6):
        if g0 is None or g1 is None or g1 == g0:
            break
        s_next = s1 - g1 * (s1 - s0) / (g1 - g0)
        if not np.isfinite(s_next) or abs(s_next) > 10 * abs(
                tangent @ (triple[2] - triple[0])):
            break
        if abs(s_next - s1) < 1e-10:
            s1 = s_next
            break
        s0, g0 = s1, g1
        s1 = s_next
        g1 = slope(s1)
    located = correct_at(anchor, s1)
    if located is not None:
        better = (located[-1] >= best[-1]) if maximizing else (located[-1] <= best[-1])
        if better:
            best = located
    return None if best is triple[1] else best


def spectral_tail_energy(coeffs: np.ndarray) -> float:
    """Energy fraction carried by the top tenth of the mode range."""
    total = float(np.sum(coeffs**2))
    if total == 0.0:
        return 0.0
    start = (9 * coeffs.size) // 10
    return float(np.sum(coeffs[start:] ** 2)) / total


def spectral_slope(coeffs: np.ndarray) -> float | None:
    """Least-squares slope of log|a_k| against log k over the top half of modes."""
    m = coeffs.size
    k = np.arange(1, m + 1)
    mask = (k > m // 2) & (np.abs(coeffs) > 1e-300)
    if mask.sum() < 3:
        return None
    x = np.log(k[mask].astype(float))
    y = np.log(np.abs(coeffs[mask]))
    x = x - x.mean()
    return float((x @ (y - y.mean())) / (x @ x))


def _tail_trigger(problem: Problem, coeffs: np.ndarray, threshold: float) -> bool:
    outer, inner = _split(problem, coeffs)
    tail = spectral_tail_energy(outer)
    if inner is not None:
        tail = max(tail, spectral_tail_energy(inner))
    return tail > threshold


def trace_branch(seed: Seed, grid: SpectralGrid, cfg: ContinuationConfig = ContinuationConfig()) -> Branch:
    """Advance the branch by pseudo-arclength steps until a stopping event.

    Terminates on limiting proximity (gap to the unit circle, or between the
    two boundaries, below gap_floor), on the step shrinking under step_min,
    on the point budget, on reconnection to the trivial solution, or on an
    unrecoverable solver failure.  The traced points keep the seed's sign;
    the whole branch is rotated by a half period at the end if needed so
    that the leading coefficient of the first point is positive.
    """
    from .contour import mode_count

    problem = seed.problem
    root, omega0 = _hunt_first_point(seed, grid, cfg)
    points = [_make_point(problem, root, omega0, grid)]
    fold_indices: list[int] = []
    termination = "max-points"
    modes = root.size if isinstance(problem, SimplyConnected) else root.size // 2
    y_prev = np.concatenate([np.zeros(root.size), [seed.bifurcation_omega]])
    y = np.concatenate([root, [omega0]])
    step = cfg.step0
    fast_streak = 0
    last_sign = 0.0

    def maybe_escalate(coeffs, omega, current_grid):
        nonlocal modes
        if not _tail_trigger(problem, coeffs, cfg.tail_energy_threshold):
            return coeffs, current_grid, False
        if 2 * current_grid.node_count > cfg.max_node_count:
            return coeffs, current_grid, False
        fine = SpectralGrid(2 * current_grid.node_count)
        new_modes = mode_count(fine, problem.fold)
        padded = _pad_unknowns(problem, coeffs, new_modes)
        try:
            refined, rep = newton_solve(with_omega(problem, omega), padded, fine,
                                        cfg.newton)
        except (GeometryError, SingularSystemError):
            return coeffs, current_grid, False
        if not rep.converged:
            return coeffs, current_grid, False
        if refined[0] * coeffs[0] < 0.0:
            from .solver import alternating_flip
            refined = alternating_flip(problem, refined)
        modes = new_modes
        return refined, fine, True

    while len(points) < cfg.max_points:
        tangent = y - y_prev
        norm = np.linalg.norm(tangent)
        if norm == 0.0:
            termination = "solver-failure"
            break
        tangent /= norm
        predicted = y + step * tangent
        result = _corrector(problem, predicted[:-1].copy(), predicted[-1],
                            tangent, y, step, grid, cfg)
        if result is None:
            fast_streak = 0
            step *= 0.5
            if step < cfg.step_min:
                termination = "step-floor"
                break
            continue
        coeffs, omega, iters = result
        if iters <= cfg.fast_iterations:
            fast_streak += 1
            if fast_streak >= cfg.grow_after:
                step = min(2.0 * step, cfg.step_max)
                fast_streak = 0
        else:
            fast_streak = 0
        coeffs, grid, escalated = maybe_escalate(coeffs, omega, grid)
        if escalated:
            y = np.concatenate([_pad_unknowns(problem, y[:-1], modes), [y[-1]]])
        y_prev = y
        y = np.concatenate([coeffs, [omega]])
        point = _make_point(problem, coeffs, omega, grid)
        points.append(point)
        d_omega = omega - y_prev[-1]
        sign = np.sign(d_omega) if abs(d_omega) > 1e-12 else 0.0
        if sign != 0.0:
            if last_sign != 0.0 and sign != last_sign:
                fold_idx = len(points) - 2
                if (cfg.refine_folds and fold_idx >= 1
                        and points[fold_idx - 1].node_count == grid.node_count
                        and points[fold_idx].node_count == grid.node_count):
                    triple = [
                        np.concatenate([points[fold_idx - 1].coeffs,
                                        [points[fold_idx - 1].omega]]),
                        np.concatenate([points[fold_idx].coeffs,
                                        [points[fold_idx].omega]]),
                        y,
                    ]
                    refined = _refine_fold(problem, triple, grid, cfg)
                    if refined is not None:
                        points[fold_idx] = _make_point(problem, refined[:-1],
                                                       refined[-1], grid)
                fold_indices.append(fold_idx)
            last_sign = sign
        if np.abs(coeffs).max() < cfg.trivial_norm:
            termination = "trivial-reconnect"
            break
        if point.gap_unit_circle < cfg.gap_floor:
            termination = "limiting-proximity"
            break
        if point.gap_boundaries is not None and point.gap_boundaries < cfg.gap_floor:
            termination = "limiting-proximity"
            break

    if points and points[0].a_first < 0.0:
        points = [_flip_point(problem, p) for p in points]
    return Branch(problem=problem, branch_label=seed.branch,
                  bifurcation_omega=seed.bifurcation_omega, points=points,
                  fold_indices=fold_indices, termination_reason=termination)


def _flip_point(problem: Problem, p: BranchPoint) -> BranchPoint:
    from .solver import alternating_flip

    coeffs = alternating_flip(problem, p.coeffs)
    outer, inner = _split(problem, coeffs)
    return BranchPoint(omega=p.omega, coeffs=coeffs, sup_residual=p.sup_residual,
                       a_first=float(outer[0]),
                       a_inner_first=None if inner is None else float(inner[0]),
                       gap_unit_circle=p.gap_unit_circle,
                       gap_boundaries=p.gap_boundaries, node_count=p.node_count)


@dataclass(frozen=True)
class LimitingEstimate:
    point: BranchPoint
    classification: str
    tail_slope: float | None


def limiting_estimate(branch: Branch, cfg: ContinuationConfig = ContinuationConfig()) -> LimitingEstimate:
    """Classify the last converged point of a terminated branch.

    Returns 'inconclusive' when the branch ran out of point budget rather
    than reaching a limiting event.
    """
    if not branch.points:
        raise ConfigurationError("branch has no points")
    point = branch.points[-1]
    outer, inner = _split(branch.problem, point.coeffs)
    slopes = [s for s in (spectral_slope(outer),
                          None if inner is None else spectral_slope(inner))
              if s is not None]
    slope = max(slopes) if slopes else None
    if branch.termination_reason not in ("limiting-proximity", "step-floor"):
        return LimitingEstimate(point, "inconclusive", slope)
    if point.gap_boundaries is not None and point.gap_boundaries < cfg.near_contact_threshold:
        return LimitingEstimate(point, "inner-outer-near-contact", slope)
    if point.gap_unit_circle < cfg.boundary_touch_threshold:
        return LimitingEstimate(point, "boundary-touching", slope)
    if slope is not None and slope > cfg.corner_slope_threshold:
        return LimitingEstimate(point, "corner-forming", slope)
    return LimitingEstimate(point, "inconclusive", slope)
