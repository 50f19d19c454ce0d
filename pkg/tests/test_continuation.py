import warnings

import numpy as np
import pytest

from vstates.continuation import (
    Branch,
    BranchPoint,
    ContinuationConfig,
    _pad_unknowns,
    limiting_estimate,
    seed_from_bifurcation,
    spectral_slope,
    spectral_tail_energy,
    trace_branch,
)
from vstates.contour import SpectralGrid
from vstates.errors import ConfigurationError, NoBifurcationError
from vstates.residual import DoublyConnected, SimplyConnected
from vstates.solver import fd_jacobian, newton_solve, with_omega
from vstates.spectra import b_star, dc_spectrum, sc_eigen


class TestSeed:
    def test_sc_seed(self):
        grid = SpectralGrid.for_fold(3, 5)
        p = SimplyConnected(b=0.8, omega=0.0, fold=3)
        seed = seed_from_bifurcation(p, "sc", grid, eps=1e-3, delta_omega=-1e-3)
        _, om3 = sc_eigen(3, 0.8)
        assert abs(seed.bifurcation_omega - om3) < 1e-15
        assert abs(seed.problem.omega - (om3 - 1e-3)) < 1e-15
        assert seed.coeffs[0] == 1e-3
        assert np.abs(seed.coeffs[1:]).max() == 0.0

    def test_dc_seed_plus(self):
        grid = SpectralGrid.for_fold(4, 5)
        p = DoublyConnected(b1=0.8, b2=0.53, omega=0.0, fold=4)
        seed = seed_from_bifurcation(p, "plus", grid)
        spec = dc_spectrum(4, 0.8, 0.53)
        assert abs(seed.bifurcation_omega - spec.omega_plus) < 1e-15
        assert abs(spec.omega_plus - 0.1671) < 5e-4
        half = seed.coeffs.size // 2
        assert seed.coeffs[0] > 0
        assert seed.coeffs[half] < 0
        assert abs(np.hypot(seed.coeffs[0], seed.coeffs[half]) - 1e-3) < 1e-18

    def test_no_bifurcation_error(self):
        grid = SpectralGrid.for_fold(2, 5)
        top = b_star(2, 0.25)
        p = DoublyConnected(b1=0.25, b2=min(top * 1.5, 0.24), omega=0.0, fold=2)
        with pytest.raises(NoBifurcationError):
            seed_from_bifurcation(p, "plus", grid)

    def test_onefold_plus_warns(self):
        grid = SpectralGrid.for_fold(1, 5)
        p = DoublyConnected(b1=0.9, b2=0.3, omega=0.0, fold=1)
        with pytest.warns(UserWarning, match="no\\s+theoretical guarantee"):
            seed = seed_from_bifurcation(p, "plus", grid)
        assert abs(seed.bifurcation_omega - 4.0 / 9.0) < 1e-12

    def test_onefold_minus_quiet(self):
        grid = SpectralGrid.for_fold(1, 5)
        p = DoublyConnected(b1=0.9, b2=0.3, omega=0.0, fold=1)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            seed = seed_from_bifurcation(p, "minus", grid)
        assert abs(seed.bifurcation_omega - 0.36) < 1e-12

    def test_exceptional_inner_radius_warns(self):
        from vstates.spectra import onefold_intersections

        grid = SpectralGrid.for_fold(1, 5)
        b1 = 0.75
        _, x_n = onefold_intersections(b1, 10)[0]
        p = DoublyConnected(b1=b1, b2=x_n + 5e-7, omega=0.0, fold=1)
        with pytest.warns(UserWarning, match="exceptional"):
            seed_from_bifurcation(p, "minus", grid)

    def test_bad_branch_labels(self):
        grid = SpectralGrid.for_fold(3, 5)
        p = SimplyConnected(b=0.8, omega=0.0, fold=3)
        with pytest.raises(ConfigurationError):
            seed_from_bifurcation(p, "plus", grid)
        q = DoublyConnected(b1=0.8, b2=0.4, omega=0.0, fold=3)
        with pytest.raises(ConfigurationError):
            seed_from_bifurcation(q, "sc", grid)


class TestPadding:
    def test_sc(self):
        p = SimplyConnected(b=0.5, omega=0.1, fold=2)
        out = _pad_unknowns(p, np.array([1.0, 2.0]), 4)
        assert np.array_equal(out, [1.0, 2.0, 0.0, 0.0])

    def test_dc_interleave(self):
        p = DoublyConnected(b1=0.5, b2=0.2, omega=0.1, fold=2)
        out = _pad_unknowns(p, np.array([1.0, 2.0, 3.0, 4.0]), 3)
        assert np.array_equal(out, [1.0, 2.0, 0.0, 3.0, 4.0, 0.0])


class TestTraceScBranch:
    def test_initial_direction_is_left(self, sc3_branch):
        branch, _, _, _ = sc3_branch
        assert branch.points[0].omega < branch.bifurcation_omega

    def test_folds_traversed(self, sc3_branch):
        branch, _, _, _ = sc3_branch
        assert len(branch.fold_indices) >= 2
        # fold indices mark where the omega direction reverses
        omegas = branch.omegas
        for idx in branch.fold_indices:
            left = omegas[idx] - omegas[idx - 1] if idx > 0 else \
                omegas[idx] - branch.bifurcation_omega
            right = omegas[idx + 1] - omegas[idx]
            assert left * right < 0

    def test_all_points_converged(self, sc3_branch):
        branch, _, cfg, _ = sc3_branch
        for p in branch.points:
            assert p.sup_residual < cfg.newton.tol

    def test_normalized_leading_sign(self, sc3_branch):
        branch, _, _, _ = sc3_branch
        assert branch.points[0].a_first > 0

    def test_terminates_at_wall_proximity(self, sc3_branch):
        branch, _, cfg, _ = sc3_branch
        assert branch.termination_reason == "limiting-proximity"
        assert branch.points[-1].gap_unit_circle < cfg.gap_floor

    def test_points_reconverge_at_fixed_omega(self, sc3_branch):
        branch, grid, _, _ = sc3_branch
        near_fold = set()
        for idx in branch.fold_indices:
            near_fold.update(range(idx - 2, idx + 3))
        checked = 0
        for i, p in enumerate(branch.points):
            if i in near_fold or p.node_count != grid.node_count:
                continue
            if checked % 5 != 0:  # spot-check every fifth point
                checked += 1
                continue
            checked += 1
            root, rep = newton_solve(with_omega(branch.problem, p.omega),
                                     p.coeffs, grid)
            assert rep.converged
            assert np.abs(root - p.coeffs).max() <= 1e-10

    def test_fold_jacobian_is_near_singular(self, sc3_branch):
        # the forward-difference Jacobian carries an ~1e-8 noise floor on its
        # singular values, so even at an exactly located fold its condition
        # number saturates near 1e8; require two orders above regular points
        branch, grid, _, _ = sc3_branch
        for idx in branch.fold_indices[:2]:
            p = branch.points[idx]
            if p.node_count != grid.node_count:
                continue
            jac = fd_jacobian(with_omega(branch.problem, p.omega), p.coeffs,
                              grid, 1e-10)
            assert np.linalg.cond(jac) > 1e7

    def test_limiting_estimate_touches_wall(self, sc3_branch):
        branch, _, cfg, _ = sc3_branch
        est = limiting_estimate(branch, cfg)
        assert est.classification == "boundary-touching"
        assert est.point.gap_unit_circle < cfg.boundary_touch_threshold


class TestBranchSymmetry:
    def test_seed_sign_is_quotiented(self):
        grid = SpectralGrid.for_fold(3, 5)
        problem = SimplyConnected(b=0.8, omega=0.0, fold=3)
        cfg = ContinuationConfig(max_points=8, step_max=5e-3)
        branches = []
        for eps in (1e-3, -1e-3):
            seed = seed_from_bifurcation(problem, "sc", grid, eps=eps)
            branches.append(trace_branch(seed, grid, cfg))
        a, b = branches
        assert len(a.points) == len(b.points)
        for i, (pa, pb) in enumerate(zip(a.points, b.points)):
            assert abs(pa.omega - pb.omega) <= 1e-9
            # the seed point sits where the leading mode of the Jacobian is
            # nearly singular, so its root is conditioned ~1e6 worse
            tol = 1e-7 if i == 0 else 1e-9
            assert np.abs(pa.coeffs - pb.coeffs).max() <= tol


class TestLimitingClassifier:
    def _fake_branch(self, problem, coeffs, gap_unit, gap_bnd, reason):
        point = BranchPoint(omega=0.3, coeffs=coeffs, sup_residual=0.0,
                            a_first=float(coeffs[0]), a_inner_first=None,
                            gap_unit_circle=gap_unit, gap_boundaries=gap_bnd,
                            node_count=64)
        return Branch(problem=problem, branch_label="sc", bifurcation_omega=0.3,
                      points=[point], fold_indices=[], termination_reason=reason)

    def test_corner_forming(self):
        p = SimplyConnected(b=0.5, omega=0.3, fold=3)
        k = np.arange(1, 33)
        coeffs = 0.1 * k ** -1.2   # slow algebraic decay, slope -1.2 > -1.8
        branch = self._fake_branch(p, coeffs, gap_unit=0.2, gap_bnd=None,
                                   reason="step-floor")
        est = limiting_estimate(branch)
        assert est.classification == "corner-forming"
        assert est.tail_slope > -1.8

    def test_smooth_far_state_inconclusive(self):
        p = SimplyConnected(b=0.5, omega=0.3, fold=3)
        coeffs = 0.1 * np.exp(-1.0 * np.arange(1, 33))
        branch = self._fake_branch(p, coeffs, gap_unit=0.2, gap_bnd=None,
                                   reason="step-floor")
        assert limiting_estimate(branch).classification == "inconclusive"

    def test_near_contact_takes_precedence(self):
        p = DoublyConnected(b1=0.72, b2=0.32, omega=0.2, fold=4)
        coeffs = np.concatenate([0.1 * np.arange(1, 17) ** -1.0,
                                 0.05 * np.arange(1, 17) ** -1.0])
        point = BranchPoint(omega=0.2, coeffs=coeffs, sup_residual=0.0,
                            a_first=0.1, a_inner_first=0.05,
                            gap_unit_circle=0.05, gap_boundaries=7e-3,
                            node_count=64)
        branch = Branch(problem=p, branch_label="plus", bifurcation_omega=0.28,
                        points=[point], fold_indices=[],
                        termination_reason="limiting-proximity")
        assert limiting_estimate(branch).classification == "inner-outer-near-contact"

    def test_budget_is_inconclusive(self):
        p = SimplyConnected(b=0.5, omega=0.3, fold=3)
        coeffs = 0.1 * np.arange(1, 33) ** -1.0
        branch = self._fake_branch(p, coeffs, gap_unit=0.002, gap_bnd=None,
                                   reason="max-points")
        assert limiting_estimate(branch).classification == "inconclusive"


class TestSpectralDiagnostics:
    def test_tail_energy(self):
        coeffs = np.zeros(40)
        coeffs[0] = 1.0
        assert spectral_tail_energy(coeffs) == 0.0
        coeffs[-1] = 1e-3
        assert spectral_tail_energy(coeffs) == pytest.approx(1e-6, rel=1e-6)
        assert spectral_tail_energy(np.zeros(10)) == 0.0

    def test_slope_recovers_power_law(self):
        k = np.arange(1, 65)
        slope = spectral_slope(0.3 * k ** -2.5)
        assert abs(slope + 2.5) < 1e-8
