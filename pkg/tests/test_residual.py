import numpy as np
import pytest

from vstates.contour import FourierContour, SpectralGrid, mode_count
from vstates.errors import BoundaryOrderingError, ConfigurationError, DomainViolationError
from vstates.residual import (
    DoublyConnected,
    SimplyConnected,
    dc_residual_nodes,
    sc_residual_nodes,
    sine_project,
    sine_series_sup,
)


def circle(b, fold=1, modes=7):
    return FourierContour(b, fold, np.zeros(modes))


GRID64 = SpectralGrid(64)


class TestTrivialSolutions:
    @pytest.mark.parametrize("b", [round(0.1 * k, 1) for k in range(1, 10)])
    @pytest.mark.parametrize("omega", [-1.0, 0.0, 0.25, 1.0])
    def test_circle_residual(self, b, omega):
        r = sc_residual_nodes(circle(b), omega, GRID64)
        assert np.abs(r).max() <= 1e-13

    @pytest.mark.parametrize("b1", [0.3, 0.45, 0.6, 0.75, 0.9])
    @pytest.mark.parametrize("frac", [0.2, 0.35, 0.5, 0.65, 0.8])
    def test_annulus_residual(self, b1, frac):
        r1, r2 = dc_residual_nodes(circle(b1), circle(frac * b1), 0.3, GRID64)
        assert np.abs(r1).max() <= 1e-13
        assert np.abs(r2).max() <= 1e-13


def ellipse_contour(a, b, node_count):
    """Fit the ellipse with semi-axes a > b into the 2-fold cosine ansatz."""
    modes = mode_count(SpectralGrid(node_count), 2)
    dense = 4096
    th = 2 * np.pi * np.arange(dense) / dense
    r = a * b / np.sqrt((b * np.cos(th)) ** 2 + (a * np.sin(th)) ** 2)
    fhat = np.fft.rfft(r) / dense
    mean = fhat[0].real
    coeffs = 2 * fhat.real[2:2 * (modes + 1):2][:modes]
    return FourierContour(mean, 2, coeffs)


class TestKirchhoffEllipse:
    def test_not_a_solution_in_the_disc(self):
        # rotating freely in the plane at Omega = ab/(a+b)^2, but not in the disc;
        # the converged residual level was frozen from runs at N = 1024 and 2048
        a, b = 0.3, 0.15
        omega = a * b / (a + b) ** 2
        c = ellipse_contour(a, b, 1024)
        sup = np.abs(sc_residual_nodes(c, omega, SpectralGrid(1024))).max()
        assert sup > 1e-5
        assert abs(sup - 6.08265750e-05) < 1e-9


class TestLimits:
    def test_inner_boundary_shrinks_to_simply_connected(self):
        # wall and cross integrals from the inner circle scale as b2^2
        grid = SpectralGrid(96)
        modes = mode_count(grid, 3)
        a = np.zeros(modes)
        a[0] = 0.05
        outer = FourierContour(0.8, 3, a)
        r_dc, _ = dc_residual_nodes(outer, circle(1e-5, 3, modes), 0.3, grid)
        r_sc = sc_residual_nodes(outer, 0.3, grid)
        assert np.abs(r_dc - r_sc).max() <= 1e-10


class TestFixtureResiduals:
    def test_sc_fixture_residual(self, sc4_state, contours_of):
        problem, root, grid = sc4_state
        c = contours_of(problem, root, grid)[0]
        assert np.abs(sc_residual_nodes(c, problem.omega, grid)).max() <= 1e-12
        fine = SpectralGrid(2 * grid.node_count)
        assert np.abs(sc_residual_nodes(c, problem.omega, fine)).max() <= 1e-12

    def test_dc_fixture_residual(self, dc4_state, contours_of):
        problem, root, grid = dc4_state
        c1, c2 = contours_of(problem, root, grid)
        r1, r2 = dc_residual_nodes(c1, c2, problem.omega, grid)
        assert max(np.abs(r1).max(), np.abs(r2).max()) <= 1e-12
        fine = SpectralGrid(2 * grid.node_count)
        r1, r2 = dc_residual_nodes(c1, c2, problem.omega, fine)
        assert max(np.abs(r1).max(), np.abs(r2).max()) <= 1e-12


class TestSineProject:
    def test_single_mode(self):
        th = SpectralGrid(48).nodes
        spec = sine_project(np.sin(3 * th), 3, 7)
        expected = np.zeros(7)
        expected[0] = 1.0
        assert np.abs(spec.coeffs - expected).max() <= 1e-14

    def test_zero(self):
        spec = sine_project(np.zeros(48), 3, 7)
        assert np.abs(spec.coeffs).max() == 0.0
        assert spec.sup_norm == 0.0

    def test_two_modes(self):
        th = SpectralGrid(48).nodes
        spec = sine_project(2 * np.sin(6 * th) - 0.5 * np.sin(12 * th), 3, 7)
        expected = np.zeros(7)
        expected[1] = 2.0
        expected[3] = -0.5
        assert np.abs(spec.coeffs - expected).max() <= 1e-14

    def test_length_mismatch(self):
        with pytest.raises(ConfigurationError):
            sine_project(np.zeros(50), 3, 7)

    def test_undersampling(self):
        with pytest.raises(ConfigurationError):
            sine_project(np.zeros(12), 3, 7)

    def test_series_sup(self):
        coeffs = np.array([1.0, 0.0, -0.25])
        th = SpectralGrid(48).nodes
        direct = np.abs(np.sin(3 * th) - 0.25 * np.sin(9 * th)).max()
        assert abs(sine_series_sup(coeffs, 3, 48) - direct) < 1e-15


@pytest.fixture
def smooth_noncircular():
    coeffs = np.array([0.05, 0.012, 0.003, 0.0007, 0.0001, 0.0, 0.0])
    return FourierContour(0.65, 3, coeffs)


class TestQuadratureProperties:
    def test_spectral_convergence(self, smooth_noncircular):
        r1 = sc_residual_nodes(smooth_noncircular, 0.3, SpectralGrid(96))
        r2 = sc_residual_nodes(smooth_noncircular, 0.3, SpectralGrid(192))
        assert np.abs(r2[::2] - r1).max() <= 1e-10

    def test_oddness(self, smooth_noncircular):
        r = sc_residual_nodes(smooth_noncircular, 0.3, SpectralGrid(96))
        assert np.abs(r[1:] + r[1:][::-1]).max() <= 1e-13
        assert abs(r[0]) <= 1e-13

    def test_fold_periodicity(self, smooth_noncircular):
        r = sc_residual_nodes(smooth_noncircular, 0.3, SpectralGrid(96))
        assert np.abs(np.roll(r, -32) - r).max() <= 1e-13

    def test_dc_oddness_and_periodicity(self):
        modes = 7
        a1 = np.zeros(modes)
        a1[0] = 0.04
        a2 = np.zeros(modes)
        a2[0] = -0.03
        c1 = FourierContour(0.8, 4, a1)
        c2 = FourierContour(0.4, 4, a2)
        grid = SpectralGrid(64)
        for r in dc_residual_nodes(c1, c2, 0.2, grid):
            assert np.abs(r[1:] + r[1:][::-1]).max() <= 1e-13
            assert np.abs(np.roll(r, -16) - r).max() <= 1e-13


class TestPreconditions:
    def test_node_outside_disc(self):
        with pytest.raises(DomainViolationError):
            sc_residual_nodes(FourierContour(0.95, 2, np.array([0.1])), 0.2,
                              SpectralGrid(32))

    def test_boundary_ordering(self):
        with pytest.raises(BoundaryOrderingError):
            dc_residual_nodes(circle(0.4, 2, 3), circle(0.5, 2, 3), 0.2,
                              SpectralGrid(32))

    def test_fold_mismatch(self):
        with pytest.raises(ConfigurationError):
            dc_residual_nodes(circle(0.8, 2, 3), circle(0.4, 3, 3), 0.2,
                              SpectralGrid(36))

    def test_problem_validation(self):
        with pytest.raises(ConfigurationError):
            SimplyConnected(b=1.2, omega=0.1, fold=2)
        with pytest.raises(ConfigurationError):
            DoublyConnected(b1=0.4, b2=0.5, omega=0.1, fold=2)
