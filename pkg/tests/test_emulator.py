"""
Tests for the emulator: priors, fitting, prediction, grid solves and separability.
"""

import json
import time

import numpy as np
import pytest

# Well separated points in the unit square
SPREAD = np.array([
    [0.1, 0.2], [0.8, 0.3], [0.5, 0.9], [0.3, 0.6],
    [0.9, 0.9], [0.2, 0.95], [0.6, 0.1], [0.45, 0.45],
])


def _kernel(theta=3.0, variance=1.0):
    from kernels.core import Kernel1D, SeparableKernel

    return SeparableKernel((Kernel1D("sqexp", variance, theta), Kernel1D("sqexp", 1.0, theta)))


def _dense_condition(cov, mean_prior, design, values, pts):
    """Joint-Gaussian conditioning by direct inversion."""
    k_xx = cov(design, design)
    k_px = cov(pts, design)
    inverse = np.linalg.inv(k_xx)
    mean = mean_prior(pts) + k_px @ inverse @ (values - mean_prior(design))
    return mean, cov(pts, pts) - k_px @ inverse @ k_px.T


class TestRegressors:
    """Regressor families and the coefficient prior."""

    def test_standard_names(self):
        from emulator.prior import standard_regressors

        regs = standard_regressors(3, ("constant", "linear", "interaction"))
        assert [r.name for r in regs] == ["constant", "x1", "x2", "x3", "x1*x2", "x1*x3", "x2*x3"]

    def test_centered_values(self):
        from emulator.prior import interaction_regressor, linear_regressor

        pts = np.array([[0.5, 1.0], [0.0, 0.25]])
        np.testing.assert_allclose(linear_regressor(1, 0.5)(pts), [0.5, -0.25])
        np.testing.assert_allclose(interaction_regressor(0, 1, 0.5)(pts), [0.0, 0.125])

    def test_unknown_family(self):
        from emulator.prior import standard_regressors
        from utils.errors import ParameterError

        with pytest.raises(ParameterError):
            standard_regressors(2, ("quadratic",))

    def test_diagonal_covariance_from_vector(self):
        from emulator.prior import RegressionPrior, standard_regressors

        prior = RegressionPrior(standard_regressors(2, ("linear",)), [0.0, 0.0], [1.0, 2.0])
        np.testing.assert_array_equal(prior.coef_cov, np.diag([1.0, 2.0]))

    def test_shape_mismatch(self):
        from emulator.prior import RegressionPrior, constant_regressor
        from utils.errors import ShapeError

        with pytest.raises(ShapeError):
            RegressionPrior((constant_regressor(),), [0.0, 1.0], [[1.0]])

    def test_negative_covariance(self):
        from emulator.prior import RegressionPrior, constant_regressor
        from utils.errors import ParameterError

        with pytest.raises(ParameterError):
            RegressionPrior((constant_regressor(),), [0.0], [[-1.0]])


class TestEmulatorPrior:
    """Regression-plus-residual covariance."""

    def test_separable_prior_is_kernel(self):
        from emulator.prior import EmulatorPrior

        k = _kernel()
        prior = EmulatorPrior.separable(k)
        np.testing.assert_array_equal(prior.cross(SPREAD, SPREAD), k.cross(SPREAD, SPREAD))
        np.testing.assert_array_equal(prior.mean(SPREAD), np.zeros(len(SPREAD)))

    def test_regression_term_added(self):
        from emulator.prior import EmulatorPrior, RegressionPrior, linear_regressor

        k = _kernel()
        prior = EmulatorPrior(RegressionPrior.of((linear_regressor(0, 0.5),), 2.0), k)
        h = SPREAD[:, 0] - 0.5
        np.testing.assert_allclose(prior.cross(SPREAD, SPREAD), k.cross(SPREAD, SPREAD) + 2.0 * np.outer(h, h))

    def test_plug_in_drops_regression_covariance(self):
        from emulator.prior import EmulatorPrior, RegressionPrior, linear_regressor

        k = _kernel()
        prior = EmulatorPrior(RegressionPrior.of((linear_regressor(0),), 2.0), k, plug_in_mean=True)
        np.testing.assert_array_equal(prior.cross(SPREAD, SPREAD), k.cross(SPREAD, SPREAD))

    def test_prior_mean(self):
        from emulator.prior import EmulatorPrior, RegressionPrior, standard_regressors

        prior = EmulatorPrior(RegressionPrior.of(standard_regressors(2, ("constant", "linear")), 0.0, 1.5), _kernel())
        np.testing.assert_allclose(prior.mean([[0.2, 0.4]]), [1.5 * (1 + 0.2 + 0.4)])


class TestRunEnsemble:
    """Ensemble validation and CSV I/O."""

    def test_from_csv(self, tmp_ensemble):
        from emulator.posterior import RunEnsemble

        ens = RunEnsemble.from_csv(tmp_ensemble)
        assert ens.size == 12
        assert ens.dim == 2
        assert ens.values[0] == pytest.approx(np.sin(3 * ens.design[0, 0]) * np.cos(2 * ens.design[0, 1]))

    def test_csv_rewrite_preserves_values(self, tmp_ensemble, tmp_path):
        from emulator.posterior import RunEnsemble

        ens = RunEnsemble.from_csv(tmp_ensemble)
        again = RunEnsemble.from_csv(ens.to_csv(tmp_path / "copy.csv"))
        np.testing.assert_array_equal(again.design, ens.design)
        np.testing.assert_array_equal(again.values, ens.values)

    def test_missing_file(self, tmp_path):
        from emulator.posterior import RunEnsemble
        from utils.errors import UsageError

        with pytest.raises(UsageError):
            RunEnsemble.from_csv(tmp_path / "absent.csv")

    def test_missing_columns(self, tmp_path):
        from emulator.posterior import RunEnsemble
        from utils.errors import UsageError

        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(UsageError):
            RunEnsemble.from_csv(path)

    def test_non_numeric_cell_names_line_and_column(self, tmp_path):
        from emulator.posterior import RunEnsemble
        from utils.errors import ParameterError

        path = tmp_path / "bad.csv"
        path.write_text("x1,x2,f\n0.1,0.2,1.0\n0.3,0.4,abc\n")
        with pytest.raises(ParameterError, match="line 3, column 'f'"):
            RunEnsemble.from_csv(path)

    def test_short_row(self, tmp_path):
        from emulator.posterior import RunEnsemble
        from utils.errors import ParameterError

        path = tmp_path / "short.csv"
        path.write_text("x1,x2,f\n0.1,0.2\n")
        with pytest.raises(ParameterError, match="column 'f'"):
            RunEnsemble.from_csv(path)

    def test_duplicate_points(self):
        from emulator.posterior import RunEnsemble
        from utils.errors import ParameterError

        with pytest.raises(ParameterError):
            RunEnsemble([[0.1, 0.2], [0.1, 0.2]], [1.0, 2.0])

    def test_value_count_mismatch(self):
        from emulator.posterior import RunEnsemble
        from utils.errors import ShapeError

        with pytest.raises(ShapeError):
            RunEnsemble([[0.1, 0.2], [0.3, 0.4]], [1.0])


class TestFit:
    """Conditioning on runs."""

    def test_one_run_kriging(self):
        from emulator.posterior import RunEnsemble, fit
        from emulator.prior import EmulatorPrior, RegressionPrior, constant_regressor

        k = _kernel(2.0, 1.5)
        prior = EmulatorPrior(RegressionPrior.of((constant_regressor(),), 0.0), k)
        p1 = np.array([0.4, 0.7])
        post = fit(prior, RunEnsemble([p1], [2.0]))
        pts = np.array([[0.0, 0.0], [0.5, 0.5], [1.0, 0.2]])
        expected = 2.0 * k.cross(pts, p1)[:, 0] / k(p1, p1)
        np.testing.assert_allclose(post.predict(pts).mean, expected, rtol=1e-8)

    def test_interpolates_design(self):
        from emulator.posterior import RunEnsemble, fit
        from emulator.prior import EmulatorPrior

        values = np.sin(3 * SPREAD[:, 0]) + SPREAD[:, 1] ** 2
        post = fit(EmulatorPrior.separable(_kernel()), RunEnsemble(SPREAD, values))
        pred = post.predict(SPREAD)
        np.testing.assert_allclose(pred.mean, values, atol=1e-8)
        assert np.all(pred.sd <= 1e-4)

    def test_matches_dense_conditioning(self):
        from emulator.posterior import RunEnsemble, fit
        from emulator.prior import EmulatorPrior

        k = _kernel()
        design, values = SPREAD[:5], np.array([0.3, -1.2, 0.8, 0.1, 2.0])
        pts = np.random.default_rng(9).uniform(size=(6, 2))
        post = fit(EmulatorPrior.separable(k), RunEnsemble(design, values), noise_jitter=0.0)
        mean, cov = _dense_condition(k.cross, lambda x: np.zeros(len(x)), design, values, pts)
        pred = post.predict(pts)
        np.testing.assert_allclose(pred.mean, mean, atol=1e-8)
        np.testing.assert_allclose(pred.covariance, cov, atol=1e-8)

    def test_regression_marginalized(self):
        from emulator.posterior import RunEnsemble, fit
        from emulator.prior import EmulatorPrior, RegressionPrior, standard_regressors

        prior = EmulatorPrior(RegressionPrior.of(standard_regressors(2, ("constant", "linear"), 0.5), 1.0, 0.2),
                              _kernel())
        values = SPREAD @ np.array([1.0, -2.0])
        pts = np.random.default_rng(10).uniform(size=(4, 2))
        post = fit(prior, RunEnsemble(SPREAD, values), noise_jitter=0.0)
        mean, cov = _dense_condition(prior.cross, prior.mean, SPREAD, values, pts)
        pred = post.predict(pts)
        np.testing.assert_allclose(pred.mean, mean, atol=1e-8)
        np.testing.assert_allclose(pred.covariance, cov, atol=1e-8)

    def test_plug_in_constant_recovered(self):
        from emulator.posterior import RunEnsemble, fit
        from emulator.prior import EmulatorPrior, RegressionPrior, constant_regressor

        prior = EmulatorPrior(RegressionPrior.of((constant_regressor(),)), _kernel(), plug_in_mean=True)
        post = fit(prior, RunEnsemble(SPREAD, np.full(len(SPREAD), 2.5)))
        assert post.coef_estimate[0] == pytest.approx(2.5, rel=1e-10)
        np.testing.assert_allclose(post.predict([[0.05, 0.5], [0.7, 0.7]]).mean, 2.5, rtol=1e-10)

    def test_empty_ensemble_returns_prior(self):
        from emulator.posterior import RunEnsemble, fit
        from emulator.prior import EmulatorPrior

        k = _kernel()
        pred = fit(EmulatorPrior.separable(k), RunEnsemble.empty(2)).predict(SPREAD[:3])
        np.testing.assert_array_equal(pred.mean, 0.0)
        np.testing.assert_allclose(pred.covariance, k.cross(SPREAD[:3], SPREAD[:3]))

    def test_posterior_psd(self):
        from emulator.grid import GridDesign
        from emulator.posterior import RunEnsemble, fit
        from emulator.prior import EmulatorPrior
        from kernels.core import is_psd

        post = fit(EmulatorPrior.separable(_kernel()), RunEnsemble(SPREAD, np.cos(SPREAD.sum(axis=1))))
        axis = np.linspace(0.0, 1.0, 4)
        assert is_psd(post.predict(GridDesign((axis, axis)).points).covariance)

    def test_negative_jitter_is_numerical_error(self):
        from emulator.posterior import RunEnsemble, fit
        from emulator.prior import EmulatorPrior
        from utils.errors import NumericalError

        with pytest.raises(NumericalError) as excinfo:
            fit(EmulatorPrior.separable(_kernel()), RunEnsemble(SPREAD, np.ones(len(SPREAD))), noise_jitter=-1.0)
        assert excinfo.value.worst_eigenvalue < 0
        assert excinfo.value.jitter == -1.0

    def test_dimension_mismatch(self):
        from emulator.posterior import RunEnsemble, fit
        from emulator.prior import EmulatorPrior
        from utils.errors import ShapeError

        with pytest.raises(ShapeError):
            fit(EmulatorPrior.separable(_kernel()), RunEnsemble([[0.1, 0.2, 0.3]], [1.0]))


class TestPriorReversion:
    """Posterior variance relative to the prior."""

    def test_near_and_far(self):
        from emulator.posterior import RunEnsemble, fit, prior_reversion
        from emulator.prior import EmulatorPrior

        design = np.array([[0.05, 0.05], [0.15, 0.05], [0.05, 0.15]])
        post = fit(EmulatorPrior.separable(_kernel()), RunEnsemble(design, [1.0, 0.5, -0.3]))
        ratio = prior_reversion(post, [[0.06, 0.06], [1.0, 1.0]])
        assert ratio[0] < 1e-2
        assert ratio[1] > 0.99


class TestPosteriorOutputs:
    """CSV and JSON posterior summaries."""

    def test_posterior_csv(self, tmp_path):
        from emulator.posterior import RunEnsemble, fit, write_posterior_csv
        from emulator.prior import EmulatorPrior

        post = fit(EmulatorPrior.separable(_kernel()), RunEnsemble(SPREAD, SPREAD[:, 0]))
        lines = write_posterior_csv(post, SPREAD[:3], tmp_path / "posterior.csv").read_text().splitlines()
        assert lines[0] == "x1,x2,mean,sd"
        assert len(lines) == 4

    def test_report(self, tmp_path):
        from emulator.posterior import RunEnsemble, fit, write_posterior_report
        from emulator.prior import EmulatorPrior, RegressionPrior, constant_regressor

        prior = EmulatorPrior(RegressionPrior.of((constant_regressor(),)), _kernel(), plug_in_mean=True)
        post = fit(prior, RunEnsemble(SPREAD, SPREAD[:, 1] + 1.0))
        data = json.loads(write_posterior_report(post, tmp_path / "fit.json", {"tag": "x"}).read_text())
        assert data["runs"] == 8
        assert data["max_interpolation_error"] <= 1e-8
        assert len(data["coef_estimate"]) == 1
        assert data["tag"] == "x"


class TestGrid:
    """Grid designs and Kronecker solves."""

    def test_points_c_order(self):
        from emulator.grid import GridDesign

        grid = GridDesign(([0.0, 1.0], [0.2, 0.5, 0.9]))
        assert grid.shape == (2, 3)
        np.testing.assert_array_equal(grid.points[:4], [[0.0, 0.2], [0.0, 0.5], [0.0, 0.9], [1.0, 0.2]])

    def test_duplicate_axis_points(self):
        from emulator.grid import GridDesign
        from utils.errors import ShapeError

        with pytest.raises(ShapeError):
            GridDesign(([0.1, 0.1], [0.5]))

    def test_unsorted_axis_rejected(self):
        from emulator.grid import GridDesign
        from utils.errors import ParameterError

        with pytest.raises(ParameterError, match="axis 1 points must be increasing"):
            GridDesign(([0.0, 1.0], [0.9, 0.2, 0.5]))

    def test_axes_kept_in_given_order(self):
        from emulator.grid import GridDesign, kron_solve

        axis = np.array([0.1, 0.4, 0.8])
        grid = GridDesign((axis, axis))
        np.testing.assert_array_equal(grid.axis_points[0], axis)
        rhs = np.arange(9.0)
        z = kron_solve(grid, _kernel(5.0), rhs)
        np.testing.assert_allclose(_kernel(5.0).cross(grid.points, grid.points) @ z, rhs, atol=1e-8)

    @pytest.mark.parametrize("m, n", [(3, 4), (6, 6), (12, 12)])
    def test_gram_is_kronecker(self, m, n):
        from emulator.grid import GridDesign, KroneckerSolver

        k = _kernel(4.0, 1.7)
        grid = GridDesign((np.linspace(0, 1, m), np.linspace(0.1, 0.9, n)))
        kx = k.factors[0].matrix(grid.axis_points[0], grid.axis_points[0])
        ky = k.factors[1].matrix(grid.axis_points[1], grid.axis_points[1])
        np.testing.assert_allclose(k.cross(grid.points, grid.points), np.kron(kx, ky), atol=1e-12)
        np.testing.assert_allclose(KroneckerSolver(grid, k).gram(), np.kron(kx, ky), atol=1e-12)

    def test_near_identity_system(self):
        from emulator.grid import GridDesign, kron_solve

        rhs = np.array([1.0, -2.0, 0.5, 3.0])
        z = kron_solve(GridDesign(([0.0, 1.0], [0.0, 1.0])), _kernel(100.0), rhs)
        np.testing.assert_allclose(z, rhs, atol=1e-12)

    def test_matches_dense_solve(self):
        from emulator.grid import GridDesign, kron_solve

        k = _kernel(5.0)
        axis = np.linspace(0, 1, 8)
        grid = GridDesign((axis, axis))
        rhs = np.random.default_rng(4).standard_normal(64)
        dense = np.linalg.solve(k.cross(grid.points, grid.points), rhs)
        z = kron_solve(grid, k, rhs)
        assert np.linalg.norm(z - dense) <= 1e-6 * np.linalg.norm(dense)

    def test_inverts_gram(self):
        from emulator.grid import GridDesign, KroneckerSolver

        k = _kernel(5.0)
        solver = KroneckerSolver(GridDesign((np.linspace(0, 1, 7), np.linspace(0, 1, 5))), k)
        v = np.random.default_rng(5).standard_normal(35)
        z = solver.solve(solver.gram() @ v)
        assert np.linalg.norm(z - v) <= 1e-6 * np.linalg.norm(v)

    def test_several_right_hand_sides(self):
        from emulator.grid import GridDesign, KroneckerSolver

        solver = KroneckerSolver(GridDesign((np.linspace(0, 1, 4), np.linspace(0, 1, 3))), _kernel(5.0))
        rhs = np.random.default_rng(6).standard_normal((12, 3))
        z = solver.solve(rhs)
        np.testing.assert_allclose(z[:, 2], solver.solve(rhs[:, 2]))

    def test_faster_than_dense(self):
        from emulator.grid import GridDesign, kron_solve
        from kernels.core import Kernel1D, SeparableKernel

        # exponential factors at theta = 3: neighbour correlation 0.93, per-axis condition number near 26
        k = SeparableKernel((Kernel1D("powexp", 1.0, 3.0, exponent=1.0), Kernel1D("powexp", 1.0, 3.0, exponent=1.0)))
        axis = np.linspace(0, 1, 40)
        grid = GridDesign((axis, axis))
        rhs = np.random.default_rng(7).standard_normal(1600)
        gram = k.cross(grid.points, grid.points)

        start = time.perf_counter()
        dense = np.linalg.solve(gram, rhs)
        dense_seconds = time.perf_counter() - start
        start = time.perf_counter()
        z = kron_solve(grid, k, rhs)
        kron_seconds = time.perf_counter() - start

        assert kron_seconds < dense_seconds
        assert np.linalg.norm(z - dense) <= 1e-5 * np.linalg.norm(dense)
        assert np.linalg.norm(gram @ z - rhs) <= 1e-8 * np.linalg.norm(rhs)

    def test_rhs_length_mismatch(self):
        from emulator.grid import GridDesign, kron_solve
        from utils.errors import ShapeError

        with pytest.raises(ShapeError):
            kron_solve(GridDesign(([0.0, 1.0], [0.0, 1.0])), _kernel(), np.ones(5))

    def test_kernel_dimension_mismatch(self):
        from emulator.grid import GridDesign, KroneckerSolver
        from utils.errors import ShapeError

        with pytest.raises(ShapeError):
            KroneckerSolver(GridDesign(([0.0, 1.0],)), _kernel())


class TestSeparability:
    """Distance from Kronecker structure."""

    @staticmethod
    def _grid_points():
        from emulator.grid import GridDesign

        axis = np.linspace(0.05, 0.95, 6)
        return GridDesign((axis, axis)).points

    def test_prior_gram_separable(self):
        from emulator.separability import separability_residual

        pts = self._grid_points()
        assert separability_residual(_kernel(2.0).cross(pts, pts), 6, 6) <= 1e-10

    def test_conditioning_erases_separability(self):
        from emulator.posterior import RunEnsemble, fit
        from emulator.prior import EmulatorPrior
        from emulator.separability import separability_residual

        k = _kernel(2.0)
        pts = self._grid_points()
        runs = RunEnsemble([[0.3, 0.3], [0.7, 0.4], [0.5, 0.8]], [0.2, -0.4, 1.1])
        post_cov = fit(EmulatorPrior.separable(k), runs).predict(pts).covariance
        prior_residual = separability_residual(k.cross(pts, pts), 6, 6)
        assert prior_residual <= 1e-10 < 1e-4 < separability_residual(post_cov, 6, 6)

    def test_uncertain_regression_not_separable(self):
        from emulator.prior import EmulatorPrior, RegressionPrior, linear_regressor
        from emulator.separability import separability_residual

        pts = self._grid_points()
        prior = EmulatorPrior(RegressionPrior.of((linear_regressor(0, 0.5),), 1.0), _kernel(2.0))
        assert separability_residual(prior.cross(pts, pts), 6, 6) > 1e-8

    def test_nearest_kronecker_recovers_factors(self):
        from emulator.separability import nearest_kronecker

        a = np.array([[2.0, 0.5], [0.5, 1.0]])
        b = np.array([[1.0, 0.2, 0.1], [0.2, 3.0, 0.0], [0.1, 0.0, 0.5]])
        fa, fb = nearest_kronecker(np.kron(a, b), 2, 3)
        np.testing.assert_allclose(np.kron(fa, fb), np.kron(a, b), atol=1e-10)
        assert np.trace(fa) >= 0

    def test_wrong_shape(self):
        from emulator.separability import separability_residual
        from utils.errors import ShapeError

        with pytest.raises(ShapeError):
            separability_residual(np.eye(10), 3, 3)


class TestProductForm:
    """Per-axis emulators multiplied together."""

    @staticmethod
    def _truth(pts):
        pts = np.atleast_2d(pts)
        return np.exp(pts[:, 0]) * (1.0 + pts[:, 1] ** 2)

    def test_exact_for_product_truth(self):
        from design.designs import axis_design
        from emulator.posterior import RunEnsemble
        from emulator.product_form import fit_product_form

        design = axis_design(8, 2)
        emulator = fit_product_form(_kernel(2.0), RunEnsemble(design.points, self._truth(design.points)),
                                    design.meta["base_point"])
        pts = np.random.default_rng(8).uniform(0.1, 0.9, size=(20, 2))
        np.testing.assert_allclose(emulator.predict_mean(pts), self._truth(pts), rtol=1e-2)

    def test_base_value_reproduced(self):
        from design.designs import axis_design
        from emulator.posterior import RunEnsemble
        from emulator.product_form import fit_product_form

        design = axis_design(4, 2)
        emulator = fit_product_form(_kernel(2.0), RunEnsemble(design.points, self._truth(design.points)),
                                    design.meta["base_point"])
        assert emulator.predict_mean([design.meta["base_point"]])[0] == pytest.approx(emulator.base_value, rel=1e-6)

    def test_missing_base_run(self):
        from design.designs import axis_design
        from emulator.posterior import RunEnsemble
        from emulator.product_form import fit_product_form
        from utils.errors import ParameterError

        design = axis_design(4, 2)
        with pytest.raises(ParameterError):
            fit_product_form(_kernel(), RunEnsemble(design.points, self._truth(design.points)), [0.11, 0.13])

    def test_short_axis(self):
        from emulator.posterior import RunEnsemble
        from emulator.product_form import fit_product_form
        from utils.errors import ParameterError

        pts = np.array([[0.5, 0.5], [0.2, 0.5], [0.8, 0.5]])
        with pytest.raises(ParameterError):
            fit_product_form(_kernel(), RunEnsemble(pts, self._truth(pts)), [0.5, 0.5])

    def test_zero_at_base(self):
        from design.designs import axis_design
        from emulator.posterior import RunEnsemble
        from emulator.product_form import fit_product_form
        from utils.errors import NumericalError

        design = axis_design(4, 2)
        values = design.points[:, 0] - 0.5
        with pytest.raises(NumericalError):
            fit_product_form(_kernel(), RunEnsemble(design.points, values), design.meta["base_point"])
