import numpy as np
import pytest

from bridgetrack import (
    DimensionMismatch,
    EmptyFreeBlock,
    GaussianDensity,
    NotPositiveDefinite,
    condition,
    log_density,
    make_gaussian,
)
from bridgetrack.gaussian import sample, spd_cholesky, symmetrize

from conftest import assert_close_rel


class TestConstruction:
    def test_basic_attributes(self):
        d = GaussianDensity([1.0, 2.0], [[2.0, 0.5], [0.5, 1.0]])
        assert d.dim == 2
        assert_close_rel(d.mean, [1.0, 2.0], tol=0.0)
        assert_close_rel(d.chol @ d.chol.T, d.cov, tol=1e-14)

    def test_mean_cov_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            GaussianDensity([1.0, 2.0], [[1.0]])

    def test_nonsquare_cov_rejected(self):
        with pytest.raises(DimensionMismatch):
            GaussianDensity([1.0], [[1.0, 0.0]])

    def test_indefinite_cov_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            GaussianDensity([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])

    def test_asymmetric_cov_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            GaussianDensity([0.0, 0.0], [[1.0, 0.5], [0.1, 1.0]])

    def test_small_asymmetry_is_symmetrized(self):
        cov = np.array([[1.0, 0.3 + 2e-10], [0.3, 1.0]])
        d = GaussianDensity([0.0, 0.0], cov)
        assert np.array_equal(d.cov, d.cov.T)
        assert abs(d.cov[0, 1] - (0.3 + 1e-10)) < 4e-10

    def test_make_gaussian_equivalent(self):
        d = make_gaussian([1.0], [[4.0]])
        assert isinstance(d, GaussianDensity)
        assert d.cov[0, 0] == 4.0

    def test_spd_cholesky_rejects_scalar_input(self):
        with pytest.raises(DimensionMismatch):
            spd_cholesky(np.array([1.0]))

    def test_symmetrize_idempotent(self, rng):
        a = rng.standard_normal((4, 4))
        s = symmetrize(a)
        assert np.array_equal(s, s.T)


class TestSampling:
    def test_deterministic_under_seed(self):
        d = GaussianDensity([1.0, -1.0], [[2.0, 0.3], [0.3, 1.0]])
        a = sample(d, np.random.default_rng(7), size=5)
        b = sample(d, np.random.default_rng(7), size=5)
        assert np.array_equal(a, b)

    def test_single_draw_shape(self, rng):
        d = GaussianDensity([0.0, 0.0, 0.0], np.eye(3))
        assert sample(d, rng).shape == (3,)
        assert sample(d, rng, size=10).shape == (10, 3)

    def test_moments_match(self, rng):
        cov = np.array([[2.0, 0.8], [0.8, 1.0]])
        d = GaussianDensity([3.0, -2.0], cov)
        draws = sample(d, rng, size=200_000)
        assert np.linalg.norm(draws.mean(axis=0) - d.mean) < 3.0 * np.sqrt(2.0) / np.sqrt(200_000) * np.sqrt(np.trace(cov))
        emp = np.cov(draws.T)
        assert np.linalg.norm(emp - cov) / np.linalg.norm(cov) < 0.02

    def test_sample_cov_error_shrinks_with_n(self):
        d = GaussianDensity([0.0, 0.0], [[1.0, 0.4], [0.4, 2.0]])
        errs = []
        for n in (100, 10_000):
            draws = sample(d, np.random.default_rng(3), size=n)
            errs.append(np.linalg.norm(np.cov(draws.T) - d.cov))
        assert errs[1] < errs[0]


class TestConditioning:
    def test_bivariate_frozen_value(self):
        # rho = 0.5 with unit variances, conditioned on the second coordinate
        # at 2: the survivor is N(0.5 * 2, 1 - 0.25) = N(1, 0.75).
        joint = GaussianDensity([0.0, 0.0], [[1.0, 0.5], [0.5, 1.0]])
        post = condition(joint, [1], [2.0])
        assert_close_rel(post.mean, [1.0], tol=1e-12)
        assert_close_rel(post.cov, [[0.75]], tol=1e-12)

    def test_against_grid_quadrature(self):
        # Same posterior recovered by numerically normalizing the joint over
        # a dense grid in the free coordinate.
        joint = GaussianDensity([0.0, 0.0], [[1.0, 0.5], [0.5, 1.0]])
        xs = np.linspace(-10.0, 10.0, 20001)
        logs = np.array([log_density(joint, [x, 2.0]) for x in xs])
        w = np.exp(logs - logs.max())
        w /= np.trapezoid(w, xs)
        mean = np.trapezoid(w * xs, xs)
        var = np.trapezoid(w * (xs - mean) ** 2, xs)
        assert abs(mean - 1.0) < 1e-6
        assert abs(var - 0.75) < 1e-6

    def test_block_diagonal_roundtrip(self, rng):
        # With independent blocks, conditioning one block leaves the other
        # marginal untouched.
        a = rng.standard_normal((3, 3))
        b = rng.standard_normal((2, 2))
        cov = np.zeros((5, 5))
        cov[:3, :3] = a @ a.T + 0.5 * np.eye(3)
        cov[3:, 3:] = b @ b.T + 0.5 * np.eye(2)
        mean = rng.standard_normal(5)
        joint = GaussianDensity(mean, cov)
        post = condition(joint, [3, 4], rng.standard_normal(2))
        assert_close_rel(post.mean, mean[:3], tol=1e-10)
        assert_close_rel(post.cov, cov[:3, :3], tol=1e-10)

    def test_free_block_keeps_ascending_order(self):
        cov = np.diag([1.0, 2.0, 3.0])
        joint = GaussianDensity([10.0, 20.0, 30.0], cov)
        post = condition(joint, [1], [20.0])
        assert_close_rel(post.mean, [10.0, 30.0], tol=0.0)
        assert_close_rel(post.cov, np.diag([1.0, 3.0]), tol=0.0)

    def test_empty_observed_returns_joint(self):
        joint = GaussianDensity([1.0, 2.0], np.eye(2))
        post = condition(joint, [], [])
        assert post is joint

    def test_all_observed_rejected(self):
        joint = GaussianDensity([1.0, 2.0], np.eye(2))
        with pytest.raises(EmptyFreeBlock):
            condition(joint, [0, 1], [1.0, 2.0])

    def test_duplicate_indices_rejected(self):
        joint = GaussianDensity([0.0, 0.0, 0.0], np.eye(3))
        with pytest.raises(DimensionMismatch):
            condition(joint, [1, 1], [0.0, 0.0])

    def test_out_of_range_index_rejected(self):
        joint = GaussianDensity([0.0, 0.0], np.eye(2))
        with pytest.raises(DimensionMismatch):
            condition(joint, [5], [0.0])

    def test_value_shape_mismatch_rejected(self):
        joint = GaussianDensity([0.0, 0.0], np.eye(2))
        with pytest.raises(DimensionMismatch):
            condition(joint, [0], [1.0, 2.0])


class TestLogDensity:
    def test_standard_normal_at_mode(self):
        d = GaussianDensity([0.0], [[1.0]])
        assert abs(log_density(d, [0.0]) - (-0.5 * np.log(2.0 * np.pi))) < 1e-12

    def test_bivariate_at_mode(self):
        d = GaussianDensity([1.0, 2.0], np.eye(2))
        assert abs(log_density(d, [1.0, 2.0]) - (-np.log(2.0 * np.pi))) < 1e-12

    def test_whitened_quadratic(self):
        # One standard deviation along an eigenvector costs exactly 1/2.
        d = GaussianDensity([0.0, 0.0], np.diag([4.0, 9.0]))
        at_mode = log_density(d, [0.0, 0.0])
        assert abs(log_density(d, [2.0, 0.0]) - (at_mode - 0.5)) < 1e-12

    def test_integrates_to_one(self):
        d = GaussianDensity([0.5], [[2.0]])
        xs = np.linspace(-15.0, 16.0, 40001)
        vals = np.exp([log_density(d, [x]) for x in xs])
        assert abs(np.trapezoid(vals, xs) - 1.0) < 1e-6

    def test_wrong_point_shape(self):
        d = GaussianDensity([0.0, 0.0], np.eye(2))
        with pytest.raises(DimensionMismatch):
            log_density(d, [0.0])
