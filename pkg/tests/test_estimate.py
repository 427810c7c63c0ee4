import numpy as np
import pytest

from bridgetrack import (
    DimensionMismatch,
    GaussianDensity,
    HorizonExceeded,
    InvalidParameter,
    MeasurementModel,
    aee,
    condition,
    init_belief,
    markov_reference_filter,
    predict_step,
    predict_to,
    sample_bridge_paths,
    sample_markov_paths,
    update_step,
)
from bridgetrack.checks import random_markov_model
from bridgetrack.estimate import MarkovKalmanFilter

from conftest import assert_close_rel, markov_matched_bridge, scalar_random_walk


class TestMeasurementModel:
    def test_attributes(self):
        m = MeasurementModel([[1.0, 0.0]], [[2.0]])
        assert m.meas_dim == 1
        assert m.state_dim == 2

    def test_rank_deficient_rejected(self):
        with pytest.raises(InvalidParameter):
            MeasurementModel([[1.0, 0.0], [2.0, 0.0]], np.eye(2))

    def test_more_rows_than_columns_rejected(self):
        with pytest.raises(InvalidParameter):
            MeasurementModel([[1.0], [0.0]], np.eye(2))

    def test_indefinite_noise_rejected(self):
        from bridgetrack import NotPositiveDefinite

        with pytest.raises(NotPositiveDefinite):
            MeasurementModel([[1.0, 0.0]], [[-1.0]])


class TestInitBelief:
    def test_scenario_values(self, scenario_models):
        belief = init_belief(scenario_models["bridge"])
        assert belief.k == 0
        assert_close_rel(
            belief.mean,
            [2000.0, 70.0, 5000.0, 0.0, 130000.0, 70.0, 10000.0, 0.0],
            tol=1e-12,
        )
        # independent endpoints: zero cross blocks, marginals on the diagonal
        assert np.linalg.norm(belief.cov[:4, 4:]) == 0.0
        assert_close_rel(belief.cov[:4, :4], np.diag([1000.0, 10.0, 1000.0, 10.0]), tol=1e-12)
        assert_close_rel(belief.cov[4:, 4:], np.diag([1000.0, 10.0, 1000.0, 10.0]), tol=1e-12)

    def test_correlated_endpoints_cross_block(self):
        from bridgetrack import EndpointSpec, assemble_bridge, boundary_from_endpoints, induce_bridge

        markov = scalar_random_walk(3)
        spec = EndpointSpec(
            GaussianDensity([0.0], [[1.0]]), GaussianDensity([0.0], [[2.0]]), [[0.6]]
        )
        model = assemble_bridge(induce_bridge(markov), boundary_from_endpoints(spec))
        belief = init_belief(model)
        assert_close_rel(belief.cov, [[1.0, 0.6], [0.6, 2.0]], tol=1e-12)

    def test_marginals(self, scenario_models):
        belief = init_belief(scenario_models["bridge"])
        assert belief.state_marginal().dim == 4
        assert_close_rel(belief.dest_marginal().mean, [130000.0, 70.0, 10000.0, 0.0], tol=0.0)


class TestPredict:
    def test_final_block_is_invariant(self, scenario_models):
        model = scenario_models["bridge"]
        belief = init_belief(model)
        for _ in range(12):
            nxt = predict_step(belief, model)
            assert np.array_equal(nxt.mean[4:], belief.mean[4:])
            assert np.array_equal(nxt.cov[4:, 4:], belief.cov[4:, 4:])
            belief = nxt
        assert belief.k == 12

    def test_horizon_guard(self):
        model = markov_matched_bridge(scalar_random_walk(3))
        belief = init_belief(model)
        belief = predict_step(belief, model)
        belief = predict_step(belief, model)
        assert belief.k == 2
        with pytest.raises(HorizonExceeded):
            predict_step(belief, model)

    def test_unmeasured_marginals_match_joint(self, rng):
        # Chained predictions with no data must reproduce the model's own
        # time marginals exactly.
        from bridgetrack import joint_density

        markov = random_markov_model(rng, 2, 5)
        model = markov_matched_bridge(markov)
        joint = joint_density(model)
        belief = init_belief(model)
        dim = 2
        for k in range(1, 5):
            belief = predict_step(belief, model)
            marg = belief.state_marginal()
            sl = np.s_[k * dim : (k + 1) * dim]
            assert_close_rel(marg.mean, joint.mean[sl], tol=1e-8)
            assert_close_rel(marg.cov, joint.cov[sl, sl], tol=1e-8)

    def test_covariance_stays_symmetric(self, scenario_models):
        model = scenario_models["bridge"]
        belief = init_belief(model)
        for _ in range(20):
            belief = predict_step(belief, model)
            assert np.array_equal(belief.cov, belief.cov.T)


class TestUpdate:
    def test_huge_noise_is_a_no_op(self, scenario_models):
        model = scenario_models["bridge"]
        meas = MeasurementModel([[1.0, 0, 0, 0], [0, 0, 1.0, 0]], np.eye(2) * 1e12)
        belief = predict_step(init_belief(model), model)
        updated = update_step(belief, meas, [2500.0, 5200.0])
        assert np.linalg.norm(updated.mean - belief.mean) / np.linalg.norm(belief.mean) < 1e-4
        assert np.linalg.norm(updated.cov - belief.cov) / np.linalg.norm(belief.cov) < 1e-4

    def test_tiny_noise_pins_position(self, scenario_models):
        model = scenario_models["bridge"]
        meas = MeasurementModel([[1.0, 0, 0, 0], [0, 0, 1.0, 0]], np.eye(2) * 1e-9)
        belief = predict_step(init_belief(model), model)
        z = np.array([3100.0, 5050.0])
        updated = update_step(belief, meas, z)
        assert abs(updated.mean[0] - z[0]) < 1e-3
        assert abs(updated.mean[2] - z[1]) < 1e-3

    def test_update_sharpens_destination_when_coupled(self):
        # Once predictions start mixing state and destination, a position
        # measurement carries information about the endpoint too.
        from bridgetrack import EndpointSpec, assemble_bridge, boundary_from_endpoints, induce_bridge

        markov = scalar_random_walk(4)
        spec = EndpointSpec(
            GaussianDensity([0.0], [[1.0]]), GaussianDensity([0.0], [[4.0]]), [[1.2]]
        )
        model = assemble_bridge(induce_bridge(markov), boundary_from_endpoints(spec))
        meas = MeasurementModel([[1.0]], [[0.5]])
        belief = predict_step(init_belief(model), model)
        updated = update_step(belief, meas, [0.4])
        assert updated.dest_marginal().cov[0, 0] < belief.dest_marginal().cov[0, 0]

    def test_update_never_inflates_covariance(self, scenario_models):
        model = scenario_models["bridge"]
        meas = scenario_models["meas"]
        rng = np.random.default_rng(77)
        belief = init_belief(model)
        for _ in range(9):
            belief = predict_step(belief, model)
            z = meas.H @ belief.mean[:4] + 30.0 * rng.standard_normal(2)
            updated = update_step(belief, meas, z)
            assert np.trace(updated.cov) <= np.trace(belief.cov) * (1 + 1e-12)
            belief = updated

    def test_measurement_dimension_enforced(self, scenario_models):
        model = scenario_models["bridge"]
        belief = init_belief(model)
        meas = MeasurementModel([[1.0, 0, 0, 0]], [[1.0]])
        with pytest.raises(DimensionMismatch):
            update_step(belief, meas, [1.0, 2.0])
        wrong_state = MeasurementModel([[1.0, 0.0]], [[1.0]])
        with pytest.raises(DimensionMismatch):
            update_step(belief, wrong_state, [1.0])

    def test_covariance_stays_symmetric(self, scenario_models):
        model = scenario_models["bridge"]
        meas = scenario_models["meas"]
        belief = predict_step(init_belief(model), model)
        updated = update_step(belief, meas, [2300.0, 5100.0])
        assert np.array_equal(updated.cov, updated.cov.T)


class TestPredictTo:
    def test_final_target_is_exact(self, scenario_models):
        model = scenario_models["bridge"]
        belief = init_belief(model)
        final = predict_to(belief, model, model.n_steps)
        assert_close_rel(final.mean, model.dest_mean, tol=1e-12)
        assert_close_rel(final.cov, model.dest_cov, tol=1e-12)

    def test_zero_steps_returns_current_marginal(self, scenario_models):
        model = scenario_models["bridge"]
        belief = init_belief(model)
        out = predict_to(belief, model, 0)
        assert_close_rel(out.mean, belief.state_marginal().mean, tol=0.0)
        assert_close_rel(out.cov, belief.state_marginal().cov, tol=0.0)

    def test_matches_chained_predicts(self, scenario_models):
        model = scenario_models["bridge"]
        belief = init_belief(model)
        direct = predict_to(belief, model, 7)
        chained = belief
        for _ in range(7):
            chained = predict_step(chained, model)
        assert_close_rel(direct.mean, chained.state_marginal().mean, tol=0.0)
        assert_close_rel(direct.cov, chained.state_marginal().cov, tol=0.0)

    def test_backwards_target_rejected(self, scenario_models):
        model = scenario_models["bridge"]
        belief = predict_step(init_belief(model), model)
        with pytest.raises(HorizonExceeded):
            predict_to(belief, model, 0)
        with pytest.raises(HorizonExceeded):
            predict_to(belief, model, model.n_steps + 1)


class TestAee:
    def test_single_row(self):
        assert aee(np.array([[0.0, 0.0]]), np.array([[3.0, 4.0]])) == 5.0

    def test_mean_across_rows(self):
        truth = np.zeros((2, 2))
        est = np.array([[3.0, 4.0], [9.0, 12.0]])
        assert aee(truth, est) == 10.0

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            aee(np.zeros((2, 2)), np.zeros((3, 2)))


class TestMarkovFilter:
    def test_scenario_drift_prediction(self, scenario_models):
        kalman = markov_reference_filter(scenario_models["markov"], scenario_models["meas"])
        belief = kalman.init_belief()
        final = kalman.predict_to(belief, 100)
        assert_close_rel(final.mean, [107_000.0, 70.0, 5_000.0, 0.0], tol=1e-12)

    def test_horizon_guard(self):
        markov = scalar_random_walk(2)
        meas = MeasurementModel([[1.0]], [[1.0]])
        kalman = MarkovKalmanFilter(markov, meas)
        belief = kalman.init_belief()
        belief = kalman.predict_step(belief)
        belief = kalman.predict_step(belief)
        with pytest.raises(HorizonExceeded):
            kalman.predict_step(belief)

    def test_matches_uncoupled_augmented_filter(self, rng):
        # On a model with zero destination gains the augmented recursion
        # must collapse to the plain filter exactly.
        from bridgetrack.bridge import BridgeBoundary, BridgeDynamics, assemble_bridge

        markov = random_markov_model(rng, 2, 4)
        interior = BridgeDynamics(
            markov.transitions[:3], np.zeros((3, 2, 2)), markov.noise_covs[:3]
        )
        dest = GaussianDensity(rng.standard_normal(2), np.eye(2))
        boundary = BridgeBoundary(
            np.zeros((2, 2)), markov.initial.cov, dest.cov, markov.initial.mean, dest.mean
        )
        model = assemble_bridge(interior, boundary)
        chain = type(markov)(markov.transitions[:3], markov.noise_covs[:3], markov.initial)
        meas = MeasurementModel([[1.0, 0.0], [0.0, 1.0]], np.eye(2) * 0.5)
        kalman = MarkovKalmanFilter(chain, meas)

        aug = init_belief(model)
        plain = kalman.init_belief()
        for k in range(1, 4):
            aug = predict_step(aug, model)
            plain = kalman.predict_step(plain)
            z = rng.standard_normal(2)
            aug = update_step(aug, meas, z)
            plain = kalman.update_step(plain, z)
            assert_close_rel(aug.mean[:2], plain.mean, tol=1e-10)
            assert_close_rel(aug.cov[:2, :2], plain.cov, tol=1e-10)

    def test_not_worse_on_matched_truth(self, rng):
        # When the truth really is the plain chain, the destination-aware
        # filter has no edge: terminal errors agree on average.
        markov = random_markov_model(rng, 1, 6)
        model = markov_matched_bridge(markov)
        meas = MeasurementModel([[1.0]], [[0.25]])
        kalman = MarkovKalmanFilter(markov, meas)
        errs_aug, errs_plain = [], []
        for run in range(500):
            sub = np.random.default_rng((7, run))
            truth = sample_bridge_paths(model, sub, 1)[0]
            zs = truth[1:4, 0] + 0.5 * sub.standard_normal(3)
            aug = init_belief(model)
            plain = kalman.init_belief()
            for k in range(1, 4):
                aug = predict_step(aug, model)
                plain = kalman.predict_step(plain)
                aug = update_step(aug, meas, [zs[k - 1]])
                plain = kalman.update_step(plain, [zs[k - 1]])
            pred_aug = predict_to(aug, model, 6)
            pred_plain = kalman.predict_to(plain, 6)
            errs_aug.append(abs(pred_aug.mean[0] - truth[6, 0]))
            errs_plain.append(abs(pred_plain.mean[0] - truth[6, 0]))
        mean_aug = np.mean(errs_aug)
        mean_plain = np.mean(errs_plain)
        assert abs(mean_aug - mean_plain) / mean_plain < 0.05

    def test_no_worse_when_truth_ignores_destination(self, scenario_models):
        # Truth drawn from the plain chain: pulling predictions toward the
        # (now wrong) destination can only hurt, so the plain arm's terminal
        # error must come out at or below the coupled arm's.
        markov = scenario_models["markov"]
        bridge = scenario_models["bridge"]
        meas = scenario_models["meas"]
        kalman = MarkovKalmanFilter(markov, meas)
        rng = np.random.default_rng(424242)
        err_coupled = np.empty(500)
        err_plain = np.empty(500)
        for run in range(500):
            truth = sample_markov_paths(markov, rng, 1)[0]
            truth_pos = truth @ meas.H.T
            zs = truth_pos[1:10] + rng.standard_normal((9, 2)) @ meas.R_chol.T
            aug = init_belief(bridge)
            plain = kalman.init_belief()
            for k in range(1, 10):
                aug = update_step(predict_step(aug, bridge), meas, zs[k - 1])
                plain = kalman.update_step(kalman.predict_step(plain), zs[k - 1])
            pred_coupled = predict_to(aug, bridge, 100)
            pred_plain = kalman.predict_to(plain, 100)
            err_coupled[run] = np.linalg.norm(meas.H @ pred_coupled.mean - truth_pos[100])
            err_plain[run] = np.linalg.norm(meas.H @ pred_plain.mean - truth_pos[100])
        assert err_plain.mean() <= err_coupled.mean()

    def test_predict_to_bounds(self):
        markov = scalar_random_walk(4)
        meas = MeasurementModel([[1.0]], [[1.0]])
        kalman = MarkovKalmanFilter(markov, meas)
        belief = kalman.init_belief()
        with pytest.raises(HorizonExceeded):
            kalman.predict_to(belief, 5)
