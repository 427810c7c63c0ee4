"""Filtering and prediction for destination-coupled models.

Stacking the final state under the current one turns the destination-coupled
recursion into an ordinary linear-Gaussian system

    [x_k; x_N] = [[trans, dest_gain], [0, I]] [x_{k-1}; x_N] + [e_k; 0]

so filtering and n-step prediction reduce to standard time and measurement
updates on the stacked belief. A plain Kalman filter over the motion model
provides the comparison arm with a mirrored interface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from .bridge import BridgeModel
from .errors import DimensionMismatch, HorizonExceeded, InvalidParameter
from .gaussian import GaussianDensity, spd_cholesky, symmetrize
from .markov import MarkovModelParams


class MeasurementModel:
    """Linear measurement z = H x + v with SPD noise covariance R."""

    def __init__(self, H, R, rank_tol: float = 1e-9):
        H = np.asarray(H, dtype=float)
        if H.ndim != 2:
            raise DimensionMismatch("measurement matrix must be two-dimensional")
        self.R, self.R_chol = spd_cholesky(R, name="measurement noise covariance")
        if self.R.shape[0] != H.shape[0]:
            raise DimensionMismatch("noise covariance must match the measurement row count")
        singular_values = np.linalg.svd(H, compute_uv=False)
        if H.shape[0] > H.shape[1] or singular_values[-1] <= rank_tol:
            raise InvalidParameter("measurement matrix must have full row rank")
        self.H = H

    @property
    def meas_dim(self) -> int:
        return self.H.shape[0]

    @property
    def state_dim(self) -> int:
        return self.H.shape[1]


@dataclass(frozen=True, eq=False)
class Belief:
    """Gaussian filtering state (mean, SPD covariance) at time index k."""

    mean: np.ndarray
    cov: np.ndarray
    k: int

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov, _ = spd_cholesky(self.cov, name="belief covariance")
        if cov.shape != (mean.size, mean.size):
            raise DimensionMismatch("belief mean and covariance dimensions disagree")
        if self.k < 0:
            raise HorizonExceeded("belief time index must be nonnegative")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


class AugmentedBelief(Belief):
    """Belief over the stacked [current state; final state] vector."""

    def __post_init__(self):
        super().__post_init__()
        if self.mean.size % 2 != 0:
            raise DimensionMismatch("a stacked belief must have even dimension")

    @property
    def state_dim(self) -> int:
        return self.mean.size // 2

    def state_marginal(self) -> GaussianDensity:
        d = self.state_dim
        return GaussianDensity(self.mean[:d], self.cov[:d, :d])

    def dest_marginal(self) -> GaussianDensity:
        d = self.state_dim
        return GaussianDensity(self.mean[d:], self.cov[d:, d:])


def init_belief(model: BridgeModel) -> AugmentedBelief:
    """Exact prior of the stacked [origin; destination] vector at k=0."""
    gain = model.origin_dest_gain
    cross = gain @ model.dest_cov
    top = model.origin_noise_cov + cross @ gain.T
    cov = np.block([[top, cross], [cross.T, model.dest_cov]])
    mean = np.concatenate([model.origin_mean, model.dest_mean])
    return AugmentedBelief(mean, symmetrize(cov), 0)


def predict_step(belief: AugmentedBelief, model: BridgeModel) -> AugmentedBelief:
    """Time update under the stacked transition; the final-state block is static."""
    dim = model.dim
    if belief.mean.size != 2 * dim:
        raise DimensionMismatch("belief dimension does not match the model")
    j = belief.k
    if j > model.n_steps - 2:
        raise HorizonExceeded(
            f"no interior step leaves k={j}; interior steps end at k={model.n_steps - 1}"
        )
    trans = np.zeros((2 * dim, 2 * dim))
    trans[:dim, :dim] = model.trans[j]
    trans[:dim, dim:] = model.dest_gain[j]
    trans[dim:, dim:] = np.eye(dim)
    mean = trans @ belief.mean
    cov = trans @ belief.cov @ trans.T
    cov[:dim, :dim] += model.noise_covs[j]
    return AugmentedBelief(mean, symmetrize(cov), j + 1)


def _kalman_update(mean, cov, obs_matrix, obs_noise, z):
    """Joseph-stabilized measurement update, shared by both filter arms."""
    innovation = z - obs_matrix @ mean
    innov_cov = symmetrize(obs_matrix @ cov @ obs_matrix.T + obs_noise)
    _, s_chol = spd_cholesky(innov_cov, name="innovation covariance")
    gain = cho_solve((s_chol, True), obs_matrix @ cov).T
    new_mean = mean + gain @ innovation
    shrink = np.eye(mean.size) - gain @ obs_matrix
    new_cov = symmetrize(shrink @ cov @ shrink.T + gain @ obs_noise @ gain.T)
    return new_mean, new_cov


def update_step(belief: AugmentedBelief, meas: MeasurementModel, z) -> AugmentedBelief:
    """Measurement update of the stacked belief; z observes the current-state block."""
    dim = belief.state_dim
    if meas.state_dim != dim:
        raise DimensionMismatch("measurement matrix does not match the state dimension")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.shape != (meas.meas_dim,):
        raise DimensionMismatch(f"measurement shape {z.shape} does not match {meas.meas_dim}")
    stacked = np.hstack([meas.H, np.zeros_like(meas.H)])
    mean, cov = _kalman_update(belief.mean, belief.cov, stacked, meas.R, z)
    return AugmentedBelief(mean, cov, belief.k)


def predict_to(belief: AugmentedBelief, model: BridgeModel, target: int) -> GaussianDensity:
    """Marginal of the state at ``target`` after measurement-free prediction.

    For target == N the final-state block of the belief is returned directly;
    it is invariant under interior prediction steps.
    """
    if not belief.k <= target <= model.n_steps:
        raise HorizonExceeded(
            f"prediction target {target} outside [{belief.k}, {model.n_steps}]"
        )
    if target == model.n_steps:
        return belief.dest_marginal()
    current = belief
    for _ in range(target - belief.k):
        current = predict_step(current, model)
    return current.state_marginal()


def aee(truth_positions, estimated_positions) -> float:
    """Average Euclidean error across aligned runs: mean_i ||truth_i - estimate_i||."""
    truth = np.atleast_2d(np.asarray(truth_positions, dtype=float))
    est = np.atleast_2d(np.asarray(estimated_positions, dtype=float))
    if truth.shape != est.shape:
        raise DimensionMismatch(
            f"truth shape {truth.shape} does not match estimate shape {est.shape}"
        )
    return float(np.mean(np.linalg.norm(truth - est, axis=1)))


class MarkovKalmanFilter:
    """Plain Kalman filter and n-step predictor over the first-order motion model.

    Mirrors the stacked-filter interface (init_belief, predict_step,
    update_step, predict_to) so both comparison arms can share a driver loop.
    """

    def __init__(self, model: MarkovModelParams, meas: MeasurementModel):
        if meas.state_dim != model.dim:
            raise DimensionMismatch("measurement matrix does not match the model dimension")
        self.model = model
        self.meas = meas

    def init_belief(self) -> Belief:
        return Belief(self.model.initial.mean, self.model.initial.cov, 0)

    def predict_step(self, belief: Belief) -> Belief:
        j = belief.k
        if j > self.model.n_steps - 1:
            raise HorizonExceeded(f"no step leaves k={j}; the horizon ends at k={self.model.n_steps}")
        trans = self.model.transitions[j]
        mean = trans @ belief.mean
        cov = trans @ belief.cov @ trans.T + self.model.noise_covs[j]
        return Belief(mean, symmetrize(cov), j + 1)

    def update_step(self, belief: Belief, z) -> Belief:
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if z.shape != (self.meas.meas_dim,):
            raise DimensionMismatch(
                f"measurement shape {z.shape} does not match {self.meas.meas_dim}"
            )
        mean, cov = _kalman_update(belief.mean, belief.cov, self.meas.H, self.meas.R, z)
        return Belief(mean, cov, belief.k)

    def predict_to(self, belief: Belief, target: int) -> GaussianDensity:
        if not belief.k <= target <= self.model.n_steps:
            raise HorizonExceeded(
                f"prediction target {target} outside [{belief.k}, {self.model.n_steps}]"
            )
        current = belief
        for _ in range(target - belief.k):
            current = self.predict_step(current)
        return GaussianDensity(current.mean, current.cov)


def markov_reference_filter(model: MarkovModelParams, meas: MeasurementModel) -> MarkovKalmanFilter:
    """Comparison-arm filter over the plain motion model."""
    return MarkovKalmanFilter(model, meas)
