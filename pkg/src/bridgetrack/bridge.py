"""Destination-coupled linear-Gaussian sequence models.

Interior states evolve from their predecessor plus a gain on the final
state, and an explicit boundary ties the origin to the destination:

    x_N  ~  N(dest_mean, dest_cov)
    x_0  =  origin_mean + origin_dest_gain (x_N - dest_mean) + e_0
    x_k  =  trans[k-1] x_{k-1} + dest_gain[k-1] x_N + e_k      (1 <= k <= N-1)

with independent Gaussian noises. This pins the sequence to an arbitrary
joint origin/destination density while keeping a one-step evolution law.
The module covers construction of the interior gains from a plain motion
model, boundary construction from endpoint densities, sampling, property
checks, and two brute-force verification densities.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_solve

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    PreconditionViolated,
    TooLarge,
)
from .gaussian import GaussianDensity, condition, spd_cholesky, symmetrize
from .markov import MarkovModelParams, Trajectory, terminal_propagation

JOINT_DENSITY_MAX_DIM = 64


class BridgeDynamics:
    """Interior step parameters: x_k = trans[k-1] x_{k-1} + dest_gain[k-1] x_N + e_k."""

    def __init__(self, trans, dest_gain, noise_covs):
        trans = np.asarray(trans, dtype=float)
        dest_gain = np.asarray(dest_gain, dtype=float)
        noise = np.asarray(noise_covs, dtype=float)
        if trans.ndim != 3 or trans.shape[1] != trans.shape[2]:
            raise DimensionMismatch("interior transitions must be a stack of square matrices")
        if trans.shape[0] < 1:
            raise DimensionMismatch("a bridge needs at least one interior step")
        if dest_gain.shape != trans.shape or noise.shape != trans.shape:
            raise DimensionMismatch("interior parameter stacks must share one shape")
        covs = np.empty_like(noise)
        chols = np.empty_like(noise)
        for i in range(noise.shape[0]):
            covs[i], chols[i] = spd_cholesky(noise[i], name=f"interior noise at step {i + 1}")
        self.trans = trans
        self.dest_gain = dest_gain
        self.noise_covs = covs
        self.noise_chols = chols

    @property
    def n_steps(self) -> int:
        return self.trans.shape[0] + 1

    @property
    def dim(self) -> int:
        return self.trans.shape[1]


class BridgeBoundary:
    """Boundary tie between origin and destination.

    x_N ~ N(dest_mean, dest_cov) and
    x_0 = origin_mean + origin_dest_gain (x_N - dest_mean) + e_0 with
    e_0 ~ N(0, origin_noise_cov).
    """

    def __init__(self, origin_dest_gain, origin_noise_cov, dest_cov, origin_mean, dest_mean):
        gain = np.asarray(origin_dest_gain, dtype=float)
        origin_mean = np.atleast_1d(np.asarray(origin_mean, dtype=float))
        dest_mean = np.atleast_1d(np.asarray(dest_mean, dtype=float))
        dim = origin_mean.size
        if dest_mean.size != dim:
            raise DimensionMismatch("origin and destination means must share a dimension")
        if gain.shape != (dim, dim):
            raise DimensionMismatch("origin gain must be a (d, d) matrix")
        self.origin_dest_gain = gain
        self.origin_noise_cov, self.origin_noise_chol = spd_cholesky(
            origin_noise_cov, name="origin noise covariance"
        )
        self.dest_cov, self.dest_chol = spd_cholesky(dest_cov, name="destination covariance")
        if self.origin_noise_cov.shape != (dim, dim) or self.dest_cov.shape != (dim, dim):
            raise DimensionMismatch("boundary covariances must be (d, d)")
        self.origin_mean = origin_mean
        self.dest_mean = dest_mean

    @property
    def dim(self) -> int:
        return self.origin_mean.size


class BridgeModel:
    """Assembled destination-coupled model: interior dynamics plus boundary."""

    def __init__(self, interior: BridgeDynamics, boundary: BridgeBoundary):
        if interior.dim != boundary.dim:
            raise DimensionMismatch(
                f"interior dimension {interior.dim} does not match boundary dimension {boundary.dim}"
            )
        self.interior = interior
        self.boundary = boundary
        # flattened views, used everywhere downstream
        self.trans = interior.trans
        self.dest_gain = interior.dest_gain
        self.noise_covs = interior.noise_covs
        self.noise_chols = interior.noise_chols
        self.origin_dest_gain = boundary.origin_dest_gain
        self.origin_noise_cov = boundary.origin_noise_cov
        self.origin_noise_chol = boundary.origin_noise_chol
        self.dest_cov = boundary.dest_cov
        self.dest_chol = boundary.dest_chol
        self.origin_mean = boundary.origin_mean
        self.dest_mean = boundary.dest_mean

    @property
    def n_steps(self) -> int:
        return self.interior.n_steps

    @property
    def dim(self) -> int:
        return self.interior.dim

    def __repr__(self) -> str:
        return f"BridgeModel(n_steps={self.n_steps}, dim={self.dim})"


class EndpointSpec:
    """Joint Gaussian over the origin and destination states.

    The stacked covariance [[C_origin, C_cross], [C_cross', C_dest]] must be
    strictly positive definite so that both the boundary construction and the
    implied conditionals stay nonsingular.
    """

    def __init__(self, origin: GaussianDensity, destination: GaussianDensity, cross_cov):
        if origin.dim != destination.dim:
            raise DimensionMismatch("origin and destination densities must share a dimension")
        cross = np.asarray(cross_cov, dtype=float)
        if cross.shape != (origin.dim, origin.dim):
            raise DimensionMismatch("cross covariance must be a (d, d) matrix")
        joint = np.block([[origin.cov, cross], [cross.T, destination.cov]])
        spd_cholesky(joint, name="joint endpoint covariance")
        self.origin = origin
        self.destination = destination
        self.cross_cov = cross

    @property
    def dim(self) -> int:
        return self.origin.dim


def induce_bridge(markov: MarkovModelParams) -> BridgeDynamics:
    """Interior gains reproducing the motion model's one-step law conditioned on x_N.

    With A_k, C_k the end-of-horizon propagation terms (p(x_N | x_k) =
    N(A_k x_k, C_k)) and M the motion-model step parameters, each interior
    step becomes

        noise      G_k       = (M_k^{-1} + A_k' C_k^{-1} A_k)^{-1}
        final gain G_{k,N}   = G_k A_k' C_k^{-1}
        step gain  G_{k,k-1} = M_{k,k-1} - G_{k,N} A_{k-1}

    which is exactly the conditional of the one-step transition given the
    final state.
    """
    tp = terminal_propagation(markov)
    n, dim = markov.n_steps, markov.dim
    trans = np.empty((n - 1, dim, dim))
    dest_gain = np.empty_like(trans)
    noise = np.empty_like(trans)
    eye = np.eye(dim)
    for k in range(1, n):
        a_k = tp.trans[k]
        _, c_chol = spd_cholesky(tp.covs[k], name=f"terminal covariance at step {k}")
        w = cho_solve((c_chol, True), a_k)
        m_inv = cho_solve((markov.noise_chols[k - 1], True), eye)
        info = symmetrize(m_inv + a_k.T @ w)
        _, info_chol = spd_cholesky(info, name=f"step information at step {k}")
        g_noise = symmetrize(cho_solve((info_chol, True), eye))
        g_dest = g_noise @ w.T
        trans[k - 1] = markov.transitions[k - 1] - g_dest @ tp.trans[k - 1]
        dest_gain[k - 1] = g_dest
        noise[k - 1] = g_noise
    return BridgeDynamics(trans, dest_gain, noise)


def boundary_from_endpoints(spec: EndpointSpec) -> BridgeBoundary:
    """Boundary parameters matching a joint origin/destination density.

    gain = C_cross C_dest^{-1}, origin noise = C_origin - C_cross C_dest^{-1}
    C_cross', destination covariance kept as is. Raises NotPositiveDefinite
    if the implied origin noise degenerates.
    """
    cross = spec.cross_cov
    gain = cho_solve((spec.destination.chol, True), cross.T).T
    origin_noise = symmetrize(spec.origin.cov - gain @ cross.T)
    return BridgeBoundary(
        gain, origin_noise, spec.destination.cov, spec.origin.mean, spec.destination.mean
    )


def assemble_bridge(interior: BridgeDynamics, boundary: BridgeBoundary) -> BridgeModel:
    """Combine interior dynamics with a boundary into a complete model."""
    return BridgeModel(interior, boundary)


def sample_bridge_paths(model: BridgeModel, rng: np.random.Generator, n_paths: int) -> np.ndarray:
    """Sample trajectories destination-first; returns an (n_paths, N+1, d) array.

    Draw order: x_N from its marginal, then x_0 from the boundary tie, then
    the interior recursion forward. Applying the interior law to the raw
    states keeps the mean sequence implied by the boundary means without any
    explicit offset bookkeeping.
    """
    n, dim = model.n_steps, model.dim
    out = np.empty((n_paths, n + 1, dim))
    x_end = model.dest_mean + rng.standard_normal((n_paths, dim)) @ model.dest_chol.T
    out[:, n] = x_end
    out[:, 0] = (
        model.origin_mean
        + (x_end - model.dest_mean) @ model.origin_dest_gain.T
        + rng.standard_normal((n_paths, dim)) @ model.origin_noise_chol.T
    )
    for k in range(1, n):
        noise = rng.standard_normal((n_paths, dim)) @ model.noise_chols[k - 1].T
        out[:, k] = (
            out[:, k - 1] @ model.trans[k - 1].T + x_end @ model.dest_gain[k - 1].T + noise
        )
    return out


def sample_bridge(model: BridgeModel, rng: np.random.Generator) -> Trajectory:
    """Draw one trajectory x_0..x_N from the destination-coupled model."""
    return Trajectory(sample_bridge_paths(model, rng, 1)[0])


def mean_sequence(model: BridgeModel) -> np.ndarray:
    """Means of x_0..x_N as an (N+1, d) array.

    Interior means follow m_k = trans[k-1] m_{k-1} + dest_gain[k-1] dest_mean
    from m_0 = origin_mean; the final entry is the destination mean itself
    (the recursion is not constrained to reproduce it).
    """
    n, dim = model.n_steps, model.dim
    means = np.empty((n + 1, dim))
    means[0] = model.origin_mean
    for k in range(1, n):
        means[k] = model.trans[k - 1] @ means[k - 1] + model.dest_gain[k - 1] @ model.dest_mean
    means[n] = model.dest_mean
    return means


def _scaled_residual(lhs: np.ndarray, rhs: np.ndarray) -> float:
    """Frobenius residual relative to the left operand, with an additive guard."""
    return float(np.linalg.norm(lhs - rhs) / (1.0 + np.linalg.norm(lhs)))


def check_reciprocal(model: BridgeModel, tol: float = 1e-9) -> tuple[bool, float]:
    """Whether consecutive interior steps exert a consistent pull toward x_N.

    Tests G_k^{-1} G_{k,N} = G_{k+1,k}' G_{k+1}^{-1} G_{k+1,N} for every
    interior pair, using a relative residual with an additive guard of 1.
    Returns (all residuals within tol, maximum residual); vacuously
    (True, 0.0) when there is a single interior step.
    """
    worst = 0.0
    for k in range(1, model.n_steps - 1):
        lhs = cho_solve((model.noise_chols[k - 1], True), model.dest_gain[k - 1])
        rhs = model.trans[k].T @ cho_solve((model.noise_chols[k], True), model.dest_gain[k])
        worst = max(worst, _scaled_residual(lhs, rhs))
    return worst <= tol, worst


def check_markov(model: BridgeModel, tol: float = 1e-9) -> bool:
    """Whether the boundary extends the interior consistency down to the origin.

    Requires check_reciprocal to pass first (PreconditionViolated otherwise),
    then tests G_0^{-1} G_{0,N} = G_{1,0}' G_1^{-1} G_{1,N} with the same
    residual criterion.
    """
    ok, resid = check_reciprocal(model, tol)
    if not ok:
        raise PreconditionViolated(
            f"interior consistency residual {resid:.3e} exceeds tolerance {tol:.3e}"
        )
    lhs = cho_solve((model.origin_noise_chol, True), model.origin_dest_gain)
    rhs = model.trans[0].T @ cho_solve((model.noise_chols[0], True), model.dest_gain[0])
    return _scaled_residual(lhs, rhs) <= tol


def bayes_step_density(markov: MarkovModelParams, k: int, prev_state, dest_state) -> GaussianDensity:
    """One-step conditional p(x_k | x_{k-1}, x_N) by direct conditioning.

    Forms the joint of (x_k, x_N) given x_{k-1} from the motion model and
    conditions on x_N via the Gaussian core. This never touches the induced
    gain formulas, so it doubles as an independent verification target for
    induce_bridge.
    """
    n, dim = markov.n_steps, markov.dim
    if not 1 <= k <= n - 1:
        raise IndexOutOfRange(f"step index {k} must lie in [1, {n - 1}]")
    prev = np.atleast_1d(np.asarray(prev_state, dtype=float))
    dest = np.atleast_1d(np.asarray(dest_state, dtype=float))
    if prev.shape != (dim,) or dest.shape != (dim,):
        raise DimensionMismatch("conditioning states must match the model dimension")
    tp = terminal_propagation(markov)
    step_mean = markov.transitions[k - 1] @ prev
    m_k = markov.noise_covs[k - 1]
    a_k = tp.trans[k]
    am = a_k @ m_k
    joint_mean = np.concatenate([step_mean, a_k @ step_mean])
    joint_cov = np.block([[m_k, am.T], [am, symmetrize(am @ a_k.T) + tp.covs[k]]])
    joint = GaussianDensity(joint_mean, symmetrize(joint_cov))
    return condition(joint, np.arange(dim, 2 * dim), dest)


def joint_density(model: BridgeModel) -> GaussianDensity:
    """Exact joint density of x_0..x_N as one stacked Gaussian (small models only).

    Each state is expressed as a linear map of the independent noises
    (e_0, e_1..e_{N-1}, e_N) and the maps are composed; the cubic cost is
    only worth paying for verification-sized models, so the stacked
    dimension is guarded at 64.
    """
    n, dim = model.n_steps, model.dim
    total = (n + 1) * dim
    if total > JOINT_DENSITY_MAX_DIM:
        raise TooLarge(
            f"stacked dimension {total} exceeds the verification guard {JOINT_DENSITY_MAX_DIM}"
        )

    def block(j: int) -> slice:
        return slice(j * dim, (j + 1) * dim)

    eye = np.eye(dim)
    coeff = np.zeros((n + 1, dim, total))
    means = np.empty((n + 1, dim))
    means[n] = model.dest_mean
    coeff[n][:, block(n)] = eye
    means[0] = model.origin_mean
    coeff[0][:, block(0)] = eye
    coeff[0][:, block(n)] = model.origin_dest_gain
    for k in range(1, n):
        means[k] = model.trans[k - 1] @ means[k - 1] + model.dest_gain[k - 1] @ model.dest_mean
        coeff[k] = model.trans[k - 1] @ coeff[k - 1]
        coeff[k][:, block(k)] += eye
        coeff[k][:, block(n)] += model.dest_gain[k - 1]
    noise_cov = np.zeros((total, total))
    noise_cov[block(0), block(0)] = model.origin_noise_cov
    for k in range(1, n):
        noise_cov[block(k), block(k)] = model.noise_covs[k - 1]
    noise_cov[block(n), block(n)] = model.dest_cov
    flat = coeff.reshape((n + 1) * dim, total)
    cov = flat @ noise_cov @ flat.T
    return GaussianDensity(means.reshape(-1), symmetrize(cov))
