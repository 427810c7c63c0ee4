"""First-order linear-Gaussian motion models.

Holds per-step transition/noise parameters, a planar nearly-constant-velocity
builder, trajectory sampling, and the end-of-horizon propagation terms that
later couple interior steps to the final state.

Index convention: ``transitions[i]`` maps state i to state i+1 and
``noise_covs[i]`` is the covariance of the noise entering state i+1, for
i in [0, N-1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidParameter
from .gaussian import GaussianDensity, sample, spd_cholesky, symmetrize


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States x_0..x_N stored as an (N+1, d) array."""

    states: np.ndarray

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        if states.ndim != 2 or states.shape[0] < 2:
            raise DimensionMismatch("trajectory requires an (N+1, d) array with N >= 1")
        object.__setattr__(self, "states", states)

    @property
    def n_steps(self) -> int:
        return self.states.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.states.shape[1]


class MarkovModelParams:
    """Per-step transitions and noise covariances plus the initial density."""

    def __init__(self, transitions, noise_covs, initial: GaussianDensity):
        trans = np.asarray(transitions, dtype=float)
        if trans.ndim != 3 or trans.shape[1] != trans.shape[2]:
            raise DimensionMismatch("transitions must be a stack of square matrices")
        n_steps, dim = trans.shape[0], trans.shape[1]
        if n_steps < 2:
            raise InvalidParameter("the horizon must span at least two steps")
        if initial.dim != dim:
            raise DimensionMismatch(
                f"initial density dimension {initial.dim} does not match state dimension {dim}"
            )
        noise = np.asarray(noise_covs, dtype=float)
        if noise.shape != (n_steps, dim, dim):
            raise DimensionMismatch("noise covariances must match the transition stack")
        covs = np.empty_like(noise)
        chols = np.empty_like(noise)
        for i in range(n_steps):
            covs[i], chols[i] = spd_cholesky(noise[i], name=f"noise covariance at step {i + 1}")
        self.transitions = trans
        self.noise_covs = covs
        self.noise_chols = chols
        self.initial = initial

    @property
    def n_steps(self) -> int:
        return self.transitions.shape[0]

    @property
    def dim(self) -> int:
        return self.transitions.shape[1]

    def __repr__(self) -> str:
        return f"MarkovModelParams(n_steps={self.n_steps}, dim={self.dim})"


def build_cv_model(T: float, q: float, n_steps: int, origin: GaussianDensity) -> MarkovModelParams:
    """Planar nearly-constant-velocity model over the state [x, vx, y, vy].

    Per axis the transition is [[1, T], [0, 1]] and the noise covariance is
    q * [[T^3/3, T^2/2], [T^2/2, T]], arranged block-diagonally over the two
    axes. ``q`` must be strictly positive or the noise would be singular.
    """
    if T <= 0.0:
        raise InvalidParameter("time step T must be positive")
    if q <= 0.0:
        raise InvalidParameter("noise intensity q must be strictly positive")
    if n_steps < 2:
        raise InvalidParameter("the horizon must span at least two steps")
    if origin.dim != 4:
        raise DimensionMismatch("origin density must be 4-dimensional [x, vx, y, vy]")
    f_axis = np.array([[1.0, T], [0.0, 1.0]])
    q_axis = q * np.array([[T**3 / 3.0, T**2 / 2.0], [T**2 / 2.0, T]])
    trans = np.kron(np.eye(2), f_axis)
    noise = np.kron(np.eye(2), q_axis)
    return MarkovModelParams([trans] * n_steps, [noise] * n_steps, origin)


def sample_markov_paths(model: MarkovModelParams, rng: np.random.Generator, n_paths: int) -> np.ndarray:
    """Sample ``n_paths`` trajectories at once; returns an (n_paths, N+1, d) array."""
    n, dim = model.n_steps, model.dim
    out = np.empty((n_paths, n + 1, dim))
    out[:, 0] = sample(model.initial, rng, size=n_paths)
    for k in range(n):
        noise = rng.standard_normal((n_paths, dim)) @ model.noise_chols[k].T
        out[:, k + 1] = out[:, k] @ model.transitions[k].T + noise
    return out


def sample_markov(model: MarkovModelParams, rng: np.random.Generator) -> Trajectory:
    """Draw one trajectory x_0..x_N from the motion model."""
    return Trajectory(sample_markov_paths(model, rng, 1)[0])


@dataclass(frozen=True, eq=False)
class TerminalPropagation:
    """Propagation of every state to the end of the horizon.

    ``trans[k]`` maps x_k to E[x_N | x_k] for k in [0, N] (identity at k=N)
    and ``covs[k]`` is Cov(x_N | x_k) for k in [0, N-1], so that
    p(x_N | x_k) = N(trans[k] x_k, covs[k]).
    """

    trans: np.ndarray
    covs: np.ndarray


def terminal_propagation(model: MarkovModelParams) -> TerminalPropagation:
    """Backward accumulation of the transition products and noise sums to the horizon end."""
    n, dim = model.n_steps, model.dim
    trans = np.empty((n + 1, dim, dim))
    covs = np.empty((n, dim, dim))
    trans[n] = np.eye(dim)
    for k in range(n - 1, -1, -1):
        step = trans[k + 1] @ model.noise_covs[k] @ trans[k + 1].T
        covs[k] = symmetrize(step + (covs[k + 1] if k + 1 < n else 0.0))
        trans[k] = trans[k + 1] @ model.transitions[k]
    return TerminalPropagation(trans=trans, covs=covs)


def endpoint_density_markov(model: MarkovModelParams) -> GaussianDensity:
    """Marginal of the final state implied by the initial density and the dynamics."""
    tp = terminal_propagation(model)
    lead = tp.trans[0]
    mean = lead @ model.initial.mean
    cov = lead @ model.initial.cov @ lead.T + tp.covs[0]
    return GaussianDensity(mean, cov)
