"""Randomized self-checks over small models.

Each check compares two independent computation routes at high precision on
freshly drawn random models, so a silent regression in one route cannot pass
unnoticed. They are run from the command line (``check``) and reused by the
test suite.
"""

from __future__ import annotations

import numpy as np

from .bridge import (
    EndpointSpec,
    assemble_bridge,
    bayes_step_density,
    boundary_from_endpoints,
    check_markov,
    check_reciprocal,
    induce_bridge,
    joint_density,
    mean_sequence,
)
from .gaussian import GaussianDensity, condition, symmetrize
from .markov import MarkovModelParams, endpoint_density_markov, terminal_propagation


def random_spd(rng: np.random.Generator, dim: int) -> np.ndarray:
    """A well-conditioned random symmetric positive definite matrix."""
    a = rng.standard_normal((dim, dim))
    return symmetrize(a @ a.T + 0.1 * np.eye(dim))


def random_transition(rng: np.random.Generator, dim: int) -> np.ndarray:
    """A random square matrix rescaled to spectral radius at most 1.2."""
    a = rng.standard_normal((dim, dim))
    radius = float(np.max(np.abs(np.linalg.eigvals(a))))
    if radius > 1.2:
        a *= 1.2 / radius
    return a


def random_markov_model(rng: np.random.Generator, dim: int, n_steps: int) -> MarkovModelParams:
    transitions = np.stack([random_transition(rng, dim) for _ in range(n_steps)])
    noise = np.stack([random_spd(rng, dim) for _ in range(n_steps)])
    initial = GaussianDensity(rng.standard_normal(dim), random_spd(rng, dim))
    return MarkovModelParams(transitions, noise, initial)


def random_boundary(rng: np.random.Generator, markov: MarkovModelParams):
    """An endpoint joint with a safely subcritical random origin/destination coupling.

    In whitened coordinates the joint covariance is [[I, K], [K', I]], which
    stays positive definite as long as the coupling block K has spectral norm
    below one; capping it at 1/2 keeps the construction valid for any seed.
    """
    dim = markov.dim
    destination = GaussianDensity(rng.standard_normal(dim), random_spd(rng, dim))
    origin = GaussianDensity(rng.standard_normal(dim), random_spd(rng, dim))
    coupling = rng.standard_normal((dim, dim))
    coupling *= 0.5 / max(1.0, float(np.linalg.norm(coupling, 2)))
    o_chol = np.linalg.cholesky(origin.cov)
    d_chol = np.linalg.cholesky(destination.cov)
    cross = o_chol @ coupling @ d_chol.T
    return EndpointSpec(origin, destination, cross)


def markov_joint_density(markov: MarkovModelParams) -> GaussianDensity:
    """Joint density of x_0..x_N under the motion model, by forward recursion.

    Means propagate through the transitions; covariance blocks follow
    cov(x_j, x_{k+1}) = cov(x_j, x_k) F_k' with the diagonal picking up the
    step noise. Deliberately shares no code with the coupled-model stacking.
    """
    n, dim = markov.n_steps, markov.dim
    total = (n + 1) * dim
    means = np.empty((n + 1, dim))
    cov = np.zeros((total, total))

    def block(i: int, j: int):
        return np.s_[i * dim : (i + 1) * dim, j * dim : (j + 1) * dim]

    means[0] = markov.initial.mean
    cov[block(0, 0)] = markov.initial.cov
    for k in range(n):
        f = markov.transitions[k]
        means[k + 1] = f @ means[k]
        for j in range(k + 1):
            cross = cov[block(j, k)] @ f.T
            cov[block(j, k + 1)] = cross
            cov[block(k + 1, j)] = cross.T
        cov[block(k + 1, k + 1)] = (
            symmetrize(f @ cov[block(k, k)] @ f.T) + markov.noise_covs[k]
        )
    return GaussianDensity(means.reshape(-1), symmetrize(cov))


def _rel_err(actual: np.ndarray, expected: np.ndarray) -> float:
    return float(np.linalg.norm(actual - expected) / (1.0 + np.linalg.norm(expected)))


def check_step_equivalence(rng: np.random.Generator) -> tuple[bool, str]:
    """Induced one-step law versus direct Bayes conditioning at random points."""
    worst = 0.0
    for dim, n_steps in ((1, 4), (2, 3), (2, 6), (3, 4)):
        markov = random_markov_model(rng, dim, n_steps)
        interior = induce_bridge(markov)
        for k in range(1, n_steps):
            prev = rng.standard_normal(dim)
            dest = rng.standard_normal(dim)
            direct = bayes_step_density(markov, k, prev, dest)
            induced_mean = interior.trans[k - 1] @ prev + interior.dest_gain[k - 1] @ dest
            worst = max(worst, _rel_err(induced_mean, direct.mean))
            worst = max(worst, _rel_err(interior.noise_covs[k - 1], direct.cov))
    return worst < 1e-8, f"max relative deviation {worst:.3e}"


def check_induced_consistency(rng: np.random.Generator) -> tuple[bool, str]:
    """Induced models must satisfy the interior consistency identity as built."""
    worst = 0.0
    for dim, n_steps in ((1, 5), (2, 4), (3, 5)):
        markov = random_markov_model(rng, dim, n_steps)
        model = assemble_bridge(induce_bridge(markov), boundary_from_endpoints(random_boundary(rng, markov)))
        ok, resid = check_reciprocal(model)
        if not ok:
            return False, f"induced model failed with residual {resid:.3e}"
        worst = max(worst, resid)
    return True, f"max residual {worst:.3e}"


def check_conditional_structure(rng: np.random.Generator) -> tuple[bool, str]:
    """Given the final state, the remaining sequence must be nearest-neighbour coupled.

    Conditioning the stacked joint on x_N must leave a block-tridiagonal
    precision matrix over x_0..x_{N-1}; off-tridiagonal mass is measured
    relative to the full precision norm.
    """
    worst = 0.0
    for dim, n_steps in ((1, 6), (2, 5)):
        markov = random_markov_model(rng, dim, n_steps)
        model = assemble_bridge(induce_bridge(markov), boundary_from_endpoints(random_boundary(rng, markov)))
        joint = joint_density(model)
        final = np.arange(n_steps * dim, (n_steps + 1) * dim)
        inner = condition(joint, final, joint.mean[final])
        precision = np.linalg.inv(inner.cov)
        mask = np.zeros_like(precision, dtype=bool)
        for i in range(n_steps):
            for j in range(n_steps):
                if abs(i - j) > 1:
                    mask[i * dim : (i + 1) * dim, j * dim : (j + 1) * dim] = True
        leak = float(np.linalg.norm(precision[mask]) / np.linalg.norm(precision))
        worst = max(worst, leak)
    return worst < 1e-8, f"max off-tridiagonal leakage {worst:.3e}"


def check_motion_recovery(rng: np.random.Generator) -> tuple[bool, str]:
    """Boundary taken from the motion model itself must reproduce its joint law."""
    worst = 0.0
    for dim, n_steps in ((1, 5), (2, 4)):
        markov = random_markov_model(rng, dim, n_steps)
        tp = terminal_propagation(markov)
        destination = endpoint_density_markov(markov)
        cross = markov.initial.cov @ tp.trans[0].T
        spec = EndpointSpec(markov.initial, destination, cross)
        model = assemble_bridge(induce_bridge(markov), boundary_from_endpoints(spec))
        if not check_markov(model, tol=1e-8):
            return False, "boundary identity violated on a matched model"
        expected = markov_joint_density(markov)
        actual = joint_density(model)
        worst = max(worst, _rel_err(actual.mean, expected.mean))
        worst = max(worst, _rel_err(actual.cov, expected.cov))
    return worst < 1e-8, f"max relative deviation {worst:.3e}"


def check_boundary_freedom(rng: np.random.Generator) -> tuple[bool, str]:
    """The assembled joint must reproduce whatever endpoint density was requested."""
    worst = 0.0
    for dim, n_steps in ((1, 5), (2, 4)):
        markov = random_markov_model(rng, dim, n_steps)
        spec = random_boundary(rng, markov)
        model = assemble_bridge(induce_bridge(markov), boundary_from_endpoints(spec))
        joint = joint_density(model)
        n = model.n_steps
        first = np.s_[0:dim]
        last = np.s_[n * dim : (n + 1) * dim]
        worst = max(worst, _rel_err(joint.mean[first], spec.origin.mean))
        worst = max(worst, _rel_err(joint.mean[last], spec.destination.mean))
        worst = max(worst, _rel_err(joint.cov[first, first], spec.origin.cov))
        worst = max(worst, _rel_err(joint.cov[last, last], spec.destination.cov))
        worst = max(worst, _rel_err(joint.cov[first, last], spec.cross_cov))
        means = mean_sequence(model)
        worst = max(worst, _rel_err(joint.mean.reshape(n + 1, dim), means))
    return worst < 1e-8, f"max relative deviation {worst:.3e}"


_CHECKS = (
    ("one-step law matches direct conditioning", check_step_equivalence),
    ("induced interior passes the consistency identity", check_induced_consistency),
    ("conditioned precision is block tridiagonal", check_conditional_structure),
    ("matched boundary recovers the motion model", check_motion_recovery),
    ("assembled joint honours the requested endpoints", check_boundary_freedom),
)


def run_checks(seed: int = 0) -> list[tuple[str, bool, str]]:
    """Run every self-check on models drawn from the given seed."""
    results = []
    for name, fn in _CHECKS:
        ok, detail = fn(np.random.default_rng(seed))
        results.append((name, ok, detail))
    return results
