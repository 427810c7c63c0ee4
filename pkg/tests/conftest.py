import numpy as np
import pytest

from bridgetrack import (
    EndpointSpec,
    GaussianDensity,
    MarkovModelParams,
    assemble_bridge,
    boundary_from_endpoints,
    endpoint_density_markov,
    induce_bridge,
    terminal_propagation,
)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def assert_close_rel(actual, expected, tol=1e-9):
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    err = np.linalg.norm(actual - expected) / (1.0 + np.linalg.norm(expected))
    assert err <= tol, f"relative deviation {err:.3e} exceeds {tol:.3e}"


def scalar_random_walk(n_steps: int) -> MarkovModelParams:
    """x_{k+1} = x_k + w_k with unit noise and x_0 ~ N(0, 1)."""
    ones = np.ones((n_steps, 1, 1))
    return MarkovModelParams(ones, ones.copy(), GaussianDensity([0.0], [[1.0]]))


def markov_matched_bridge(markov: MarkovModelParams):
    """Coupled model whose endpoints are exactly the motion model's own."""
    tp = terminal_propagation(markov)
    destination = endpoint_density_markov(markov)
    cross = markov.initial.cov @ tp.trans[0].T
    spec = EndpointSpec(markov.initial, destination, cross)
    return assemble_bridge(induce_bridge(markov), boundary_from_endpoints(spec))


@pytest.fixture(scope="session")
def scenario_models():
    """Default-scenario models shared by the slower integration tests."""
    from bridgetrack import default_config

    config = default_config()
    return {
        "config": config,
        "markov": config.markov_model(),
        "bridge": config.bridge_model(),
        "meas": config.measurement_model(),
    }
