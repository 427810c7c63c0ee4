"""Destination-aware trajectory modeling with endpoint-coupled Gaussian sequences.

The package builds linear-Gaussian sequence models whose joint origin and
destination density can be pinned arbitrarily while each step stays a simple
one-step evolution law, induces them from plain motion models, samples them,
runs exact recursive estimation against position measurements, and drives the
Monte-Carlo comparison scenario from a small CLI.
"""

from .bridge import (
    JOINT_DENSITY_MAX_DIM,
    BridgeBoundary,
    BridgeDynamics,
    BridgeModel,
    EndpointSpec,
    assemble_bridge,
    bayes_step_density,
    boundary_from_endpoints,
    check_markov,
    check_reciprocal,
    induce_bridge,
    joint_density,
    mean_sequence,
    sample_bridge,
    sample_bridge_paths,
)
from .errors import (
    BridgeTrackError,
    ConfigError,
    DimensionMismatch,
    EmptyFreeBlock,
    HorizonExceeded,
    IndexOutOfRange,
    InvalidConfig,
    InvalidParameter,
    NotPositiveDefinite,
    ParseError,
    PreconditionViolated,
    TooLarge,
    ValidationError,
)
from .estimate import (
    AugmentedBelief,
    Belief,
    MarkovKalmanFilter,
    MeasurementModel,
    aee,
    init_belief,
    markov_reference_filter,
    predict_step,
    predict_to,
    update_step,
)
from .gaussian import GaussianDensity, condition, log_density, make_gaussian
from .markov import (
    MarkovModelParams,
    TerminalPropagation,
    Trajectory,
    build_cv_model,
    endpoint_density_markov,
    sample_markov,
    sample_markov_paths,
    terminal_propagation,
)
from .scenario import (
    Fig1Result,
    Fig2Result,
    ScenarioConfig,
    default_config,
    parse_config,
    run_fig1,
    run_fig2,
    simulate_fig1,
    simulate_fig2,
    substream,
)

__version__ = "0.1.0"

__all__ = [
    "AugmentedBelief",
    "Belief",
    "BridgeBoundary",
    "BridgeDynamics",
    "BridgeModel",
    "BridgeTrackError",
    "ConfigError",
    "DimensionMismatch",
    "EmptyFreeBlock",
    "EndpointSpec",
    "Fig1Result",
    "Fig2Result",
    "GaussianDensity",
    "HorizonExceeded",
    "IndexOutOfRange",
    "InvalidConfig",
    "InvalidParameter",
    "JOINT_DENSITY_MAX_DIM",
    "MarkovKalmanFilter",
    "MarkovModelParams",
    "MeasurementModel",
    "NotPositiveDefinite",
    "ParseError",
    "PreconditionViolated",
    "ScenarioConfig",
    "TerminalPropagation",
    "TooLarge",
    "Trajectory",
    "ValidationError",
    "aee",
    "assemble_bridge",
    "bayes_step_density",
    "boundary_from_endpoints",
    "build_cv_model",
    "check_markov",
    "check_reciprocal",
    "condition",
    "default_config",
    "endpoint_density_markov",
    "induce_bridge",
    "init_belief",
    "joint_density",
    "log_density",
    "make_gaussian",
    "markov_reference_filter",
    "mean_sequence",
    "parse_config",
    "predict_step",
    "predict_to",
    "run_fig1",
    "run_fig2",
    "sample_bridge",
    "sample_bridge_paths",
    "sample_markov",
    "sample_markov_paths",
    "simulate_fig1",
    "simulate_fig2",
    "substream",
    "terminal_propagation",
    "update_step",
]
