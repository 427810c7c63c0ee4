"""Scenario configuration, Monte-Carlo drivers, and delimited output.

The scenario is the planar nearly-constant-velocity setting: a destination-
coupled model induced from the motion model with endpoints taken from the
configured joint density, position-only measurements over an initial window,
and paired prediction-error comparison against the plain-motion Kalman arm.

Determinism contract: run i of lane L under seed s always uses the generator
``default_rng(SeedSequence(s, spawn_key=(L, i)))``, and per-run results are
merged in run-index order, so output files are byte-identical for a fixed
(config, seed) regardless of the worker count.
"""

from __future__ import annotations

import ast
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bridge import (
    BridgeModel,
    EndpointSpec,
    assemble_bridge,
    boundary_from_endpoints,
    induce_bridge,
    sample_bridge_paths,
)
from .errors import (
    BridgeTrackError,
    ParseError,
    ValidationError,
)
from .estimate import (
    MarkovKalmanFilter,
    MeasurementModel,
    aee,
    init_belief,
    predict_step,
    update_step,
)
from .gaussian import GaussianDensity
from .markov import MarkovModelParams, build_cv_model, sample_markov_paths

POSITION_PICK = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]])

FIG1_BRIDGE_LANE = 0
FIG1_MARKOV_LANE = 1
FIG2_LANE = 2


def substream(seed: int, lane: int, run: int) -> np.random.Generator:
    """Deterministic per-run generator keyed by (seed, lane, run index)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(lane, run)))


def _default_origin_mean():
    return np.array([2000.0, 70.0, 5000.0, 0.0])


def _default_dest_mean():
    return np.array([130000.0, 70.0, 10000.0, 0.0])


def _default_endpoint_cov():
    return np.diag([1000.0, 10.0, 1000.0, 10.0])


@dataclass(eq=False)
class ScenarioConfig:
    """Full description of one simulation/prediction experiment.

    Defaults reproduce the reference scenario: a 100-step constant-velocity
    leg from around (2000, 5000) to a destination around (130000, 10000),
    position measurements with variance 100 on each axis for the first nine
    steps, and 1000 Monte-Carlo runs under seed 42.
    """

    T: float = 15.0
    q: float = 0.01
    n_steps: int = 100
    origin_mean: np.ndarray = field(default_factory=_default_origin_mean)
    origin_cov: np.ndarray = field(default_factory=_default_endpoint_cov)
    dest_mean: np.ndarray = field(default_factory=_default_dest_mean)
    dest_cov: np.ndarray = field(default_factory=_default_endpoint_cov)
    cross_cov: np.ndarray = field(default_factory=lambda: np.zeros((4, 4)))
    meas_cov: np.ndarray = field(default_factory=lambda: np.diag([100.0, 100.0]))
    runs: int = 1000
    measure_until: int = 9
    seed: int = 42
    out_dir: str = "results"

    def validate(self) -> None:
        """Raise ValidationError if any field violates the scenario contract."""
        if self.T <= 0:
            raise ValidationError("T must be positive")
        if self.q <= 0:
            raise ValidationError("q must be positive")
        if self.n_steps < 2:
            raise ValidationError("N must be at least 2")
        if self.runs < 1:
            raise ValidationError("runs must be at least 1")
        if not 1 <= self.measure_until < self.n_steps:
            raise ValidationError("measure_until must lie in [1, N)")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must fit in an unsigned 64-bit integer")
        try:
            origin = GaussianDensity(self.origin_mean, self.origin_cov)
            destination = GaussianDensity(self.dest_mean, self.dest_cov)
            if origin.dim != 4:
                raise ValidationError("the scenario state must be 4-dimensional [x, vx, y, vy]")
            EndpointSpec(origin, destination, self.cross_cov)
            MeasurementModel(POSITION_PICK, self.meas_cov)
        except ValidationError:
            raise
        except BridgeTrackError as exc:
            raise ValidationError(str(exc)) from exc

    def origin_density(self) -> GaussianDensity:
        return GaussianDensity(self.origin_mean, self.origin_cov)

    def destination_density(self) -> GaussianDensity:
        return GaussianDensity(self.dest_mean, self.dest_cov)

    def endpoint_spec(self) -> EndpointSpec:
        return EndpointSpec(self.origin_density(), self.destination_density(), self.cross_cov)

    def markov_model(self) -> MarkovModelParams:
        return build_cv_model(self.T, self.q, self.n_steps, self.origin_density())

    def bridge_model(self) -> BridgeModel:
        return assemble_bridge(
            induce_bridge(self.markov_model()), boundary_from_endpoints(self.endpoint_spec())
        )

    def measurement_model(self) -> MeasurementModel:
        return MeasurementModel(POSITION_PICK, self.meas_cov)


def default_config() -> ScenarioConfig:
    """The reference scenario with seed 42."""
    return ScenarioConfig()


# --- config file parsing ---------------------------------------------------
#
# Grammar: one "key = value" assignment per line; '#' starts a comment and
# blank lines are ignored. Values are an integer, a float, a bracketed
# vector like [2000, 70, 5000, 0], a bracketed matrix like [[1, 0], [0, 1]],
# the shorthand diag(a, b, ...), or a (possibly quoted) string. Keys are
# dotted; unknown or duplicate keys are parse errors.

_FLOAT_KEYS = {"T": "T", "q": "q"}
_INT_KEYS = {"N": "n_steps", "runs": "runs", "measure_until": "measure_until", "seed": "seed"}
_VECTOR_KEYS = {"origin.mean": "origin_mean", "destination.mean": "dest_mean"}
_MATRIX_KEYS = {
    "origin.cov": "origin_cov",
    "destination.cov": "dest_cov",
    "cross_cov": "cross_cov",
    "measurement.cov": "meas_cov",
}
_STRING_KEYS = {"out": "out_dir"}


def _parse_value(raw: str, key: str, line_no: int):
    raw = raw.strip()
    if not raw:
        raise ParseError(f"line {line_no}: field '{key}': missing value")
    if raw.startswith("diag(") and raw.endswith(")"):
        inner = raw[len("diag(") : -1]
        try:
            entries = [float(part) for part in inner.split(",")]
        except ValueError as exc:
            raise ParseError(f"line {line_no}: field '{key}': bad diag(...) entries") from exc
        return np.diag(entries)
    if raw.startswith("["):
        try:
            parsed = ast.literal_eval(raw)
            return np.asarray(parsed, dtype=float)
        except (ValueError, SyntaxError, TypeError) as exc:
            raise ParseError(f"line {line_no}: field '{key}': malformed numeric list") from exc
    if raw[0] in "'\"" and len(raw) >= 2 and raw[-1] == raw[0]:
        return raw[1:-1]
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def parse_config(path) -> ScenarioConfig:
    """Parse a flat dotted-key config file; omitted keys keep their defaults.

    Raises ParseError with line/field diagnostics for malformed input and
    ValidationError when parsed values violate the scenario contract. An
    empty file yields the full default scenario.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read config file {path}: {exc}") from exc
    config = ScenarioConfig()
    seen: set[str] = set()
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ParseError(f"line {line_no}: expected 'key = value'")
        key, raw = body.split("=", 1)
        key = key.strip()
        if not key:
            raise ParseError(f"line {line_no}: empty key")
        if key in seen:
            raise ParseError(f"line {line_no}: duplicate key '{key}'")
        seen.add(key)
        value = _parse_value(raw, key, line_no)
        if key in _FLOAT_KEYS:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ParseError(f"line {line_no}: field '{key}': expected a number")
            setattr(config, _FLOAT_KEYS[key], float(value))
        elif key in _INT_KEYS:
            if not isinstance(value, int) or isinstance(value, bool):
                raise ParseError(f"line {line_no}: field '{key}': expected an integer")
            setattr(config, _INT_KEYS[key], value)
        elif key in _VECTOR_KEYS:
            if not isinstance(value, np.ndarray) or value.ndim != 1:
                raise ParseError(f"line {line_no}: field '{key}': expected a vector [..]")
            setattr(config, _VECTOR_KEYS[key], value)
        elif key in _MATRIX_KEYS:
            if not isinstance(value, np.ndarray) or value.ndim != 2:
                raise ParseError(
                    f"line {line_no}: field '{key}': expected a matrix [[..],..] or diag(..)"
                )
            setattr(config, _MATRIX_KEYS[key], value)
        elif key in _STRING_KEYS:
            if not isinstance(value, str):
                raise ParseError(f"line {line_no}: field '{key}': expected a string")
            setattr(config, _STRING_KEYS[key], value)
        else:
            raise ParseError(f"line {line_no}: unknown key '{key}'")
    config.validate()
    return config


# --- Monte-Carlo drivers ----------------------------------------------------


def _run_chunks(chunk_fn, payload, n_runs: int, workers: int) -> list:
    """Evaluate per-run tasks, merged in run-index order regardless of pool shape."""
    if workers <= 1:
        return chunk_fn((payload, list(range(n_runs))))
    chunks = [c.tolist() for c in np.array_split(np.arange(n_runs), workers) if c.size]
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(chunk_fn, [(payload, chunk) for chunk in chunks]))
    return [item for part in parts for item in part]


@dataclass(eq=False)
class Fig1Result:
    """Sampled trajectory bundles for the two models, shape (runs, N+1, 4) each."""

    bridge_paths: np.ndarray
    markov_paths: np.ndarray


def _fig1_chunk(args):
    (bridge, markov, seed), runs = args
    out = []
    for run in runs:
        bridge_path = sample_bridge_paths(bridge, substream(seed, FIG1_BRIDGE_LANE, run), 1)[0]
        markov_path = sample_markov_paths(markov, substream(seed, FIG1_MARKOV_LANE, run), 1)[0]
        out.append((bridge_path, markov_path))
    return out


def simulate_fig1(config: ScenarioConfig, workers: int = 1) -> Fig1Result:
    """Sample paired trajectory bundles from the coupled and plain models."""
    config.validate()
    payload = (config.bridge_model(), config.markov_model(), int(config.seed))
    results = _run_chunks(_fig1_chunk, payload, config.runs, workers)
    return Fig1Result(
        bridge_paths=np.stack([r[0] for r in results]),
        markov_paths=np.stack([r[1] for r in results]),
    )


@dataclass(eq=False)
class Fig2Result:
    """Per-horizon average prediction errors for both arms and the terminal ratio.

    Horizons are absolute time indices measure_until+1 .. N; the ratio is
    aee_markov[-1] / aee_bridge[-1].
    """

    horizons: np.ndarray
    aee_bridge: np.ndarray
    aee_markov: np.ndarray
    ratio: float


def _fig2_run(bridge, markov, meas, measure_until, seed, run):
    """One paired Monte-Carlo run: shared truth and measurements, both arms.

    Returns (truth positions, coupled-arm predictions, plain-arm predictions)
    for targets measure_until+1 .. N, each of shape (N - measure_until, 2).
    """
    rng = substream(seed, FIG2_LANE, run)
    n = bridge.n_steps
    dim = bridge.dim
    truth = sample_bridge_paths(bridge, rng, 1)[0]
    truth_pos = truth @ meas.H.T
    meas_noise = rng.standard_normal((measure_until, meas.meas_dim)) @ meas.R_chol.T
    zs = truth_pos[1 : measure_until + 1] + meas_noise

    n_horizons = n - measure_until
    pred_bridge = np.empty((n_horizons, meas.meas_dim))
    pred_markov = np.empty((n_horizons, meas.meas_dim))

    belief = init_belief(bridge)
    for k in range(1, measure_until + 1):
        belief = predict_step(belief, bridge)
        belief = update_step(belief, meas, zs[k - 1])
    rollout = belief
    for target in range(measure_until + 1, n):
        rollout = predict_step(rollout, bridge)
        pred_bridge[target - measure_until - 1] = meas.H @ rollout.mean[:dim]
    pred_bridge[n_horizons - 1] = meas.H @ belief.mean[dim:]

    kalman = MarkovKalmanFilter(markov, meas)
    state = kalman.init_belief()
    for k in range(1, measure_until + 1):
        state = kalman.predict_step(state)
        state = kalman.update_step(state, zs[k - 1])
    for target in range(measure_until + 1, n + 1):
        state = kalman.predict_step(state)
        pred_markov[target - measure_until - 1] = meas.H @ state.mean

    return truth_pos[measure_until + 1 :], pred_bridge, pred_markov


def _fig2_chunk(args):
    (bridge, markov, meas, measure_until, seed), runs = args
    return [_fig2_run(bridge, markov, meas, measure_until, seed, run) for run in runs]


def simulate_fig2(config: ScenarioConfig, workers: int = 1) -> Fig2Result:
    """Paired prediction-error comparison over the configured Monte-Carlo runs.

    Every run samples one truth trajectory from the coupled model, feeds the
    same measurements to both arms through k = measure_until, then predicts
    the position at every later step. Averages are taken per horizon across
    runs.
    """
    config.validate()
    payload = (
        config.bridge_model(),
        config.markov_model(),
        config.measurement_model(),
        int(config.measure_until),
        int(config.seed),
    )
    results = _run_chunks(_fig2_chunk, payload, config.runs, workers)
    truth = np.stack([r[0] for r in results])
    pred_bridge = np.stack([r[1] for r in results])
    pred_markov = np.stack([r[2] for r in results])
    n_horizons = truth.shape[1]
    aee_bridge = np.array([aee(truth[:, h], pred_bridge[:, h]) for h in range(n_horizons)])
    aee_markov = np.array([aee(truth[:, h], pred_markov[:, h]) for h in range(n_horizons)])
    horizons = np.arange(config.measure_until + 1, config.n_steps + 1)
    return Fig2Result(
        horizons=horizons,
        aee_bridge=aee_bridge,
        aee_markov=aee_markov,
        ratio=float(aee_markov[-1] / aee_bridge[-1]),
    )


# --- delimited output -------------------------------------------------------


def _fmt(value: float) -> str:
    """Shortest round-trip decimal form, stable across runs for equal doubles."""
    return repr(float(value))


def write_fig1_csv(result: Fig1Result, path) -> None:
    """Rows model,run,k,x,y with the coupled bundle first, then the plain one."""
    lines = ["model,run,k,x,y"]
    for label, paths in (("cml", result.bridge_paths), ("markov", result.markov_paths)):
        for run in range(paths.shape[0]):
            for k in range(paths.shape[1]):
                lines.append(
                    f"{label},{run},{k},{_fmt(paths[run, k, 0])},{_fmt(paths[run, k, 2])}"
                )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_fig2_csv(result: Fig2Result, path) -> None:
    lines = ["horizon,aee_cml,aee_markov,log10_aee_cml,log10_aee_markov"]
    with np.errstate(divide="ignore"):
        for idx, horizon in enumerate(result.horizons):
            ab = result.aee_bridge[idx]
            am = result.aee_markov[idx]
            lines.append(
                f"{int(horizon)},{_fmt(ab)},{_fmt(am)},{_fmt(np.log10(ab))},{_fmt(np.log10(am))}"
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_summary(result: Fig2Result, path) -> None:
    """One line: the terminal ratio of plain-arm to coupled-arm error."""
    Path(path).write_text(
        f"aee_ratio_markov_over_cml_terminal = {_fmt(result.ratio)}\n", encoding="utf-8"
    )


def run_fig1(config: ScenarioConfig, workers: int = 1, render: bool = True):
    """Sample the bundles and write fig1.csv (and fig1.png) under config.out_dir.

    Returns (result, dict of written paths).
    """
    result = simulate_fig1(config, workers=workers)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"csv": out / "fig1.csv"}
    write_fig1_csv(result, paths["csv"])
    if render:
        from .plots import render_fig1

        paths["png"] = out / "fig1.png"
        render_fig1(result, paths["png"])
    return result, paths


def run_fig2(config: ScenarioConfig, workers: int = 1, render: bool = True):
    """Run the comparison and write fig2.csv, summary.txt (and fig2.png).

    Returns (result, dict of written paths).
    """
    result = simulate_fig2(config, workers=workers)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"csv": out / "fig2.csv", "summary": out / "summary.txt"}
    write_fig2_csv(result, paths["csv"])
    write_summary(result, paths["summary"])
    if render:
        from .plots import render_fig2

        paths["png"] = out / "fig2.png"
        render_fig2(result, paths["png"])
    return result, paths
