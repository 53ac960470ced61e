"""Synthetic streams, the forecaster-comparison baseline and the Monte Carlo
rejection-time harness.

Replicate ``r`` of a run draws its randomness from a Philox counter-based
generator keyed by ``base_seed + r``, so any single replicate can be
regenerated on its own. Replicates are advanced together along a leading
batch axis; every strategy in a run consumes the same observation array
(common random numbers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp, ndtr

from .bounds import AdversarialKind, adversarial_values
from .core import ConfigurationError, GeometryBounds, NullSpec, StreamSpec, check_stream
from .martingales import check_alpha, make_process, rejection_times

ONE_AXIS_B, ONE_AXIS_D, ONE_AXIS_NOISE = 0.7, 0.9, 0.2
SPIRAL_GEOMETRY = GeometryBounds(d=2, B=0.6, D=1.2)
SPIRAL_NOISE = 0.1
FORECASTER_GEOMETRY = GeometryBounds(d=1, B=1.0, D=2.0)
FORECASTER_BURN_IN = 4
DEFAULT_BETAS = (0.0, 0.25, 0.5, 0.75, 1.0)

STREAM_FAMILIES = ("one-axis", "spiral", "forecaster", "adversarial", "centered-null")


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator for one replicate."""
    if int(seed) != seed or seed < 0:
        raise ConfigurationError(f"seed must be a nonnegative integer, got {seed!r}")
    return np.random.Generator(np.random.Philox(int(seed)))


def sample_uniform_ball(d: int, radius: float, rng: np.random.Generator, size=()) -> np.ndarray:
    """Uniform draws on the solid Euclidean ball, shaped ``size + (d,)``."""
    if not radius > 0:
        raise ConfigurationError(f"radius must be positive, got {radius}")
    size = (size,) if np.isscalar(size) else tuple(size)
    direction = rng.standard_normal(size + (d,))
    norms = np.linalg.norm(direction, axis=-1, keepdims=True)
    direction = direction / np.where(norms > 0, norms, 1.0)
    u = rng.random(size + (1,))
    return radius * u ** (1.0 / d) * direction


# --------------------------------------------------------------------------
# Stream descriptions
# --------------------------------------------------------------------------

def one_axis_stream(m: float, a: float, b: float, d: int, seed: int = 0, T: int = 1000) -> StreamSpec:
    """``X_t = (m t^-a, 0, ..., 0) + t^-b eps_t`` with ``eps_t`` uniform on the
    radius-0.2 ball; ``B = 0.7``, ``D = 0.9``. ``m = 0`` gives a null stream."""
    if not 0 <= m < 0.5:
        raise ConfigurationError(f"one-axis m must lie in [0, 1/2), got {m}")
    if not (0 <= a < 1 and 0 <= b < 1):
        raise ConfigurationError(f"one-axis a, b must lie in [0, 1), got a={a}, b={b}")
    if int(d) != d or d < 1:
        raise ConfigurationError(f"d must be a positive integer, got {d}")
    return StreamSpec("one-axis", {"m": float(m), "a": float(a), "b": float(b), "d": int(d)},
                      seed=seed, T=T)


def spiral_stream(m: float = 0.4, a: float = 0.0, M: int = 50, seed: int = 0, T: int = 1000) -> StreamSpec:
    """``X_t = m t^-a (cos 2 pi t/M, sin 2 pi t/M) + t^-2a eps_t`` with
    ``eps_t`` uniform on the radius-0.1 ball; ``B = 0.6``, ``D = 1.2``."""
    if not 0 <= m <= 0.5:
        raise ConfigurationError(f"spiral m must lie in [0, 0.5], got {m}")
    if not 0 <= a < 1:
        raise ConfigurationError(f"spiral a must lie in [0, 1), got {a}")
    if int(M) != M or M < 1:
        raise ConfigurationError(f"M must be a positive integer, got {M}")
    return StreamSpec("spiral", {"m": float(m), "a": float(a), "M": int(M)}, seed=seed, T=T)


def forecaster_stream(theta: float = 0.7, seed: int = 0, T: int = 1000) -> StreamSpec:
    """Brier-score differences of two forecasters of ``Y_t = 1{Z_t > 0}``,
    ``Z_t = e_t + theta (e_{t-1} + ... + e_{t-4})`` with standard normal
    innovations. ``q_t`` sees innovations up to lag 1, ``p_t`` only from
    lag 2; the observation is ``brier(p_t, Y_t) - brier(q_t, Y_t)``."""
    if not math.isfinite(theta):
        raise ConfigurationError("theta must be finite")
    return StreamSpec("forecaster", {"theta": float(theta)}, seed=seed, T=T)


def centered_null_stream(value: float = 0.5, d: int = 1, seed: int = 0, T: int = 100) -> StreamSpec:
    """i.i.d. coordinates equal to ``+-value / sqrt(d)`` with equal probability."""
    if not value > 0:
        raise ConfigurationError("value must be positive")
    return StreamSpec("centered-null", {"value": float(value), "d": int(d)}, seed=seed, T=T)


def stream_geometry(spec: StreamSpec) -> GeometryBounds:
    p = spec.params
    if spec.family == "one-axis":
        return GeometryBounds(p["d"], ONE_AXIS_B, ONE_AXIS_D)
    if spec.family == "spiral":
        return SPIRAL_GEOMETRY
    if spec.family == "forecaster":
        return FORECASTER_GEOMETRY
    if spec.family == "centered-null":
        return GeometryBounds(p["d"], p["value"], 2 * p["value"])
    if spec.family == "adversarial":
        return GeometryBounds(1, p.get("B", 1.0), p.get("D", 2.0))
    raise ConfigurationError(f"unknown stream family {spec.family!r}; expected one of {STREAM_FAMILIES}")


def stream_null(spec: StreamSpec) -> NullSpec:
    return NullSpec.ONE_SIDED if spec.family == "forecaster" else NullSpec.TWO_SIDED


# --------------------------------------------------------------------------
# Sampling
# --------------------------------------------------------------------------

@dataclass
class StreamSample:
    """Observations of ``R`` replicates, ``X`` shaped ``(T, R, d)``.

    ``cond_mean`` (``(T, d)``) and ``v`` (``(T,)``, the running second-moment
    bound ``v_n``) are filled for streams whose conditional moments are
    deterministic. ``extras`` carries forecaster inputs ``p``, ``q``, ``y``.
    """

    spec: StreamSpec
    geometry: GeometryBounds
    X: np.ndarray
    seeds: np.ndarray
    cond_mean: np.ndarray | None = None
    v: np.ndarray | None = None
    extras: dict = field(default_factory=dict)


def _one_axis(spec, rngs):
    p, T = spec.params, spec.T
    t = np.arange(1, T + 1, dtype=float)
    mean = np.zeros((T, p["d"]))
    mean[:, 0] = p["m"] * t ** (-p["a"])
    noise = np.stack([sample_uniform_ball(p["d"], ONE_AXIS_NOISE, rng, T) for rng in rngs], axis=1)
    X = mean[:, None, :] + t[:, None, None] ** (-p["b"]) * noise
    second = p["m"] ** 2 * t ** (-2 * p["a"]) + t ** (-2 * p["b"]) * ONE_AXIS_NOISE**2
    v = np.cumsum(second) / t
    return X, mean, v, {}


def _spiral(spec, rngs):
    p, T = spec.params, spec.T
    t = np.arange(1, T + 1, dtype=float)
    angle = 2 * np.pi * t / p["M"]
    mean = p["m"] * t[:, None] ** (-p["a"]) * np.stack([np.cos(angle), np.sin(angle)], axis=-1)
    noise = np.stack([sample_uniform_ball(2, SPIRAL_NOISE, rng, T) for rng in rngs], axis=1)
    X = mean[:, None, :] + t[:, None, None] ** (-2 * p["a"]) * noise
    second = p["m"] ** 2 * t ** (-2 * p["a"]) + t ** (-4 * p["a"]) * SPIRAL_NOISE**2
    v = np.cumsum(second) / t
    return X, mean, v, {}


def forecasts(eps: np.ndarray, theta: float):
    """``(p, q, y)`` from innovations shaped ``(T + 4, ...)``."""
    lag = lambda j: eps[FORECASTER_BURN_IN - j: eps.shape[0] - j]  # noqa: E731
    far = lag(2) + lag(3) + lag(4)
    near = lag(1) + far
    p = ndtr(theta * far / math.sqrt(1.0 + theta**2))
    q = ndtr(theta * near)
    z = lag(0) + theta * near
    y = (z > 0).astype(float)
    return p, q, y


def _forecaster(spec, rngs):
    theta, T = spec.params["theta"], spec.T
    eps = np.stack([rng.standard_normal(T + FORECASTER_BURN_IN) for rng in rngs], axis=1)
    p, q, y = forecasts(eps, theta)
    X = brier_diff(p, q, y)[..., None]
    return X, None, None, {"p": p, "q": q, "y": y}


def _centered_null(spec, rngs):
    value, d, T = spec.params["value"], spec.params["d"], spec.T
    signs = np.stack([rng.integers(0, 2, size=(T, d)) for rng in rngs], axis=1) * 2.0 - 1.0
    return signs * value / math.sqrt(d), np.zeros((T, d)), np.full(T, value**2), {}


def _adversarial(spec, rngs):
    X = adversarial_values(spec.params["kind"], spec.params["m"], spec.T)
    t = np.arange(1, spec.T + 1, dtype=float)
    X = np.repeat(X[:, None, :], len(rngs), axis=1)
    return X, X[:, 0, :], np.cumsum(X[:, 0, 0] ** 2) / t, {}


_GENERATORS = {
    "one-axis": _one_axis,
    "spiral": _spiral,
    "forecaster": _forecaster,
    "centered-null": _centered_null,
    "adversarial": _adversarial,
}


def generate(spec: StreamSpec, replicates: int = 1, base_seed: int | None = None) -> StreamSample:
    """Draw ``replicates`` independent copies; replicate ``r`` uses seed
    ``base_seed + r`` (``base_seed`` defaults to ``spec.seed``)."""
    if replicates < 1:
        raise ConfigurationError("replicates must be at least 1")
    if spec.family not in _GENERATORS:
        raise ConfigurationError(f"unknown stream family {spec.family!r}; expected one of {STREAM_FAMILIES}")
    base = spec.seed if base_seed is None else base_seed
    seeds = np.arange(base, base + replicates)
    rngs = [make_rng(int(s)) for s in seeds]
    geometry = stream_geometry(spec)
    X, mean, v, extras = _GENERATORS[spec.family](spec, rngs)
    X = check_stream(X, geometry)
    return StreamSample(spec, geometry, X, seeds, mean, v, extras)


# --------------------------------------------------------------------------
# Forecaster comparison baseline
# --------------------------------------------------------------------------

def brier(p, y):
    return (np.asarray(p, dtype=float) - np.asarray(y, dtype=float)) ** 2


def brier_diff(p, q, y):
    """``(p - y)^2 - (q - y)^2``: positive when ``q`` scores better."""
    p, q, y = (np.asarray(v, dtype=float) for v in (p, q, y))
    if np.any((p < 0) | (p > 1) | (q < 0) | (q > 1)):
        raise ConfigurationError("forecasts must lie in [0, 1]")
    if np.any((y != 0) & (y != 1)):
        raise ConfigurationError("outcomes must be 0 or 1")
    return brier(p, y) - brier(q, y)


def henzi_bet(p, q, pi_hat):
    """Bet in ``[0, 1/2]`` maximising the expected log-growth
    ``pi log(1 + lam x1) + (1 - pi) log(1 + lam x0)`` where ``x1``, ``x0`` are
    the Brier differences for outcomes 1 and 0 and ``pi = pi_hat``."""
    p, q, pi_hat = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (p, q, pi_hat)))
    if np.any((pi_hat < 0) | (pi_hat > 1)):
        raise ConfigurationError("pi_hat must lie in [0, 1]")
    x1 = brier_diff(p, q, np.ones_like(p))
    x0 = brier_diff(p, q, np.zeros_like(p))
    drift = pi_hat * x1 + (1 - pi_hat) * x0
    curv = x0 * x1
    with np.errstate(divide="ignore", invalid="ignore"):
        stationary = np.where(curv < 0, -drift / curv, 0.5)
    lam = np.clip(stationary, 0.0, 0.5)
    return np.where(drift > 0, lam, 0.0)


def henzi_log_wealth(p, q, y, beta: float) -> np.ndarray:
    """Log-wealth path of the baseline that bets with ``pi_hat = beta p + (1 - beta) q``."""
    if not 0 <= beta <= 1:
        raise ConfigurationError(f"beta must lie in [0, 1], got {beta}")
    p, q, y = (np.asarray(v, dtype=float) for v in (p, q, y))
    lam = henzi_bet(p, q, beta * p + (1 - beta) * q)
    return np.cumsum(np.log1p(lam * brier_diff(p, q, y)), axis=0)


def henzi_mixture(log_wealths) -> np.ndarray:
    """Average of the wealths (not the log-wealths), returned in log space."""
    paths = [np.asarray(w, dtype=float) for w in log_wealths]
    if not paths:
        raise ConfigurationError("mixture of an empty list")
    return logsumexp(np.stack(paths), axis=0) - math.log(len(paths))


def henzi_name(beta: float) -> str:
    return f"henzi_{round(100 * beta)}"


# --------------------------------------------------------------------------
# Monte Carlo harness
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialSummary:
    experiment: str
    strategy: str
    replicate: int
    seed: int
    tau_truncated: int
    rejected: bool
    final_logw: float


@dataclass(frozen=True)
class StrategySummary:
    strategy: str
    mean_tau: float
    stderr_tau: float
    reject_rate: float
    replicates: int


def summarize(trials, strategy: str) -> StrategySummary:
    rows = [t for t in trials if t.strategy == strategy]
    if not rows:
        raise ConfigurationError(f"no trials for strategy {strategy!r}")
    tau = np.array([t.tau_truncated for t in rows], dtype=float)
    rejected = np.array([t.rejected for t in rows], dtype=float)
    stderr = float(np.std(tau, ddof=1) / math.sqrt(len(tau))) if len(tau) > 1 else 0.0
    return StrategySummary(strategy, float(np.mean(tau)), stderr, float(np.mean(rejected)), len(rows))


@dataclass
class MonteCarloResult:
    trials: list
    strategies: list
    log_wealth: dict = field(default_factory=dict)

    def summary(self, strategy: str) -> StrategySummary:
        return summarize(self.trials, strategy)

    def summaries(self) -> list:
        return [summarize(self.trials, s) for s in self.strategies]

    def mean_tau(self, strategy: str) -> float:
        return self.summary(strategy).mean_tau

    def reject_rate(self, strategy: str) -> float:
        return self.summary(strategy).reject_rate


def default_strategies(spec: StreamSpec, betas=DEFAULT_BETAS) -> list:
    if spec.family == "forecaster":
        return ["hoeffding_ftl", "capital_ewa", "capital_ons"] + \
            [henzi_name(b) for b in betas] + ["henzi_mixture"]
    return ["hoeffding_ftl", "capital_ewa", "capital_ons", "capital_2steps"]


def strategy_log_wealth(name: str, sample: StreamSample, betas=DEFAULT_BETAS,
                        eps: float | None = None) -> np.ndarray:
    """Log-wealth paths ``(T, R)`` of one strategy on a sampled stream."""
    if name.startswith("henzi"):
        ex = sample.extras
        if not ex:
            raise ConfigurationError("henzi strategies need the forecaster stream")
        if name == "henzi_mixture":
            return henzi_mixture([henzi_log_wealth(ex["p"], ex["q"], ex["y"], b) for b in betas])
        try:
            beta = int(name.split("_", 1)[1]) / 100.0
        except ValueError:
            raise ConfigurationError(f"unknown strategy {name!r}") from None
        return henzi_log_wealth(ex["p"], ex["q"], ex["y"], beta)
    R = sample.X.shape[1]
    process = make_process(name, sample.geometry, stream_null(sample.spec),
                           batch_shape=(R,), eps=eps)
    return process.run(sample.X)


def monte_carlo_tau(spec: StreamSpec, strategies=None, alpha: float = 0.05,
                    replicates: int = 500, base_seed: int | None = None,
                    betas=DEFAULT_BETAS, eps: float | None = None,
                    keep_paths: bool = False, chunk: int = 500) -> MonteCarloResult:
    """Run every strategy on the same ``replicates`` draws of ``spec`` for the
    full horizon ``spec.T`` and record the truncated rejection times."""
    alpha = check_alpha(alpha)
    if replicates < 1:
        raise ConfigurationError("replicates must be at least 1")
    strategies = list(strategies or default_strategies(spec, betas))
    base = spec.seed if base_seed is None else base_seed
    trials = {s: [] for s in strategies}
    paths = {s: [] for s in strategies}
    for start in range(0, replicates, chunk):
        count = min(chunk, replicates - start)
        sample = generate(spec, count, base + start)
        for name in strategies:
            lw = strategy_log_wealth(name, sample, betas, eps)
            tau, rejected = rejection_times(lw, alpha)
            for i in range(count):
                trials[name].append(TrialSummary(
                    spec.family, name, start + i, int(sample.seeds[i]),
                    int(tau[i]), bool(rejected[i]), float(lw[-1, i])))
            if keep_paths:
                paths[name].append(lw)
    ordered = [t for s in strategies for t in trials[s]]
    kept = {s: np.concatenate(p, axis=1) for s, p in paths.items()} if keep_paths else {}
    return MonteCarloResult(ordered, strategies, kept)
