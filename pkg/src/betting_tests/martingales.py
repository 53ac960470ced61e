"""Wealth processes (test supermartingales) and the rejection rule.

Wealth is carried in log space. A process consumes observations one at a
time, always drawing its bet from the strategy *before* the strategy sees the
observation, which is what keeps the plug-in process a supermartingale.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    NORM_TOL,
    BetDomainError,
    ConfigurationError,
    GeometryBounds,
    IngestionError,
    NullSpec,
    atomic_write_text,
    check_observation,
)
from .strategies import (
    ExponentiallyWeightedAverage,
    FixedBet,
    FollowTheLeader,
    OnlineGradientAscent,
    OnlineNewtonStep,
)


class ProcessKind(enum.Enum):
    HOEFFDING = "hoeffding"
    CAPITAL = "capital"
    CAPITAL_TWO_STEP = "capital-2steps"
    HOEFFDING_FUNCTIONAL = "hoeffding-functional"
    CAPITAL_FUNCTIONAL = "capital-functional"

    @property
    def capital(self) -> bool:
        return self is not ProcessKind.HOEFFDING and self is not ProcessKind.HOEFFDING_FUNCTIONAL

    @property
    def functional(self) -> bool:
        return self in (ProcessKind.HOEFFDING_FUNCTIONAL, ProcessKind.CAPITAL_FUNCTIONAL)


#: Observations of the functional processes are values g(X_t) in [-1, 1]; in
#: those units the Hoeffding penalty lam^2/2 is the D = 2 case and the Capital
#: bet set [-1/2, 1/2] is the B = 1 case.
FUNCTIONAL_GEOMETRY = GeometryBounds(d=1, B=1.0, D=2.0)


# --------------------------------------------------------------------------
# Increments
# --------------------------------------------------------------------------

def hoeffding_log_increment(lam, x, D: float):
    lam = np.asarray(lam, dtype=float)
    x = np.asarray(x, dtype=float)
    if D <= 0:
        raise ConfigurationError("Hoeffding increment needs D > 0")
    return np.sum(lam * x, axis=-1) - np.sum(lam * lam, axis=-1) * D**2 / 8.0


def capital_log_increment(gamma, x):
    u = np.sum(np.asarray(gamma, dtype=float) * np.asarray(x, dtype=float), axis=-1)
    if np.any(u <= -1):
        raise BetDomainError("1 + gamma.x <= 0: bet lies outside its admissible set")
    return np.log1p(u)


def two_step_log_increment(gamma, eta, x):
    """``log(1 + gamma * eta.x)`` for a scalar size ``gamma`` and direction ``eta``."""
    g = np.sum(np.asarray(eta, dtype=float) * np.asarray(x, dtype=float), axis=-1)
    u = np.asarray(gamma, dtype=float) * g
    if np.any(u <= -1):
        raise BetDomainError("1 + gamma * eta.x <= 0: bet lies outside its admissible set")
    return np.log1p(u)


def functional_log_increment(kind, bet, g):
    kind = ProcessKind(kind)
    g = np.asarray(g, dtype=float)
    bet = np.asarray(bet, dtype=float)
    if np.any(np.abs(g) > 1 + NORM_TOL):
        raise BetDomainError("functional values must lie in [-1, 1]")
    if kind is ProcessKind.HOEFFDING_FUNCTIONAL:
        return bet * g - bet**2 / 2.0
    if kind is ProcessKind.CAPITAL_FUNCTIONAL:
        u = bet * g
        if np.any(u <= -1):
            raise BetDomainError("1 + gamma * g <= 0")
        return np.log1p(u)
    raise ConfigurationError(f"{kind.value} is not a functional process kind")


# --------------------------------------------------------------------------
# Rejection rule
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RejectionRecord:
    """Outcome of the level-``alpha`` test on a log-wealth path.

    ``tau`` is the first step (1-based) where the log-wealth reaches
    ``log(1/alpha)``, or ``None`` if it never does within ``horizon`` steps.
    """

    alpha: float
    threshold: float
    tau: int | None
    horizon: int

    @property
    def rejected(self) -> bool:
        return self.tau is not None

    @property
    def tau_truncated(self) -> int:
        return self.horizon if self.tau is None else min(self.tau, self.horizon)


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0 < alpha < 1:
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def rejection_time(trajectory, alpha: float) -> RejectionRecord:
    """First index ``t`` (1-based) with ``trajectory[t-1] >= log(1/alpha)``.

    ``trajectory`` holds ``log W_1, ..., log W_T``; its length is the horizon.
    """
    alpha = check_alpha(alpha)
    path = np.asarray(trajectory, dtype=float).reshape(-1)
    threshold = math.log(1.0 / alpha)
    hits = np.flatnonzero(path >= threshold)
    tau = int(hits[0]) + 1 if hits.size else None
    return RejectionRecord(alpha, threshold, tau, len(path))


def rejection_times(paths, alpha: float):
    """Vectorised rule for paths shaped ``(T, ...)``.

    Returns ``(tau_truncated, rejected)`` arrays over the trailing axes.
    """
    alpha = check_alpha(alpha)
    paths = np.asarray(paths, dtype=float)
    crossed = paths >= math.log(1.0 / alpha)
    rejected = crossed.any(axis=0)
    first = np.argmax(crossed, axis=0) + 1
    return np.where(rejected, first, paths.shape[0]), rejected


# --------------------------------------------------------------------------
# Processes
# --------------------------------------------------------------------------

class WealthProcess:
    """A predictable plug-in test supermartingale.

    Parameters
    ----------
    kind : ProcessKind or str
    strategy
        Betting strategy; for ``capital-2steps`` this is the scalar size
        strategy (a one-dimensional ONS on ``eta.x``).
    geometry : GeometryBounds
        Bounds of the observations; ignored for the functional kinds.
    null : NullSpec or str
        One-sided nulls clamp every bet at zero before it is played.
    direction : OnlineGradientAscent, optional
        Direction strategy of the two-step process.
    record : bool
        Keep the full log-wealth path in ``trajectory``.
    record_bets : bool
        Keep every played bet in ``bets``.
    """

    def __init__(self, kind, strategy, geometry: GeometryBounds, null=NullSpec.TWO_SIDED,
                 direction=None, record: bool = False, record_bets: bool = False):
        self.kind = ProcessKind(kind)
        self.null = NullSpec.coerce(null)
        if self.kind.functional:
            geometry = FUNCTIONAL_GEOMETRY
        self.geometry = geometry
        if self.kind is ProcessKind.CAPITAL_TWO_STEP:
            if direction is None:
                raise ConfigurationError("capital-2steps needs a direction strategy")
            if self.null.one_sided:
                raise ConfigurationError("capital-2steps is only defined for two-sided nulls")
        if self.kind.capital:
            geometry.require_positive_B()
        else:
            geometry.require_positive_D()
        self.strategy = strategy
        self.direction = direction
        self.t = 0
        self.log_wealth = np.zeros(np.shape(strategy.bet())[:-1])
        self.record = record
        self.record_bets = record_bets
        self.trajectory = [] if record else None
        self.bets = [] if record_bets else None

    @property
    def batch_shape(self):
        return self.log_wealth.shape

    def current_bet(self) -> np.ndarray:
        """The bet that will be played against the next observation."""
        if self.kind is ProcessKind.CAPITAL_TWO_STEP:
            return self.strategy.bet() * self.direction.bet()
        bet = self.strategy.bet()
        if self.null.one_sided:
            bet = np.maximum(bet, 0.0)
        return bet

    def _coerce(self, x) -> np.ndarray:
        if self.kind.functional:
            x = np.asarray(x, dtype=float)
            if x.shape == self.batch_shape:
                x = x[..., None]
            if np.any(np.abs(x) > 1 + NORM_TOL):
                raise BetDomainError("functional values must lie in [-1, 1]")
        x = check_observation(x, self.geometry)
        if x.shape[:-1] != self.batch_shape:
            raise IngestionError(
                f"observation batch shape {x.shape[:-1]} does not match process {self.batch_shape}"
            )
        return x

    def step(self, x) -> "WealthProcess":
        x = self._coerce(x)
        if self.kind is ProcessKind.CAPITAL_TWO_STEP:
            eta = self.direction.bet()
            gamma = self.strategy.bet()[..., 0]
            bet = gamma[..., None] * eta
            increment = two_step_log_increment(gamma, eta, x)
            self.direction.update(x)
            self.strategy.update(np.sum(eta * x, axis=-1, keepdims=True))
        else:
            bet = self.current_bet()
            if self.kind.capital:
                self._check_capital_bet(bet)
            if self.kind is ProcessKind.HOEFFDING:
                increment = hoeffding_log_increment(bet, x, self.geometry.D)
            elif self.kind is ProcessKind.CAPITAL:
                increment = capital_log_increment(bet, x)
            else:
                increment = functional_log_increment(self.kind, bet[..., 0], x[..., 0])
            self.strategy.update(x)
        self.log_wealth = self.log_wealth + increment
        self.t += 1
        if self.record:
            self.trajectory.append(np.copy(self.log_wealth))
        if self.record_bets:
            self.bets.append(np.copy(bet))
        return self

    def _check_capital_bet(self, bet) -> None:
        limit = 1.0 / (2.0 * self.geometry.B)
        if np.any(np.linalg.norm(bet, axis=-1) > limit * (1 + 1e-9)):
            raise BetDomainError(f"Capital bet outside the ball of radius 1/(2B) = {limit}")

    def run(self, X) -> np.ndarray:
        """Feed a stream shaped ``(T, *batch, d)`` and return the log-wealth
        path shaped ``(T, *batch)``."""
        X = np.asarray(X, dtype=float)
        path = np.empty(X.shape[:1] + self.batch_shape)
        for t in range(X.shape[0]):
            self.step(X[t])
            path[t] = self.log_wealth
        return path

    def rejection(self, alpha: float) -> RejectionRecord:
        if self.trajectory is None:
            raise ConfigurationError("rejection() needs record=True")
        return rejection_time(np.asarray(self.trajectory), alpha)


PROCESS_NAMES = ("hoeffding_ftl", "capital_ewa", "capital_ons", "capital_2steps")


def make_process(name: str, geometry: GeometryBounds, null=NullSpec.TWO_SIDED,
                 batch_shape=(), eps: float | None = None, record: bool = False,
                 record_bets: bool = False, fixed_bet=None) -> WealthProcess:
    """Build one of the standard processes by name.

    Names: ``hoeffding_ftl``, ``capital_ewa``, ``capital_ons``,
    ``capital_2steps``, ``hoeffding_fixed`` and ``capital_fixed`` (the last
    two need ``fixed_bet``).
    """
    null = NullSpec.coerce(null)
    one_sided = null.one_sided
    if null.functional:
        geometry = FUNCTIONAL_GEOMETRY
    hoeffding_kind = ProcessKind.HOEFFDING_FUNCTIONAL if null.functional else ProcessKind.HOEFFDING
    capital_kind = ProcessKind.CAPITAL_FUNCTIONAL if null.functional else ProcessKind.CAPITAL
    kw = dict(null=null, record=record, record_bets=record_bets)

    if name == "hoeffding_ftl":
        strategy = FollowTheLeader(geometry, batch_shape, one_sided)
        return WealthProcess(hoeffding_kind, strategy, geometry, **kw)
    if name == "capital_ewa":
        strategy = ExponentiallyWeightedAverage(geometry, batch_shape, one_sided, eps=eps)
        return WealthProcess(capital_kind, strategy, geometry, **kw)
    if name == "capital_ons":
        strategy = OnlineNewtonStep(geometry, batch_shape, one_sided)
        return WealthProcess(capital_kind, strategy, geometry, **kw)
    if name == "capital_2steps":
        if null.functional:
            raise ConfigurationError("capital_2steps takes vector observations, not functionals")
        size = OnlineNewtonStep(FUNCTIONAL_GEOMETRY, batch_shape)
        direction = OnlineGradientAscent(geometry, batch_shape)
        return WealthProcess(ProcessKind.CAPITAL_TWO_STEP, size, geometry,
                             direction=direction, **kw)
    if name in ("hoeffding_fixed", "capital_fixed"):
        if fixed_bet is None:
            raise ConfigurationError(f"{name} needs fixed_bet")
        strategy = FixedBet(geometry, fixed_bet, batch_shape)
        kind = hoeffding_kind if name == "hoeffding_fixed" else capital_kind
        return WealthProcess(kind, strategy, geometry, **kw)
    raise ConfigurationError(f"unknown process {name!r}; expected one of {PROCESS_NAMES}")


# --------------------------------------------------------------------------
# Export
# --------------------------------------------------------------------------

def format_float(value: float) -> str:
    return format(float(value), ".17g")


def write_trajectory_csv(path, log_wealth) -> None:
    """Write ``(step, logw)`` rows atomically (temp file, then rename)."""
    log_wealth = np.asarray(log_wealth, dtype=float).reshape(-1)
    if log_wealth.size == 0:
        raise ConfigurationError("refusing to write an empty trajectory")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["step", "logw"])
    for step, value in enumerate(log_wealth, start=1):
        writer.writerow([step, format_float(value)])
    atomic_write_text(path, buf.getvalue())
