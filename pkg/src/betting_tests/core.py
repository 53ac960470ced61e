"""Shared domain types: geometry, null hypotheses, running statistics and
input validation.

Arrays follow one convention throughout the package: the last axis is the
observation dimension ``d`` and any leading axes are a batch of independent
trajectories (e.g. Monte Carlo replicates).
"""

from __future__ import annotations

import enum
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

# Slack allowed on norm checks so that values like 0.5 + 0.2 computed in
# floating point are not rejected against B = 0.7.
NORM_TOL = 1e-12


class BettingTestError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(BettingTestError, ValueError):
    """Invalid parameters or inconsistent configuration."""


class IngestionError(BettingTestError, ValueError):
    """An observation violates the declared geometry bounds."""


class BetDomainError(BettingTestError, ValueError):
    """A wealth increment would be taken outside its domain."""


class NumericalError(BettingTestError, ArithmeticError):
    """Non-finite input or a numerical routine that failed to converge."""


class NullSpec(enum.Enum):
    TWO_SIDED = "two-sided"
    ONE_SIDED = "one-sided"
    FUNCTIONAL_TWO_SIDED = "functional-two-sided"
    FUNCTIONAL_ONE_SIDED = "functional-one-sided"

    @property
    def one_sided(self) -> bool:
        return self in (NullSpec.ONE_SIDED, NullSpec.FUNCTIONAL_ONE_SIDED)

    @property
    def functional(self) -> bool:
        return self in (NullSpec.FUNCTIONAL_TWO_SIDED, NullSpec.FUNCTIONAL_ONE_SIDED)

    @classmethod
    def coerce(cls, value) -> "NullSpec":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).replace("_", "-").lower())
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ConfigurationError(f"unknown null {value!r}; expected one of {names}") from None


@dataclass(frozen=True)
class GeometryBounds:
    """Bounds on the observation set.

    Parameters
    ----------
    d : int
        Dimension of the observations.
    B : float
        Euclidean norm bound, ``||x||_2 <= B``.
    D : float
        Diameter bound, ``sup ||x - y||_2 <= D``.
    """

    d: int
    B: float
    D: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ConfigurationError(f"d must be a positive integer, got {self.d!r}")
        if not (np.isfinite(self.B) and self.B >= 0):
            raise ConfigurationError(f"B must be a finite nonnegative real, got {self.B!r}")
        if not (np.isfinite(self.D) and self.D >= 0):
            raise ConfigurationError(f"D must be a finite nonnegative real, got {self.D!r}")
        if self.D > 2 * self.B * (1 + NORM_TOL):
            raise ConfigurationError(f"D={self.D} exceeds 2B={2 * self.B}")

    def require_positive_B(self) -> None:
        if self.B <= 0:
            raise ConfigurationError("Capital processes need B > 0")

    def require_positive_D(self) -> None:
        if self.D <= 0:
            raise ConfigurationError("Hoeffding processes and FTL need D > 0")


def check_observation(x, geometry: GeometryBounds) -> np.ndarray:
    """Validate one observation (or a batch of them) against ``geometry``.

    Returns ``x`` as a float array whose last axis has length ``d``. Raises
    :class:`IngestionError` if any row has Euclidean norm above ``B``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.shape[-1] != geometry.d:
        raise IngestionError(f"observation has dimension {x.shape[-1]}, expected d={geometry.d}")
    if not np.all(np.isfinite(x)):
        raise IngestionError("observation contains non-finite entries")
    norms = np.linalg.norm(x, axis=-1)
    limit = geometry.B * (1 + NORM_TOL) + NORM_TOL
    if np.any(norms > limit):
        worst = float(np.max(norms))
        idx = np.unravel_index(int(np.argmax(norms)), norms.shape) if norms.ndim else ()
        raise IngestionError(
            f"observation norm {worst:.17g} exceeds bound B={geometry.B} (batch index {idx})"
        )
    return x


def check_stream(X, geometry: GeometryBounds) -> np.ndarray:
    """Validate a whole stream shaped ``(T, ..., d)``; 1-d input is read as a
    scalar stream when ``d == 1``."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and geometry.d == 1:
        X = X[:, None]
    if X.ndim < 2:
        raise IngestionError("stream must have a time axis and a feature axis")
    return check_observation(X, geometry)


@dataclass(frozen=True)
class RunningStats:
    """Running sums over an ingested prefix.

    The conditional sums are only populated by synthetic streams that know
    their own conditional moments; the wealth processes never read them.
    """

    n: int
    sum_x: np.ndarray
    sum_cond_mean: np.ndarray
    sum_cond_sq: np.ndarray = field(default_factory=lambda: np.zeros(2))

    @classmethod
    def empty(cls, d: int) -> "RunningStats":
        return cls(0, np.zeros(d), np.zeros(d), np.zeros(2))

    @property
    def mean(self) -> np.ndarray:
        """Empirical mean of the observations; zero before any data."""
        if self.n == 0:
            return np.zeros_like(self.sum_x)
        return self.sum_x / self.n

    @property
    def cond_mean(self) -> np.ndarray:
        """Average conditional mean (only meaningful on synthetic streams)."""
        return self.sum_cond_mean / max(self.n, 1)

    @property
    def cond_sq(self) -> np.ndarray:
        """Average conditional squared norms for p = 2 and p = inf."""
        return self.sum_cond_sq / max(self.n, 1)


def update_stats(stats: RunningStats, x, geometry: GeometryBounds,
                 cond_mean=None, cond_sq=None) -> RunningStats:
    x = check_observation(x, geometry)
    if x.ndim != 1:
        raise IngestionError("update_stats takes a single observation")
    sum_cond_mean = stats.sum_cond_mean
    if cond_mean is not None:
        sum_cond_mean = sum_cond_mean + np.asarray(cond_mean, dtype=float)
    sum_cond_sq = stats.sum_cond_sq
    if cond_sq is not None:
        sum_cond_sq = sum_cond_sq + np.asarray(cond_sq, dtype=float)
    return RunningStats(stats.n + 1, stats.sum_x + x, sum_cond_mean, sum_cond_sq)


@dataclass(frozen=True)
class StreamSpec:
    """Definition of a synthetic observation stream.

    ``family`` names the generator (``one-axis``, ``spiral``, ``forecaster``,
    ``adversarial`` or ``centered-null``), ``params`` its parameters, ``seed``
    the base seed and ``T`` the horizon.
    """

    family: str
    params: dict
    seed: int = 0
    T: int = 1000

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 1:
            raise ConfigurationError(f"T must be a positive integer, got {self.T!r}")
        object.__setattr__(self, "params", dict(self.params))


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to a temporary file next to ``path``, then rename it into
    place, so readers never observe a partially written file."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix="." + os.path.basename(path) + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
