"""Power-bound calculator.

A *power bound* is a deterministic sequence ``u_n`` that lower-bounds the
log-wealth of a process on a high-probability event. The ``aleph`` operator
turns it into the first index after which the wealth provably stays above a
threshold, and from there into a bound on the expected rejection time.

Also here: the ``linlog`` / ``lambert_like`` calculus used by the closed form
of ``aleph`` for sequences ``a n^beta - b log n``, and the deterministic
adversarial streams that show how slowly a process can be forced to reject.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import lambertw

from .core import ConfigurationError, GeometryBounds, StreamSpec
from .martingales import check_alpha

# --------------------------------------------------------------------------
# Sequences
# --------------------------------------------------------------------------

Sequence = Callable[[np.ndarray], np.ndarray]


def as_sequence(value) -> Sequence | None:
    """Wrap a constant or an ``n -> value`` callable as a vectorised sequence."""
    if value is None:
        return None
    if callable(value):
        return lambda n: np.broadcast_to(np.asarray(value(np.asarray(n)), dtype=float),
                                         np.shape(n))
    constant = float(value)
    return lambda n: np.full(np.shape(n), constant)


def power_sequence(scale: float, exponent: float) -> Sequence:
    """``n -> scale * n**(-exponent)``."""
    return lambda n: scale * np.asarray(n, dtype=float) ** (-exponent)


def _log(n) -> np.ndarray:
    return np.maximum(np.log(np.asarray(n, dtype=float)), 0.0)


def ftl_regret(n) -> np.ndarray:
    return 4.0 * (1.0 + _log(n))


def ewa_regret(n, d: int) -> np.ndarray:
    return np.full(np.shape(n), math.log(2 * d))


def ons_regret(n, d: int) -> np.ndarray:
    return d * (7.2 + 4.5 * _log(n))


def oga_regret(n) -> np.ndarray:
    """Stochastic-regret envelope ``s_n = sqrt(n) (1 + 4 sqrt(log n))`` of the
    gradient-ascent direction."""
    n = np.asarray(n, dtype=float)
    return np.sqrt(n) * (1.0 + 4.0 * np.sqrt(_log(n)))


def default_regret(strategy: str, d: int = 1) -> Sequence:
    """Regret envelope ``r_n`` of a named strategy."""
    if strategy in ("ftl", "hoeffding_ftl"):
        return ftl_regret
    if strategy in ("ewa", "capital_ewa"):
        return lambda n: ewa_regret(n, d)
    if strategy in ("ons", "capital_ons", "capital_2steps"):
        # the two-step size strategy is a one-dimensional ONS
        return lambda n: ons_regret(n, 1 if strategy == "capital_2steps" else d)
    raise ConfigurationError(f"no default regret envelope for strategy {strategy!r}")


# --------------------------------------------------------------------------
# u_n families
# --------------------------------------------------------------------------

class BoundFamily(enum.Enum):
    HOEFFDING_TWO_SIDED = "hoeffding-two-sided"
    CAPITAL_FIXED_EPS = "capital-fixed-eps"
    CAPITAL_ADAPTIVE_EPS = "capital-adaptive-eps"
    TWO_STEP = "two-step"
    HOEFFDING_ONE_SIDED = "hoeffding-one-sided"
    CAPITAL_ONE_SIDED = "capital-one-sided"
    HOEFFDING_FUNCTIONAL = "hoeffding-functional"
    CAPITAL_FUNCTIONAL = "capital-functional"


_REQUIRED = {
    BoundFamily.HOEFFDING_TWO_SIDED: ("m", "r"),
    BoundFamily.CAPITAL_FIXED_EPS: ("m", "v", "r", "eps"),
    BoundFamily.CAPITAL_ADAPTIVE_EPS: ("m", "v", "r"),
    BoundFamily.TWO_STEP: ("m", "v", "r", "s"),
    BoundFamily.HOEFFDING_ONE_SIDED: ("m", "r"),
    BoundFamily.CAPITAL_ONE_SIDED: ("m", "v", "r"),
    BoundFamily.HOEFFDING_FUNCTIONAL: ("m", "r", "s"),
    BoundFamily.CAPITAL_FUNCTIONAL: ("m", "v", "r", "s"),
}

#: Summable-tail constant added to the expected rejection time bound. It
#: collects the probabilities of the concentration events failing.
FAMILY_CONSTANT = {
    BoundFamily.HOEFFDING_TWO_SIDED: math.pi**2 / 3,
    BoundFamily.CAPITAL_FIXED_EPS: math.pi**2 / 6,
    BoundFamily.CAPITAL_ADAPTIVE_EPS: math.pi**2 / 6,
    BoundFamily.TWO_STEP: math.pi**2 / 3,
    BoundFamily.HOEFFDING_ONE_SIDED: math.pi**2 / 6,
    BoundFamily.CAPITAL_ONE_SIDED: math.pi**2 / 3,
    BoundFamily.HOEFFDING_FUNCTIONAL: math.pi**2 / 6,
    BoundFamily.CAPITAL_FUNCTIONAL: math.pi**2 / 3,
}


@dataclass(frozen=True)
class PowerBoundSpec:
    """A ``u_n`` family with its parameter sequences.

    ``m``, ``v``, ``r`` and ``s`` accept constants or vectorised callables of
    ``n``. ``v`` is a second-moment bound, ``r`` a regret envelope of the
    size strategy and ``s`` a stochastic-regret envelope of the direction
    strategy (two-step and functional families).
    """

    family: BoundFamily
    geometry: GeometryBounds
    m: object = None
    v: object = None
    r: object = None
    s: object = None
    eps: float | None = None
    _seqs: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "family", BoundFamily(self.family))
        missing = [k for k in _REQUIRED[self.family] if getattr(self, k) is None]
        if missing:
            raise ConfigurationError(
                f"family {self.family.value} needs {', '.join(missing)}"
            )
        if self.family in (BoundFamily.CAPITAL_FIXED_EPS, BoundFamily.CAPITAL_ADAPTIVE_EPS,
                           BoundFamily.CAPITAL_ONE_SIDED):
            self.geometry.require_positive_B()
        if self.family in (BoundFamily.HOEFFDING_TWO_SIDED, BoundFamily.HOEFFDING_ONE_SIDED):
            self.geometry.require_positive_D()
        if self.eps is not None:
            max_eps = 1.0 / (2.0 * self.geometry.B) if self.geometry.B > 0 else math.inf
            if not 0 < self.eps <= max_eps * (1 + 1e-12):
                raise ConfigurationError(f"eps must lie in (0, 1/(2B)], got {self.eps}")
        seqs = {k: as_sequence(getattr(self, k)) for k in ("m", "v", "r", "s")}
        object.__setattr__(self, "_seqs", seqs)

    def seq(self, name: str, n) -> np.ndarray:
        return self._seqs[name](n)


def _ratio(num, den):
    """``num / den`` with ``x / 0 = inf`` for ``x > 0`` and ``0 / 0 = 0``."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    return np.where(den > 0, out, np.where(num > 0, np.inf, 0.0))


def u_values(spec: PowerBoundSpec, n) -> np.ndarray:
    """Vectorised ``u_n`` over an array of indices ``n >= 1``."""
    n = np.asarray(n, dtype=float)
    if np.any(n < 1):
        raise ConfigurationError("u_n is defined for n >= 1")
    fam = spec.family
    g = spec.geometry
    m = spec.seq("m", n)
    r = spec.seq("r", n)
    logn = _log(n)
    pos = lambda x: np.maximum(x, 0.0)  # noqa: E731

    if fam in (BoundFamily.HOEFFDING_TWO_SIDED, BoundFamily.HOEFFDING_ONE_SIDED):
        k = 2.0 if fam is BoundFamily.HOEFFDING_TWO_SIDED else 1.0
        return 2.0 * n * pos(m - k * g.D * np.sqrt(logn / n)) ** 2 / g.D**2 - r
    if fam is BoundFamily.CAPITAL_FIXED_EPS:
        v = spec.seq("v", n)
        eps = spec.eps
        return eps * n * m - 4.0 * eps**2 * n * v - 2.0 * np.log(2 * g.d * n**2) - r
    if fam in (BoundFamily.CAPITAL_ADAPTIVE_EPS, BoundFamily.CAPITAL_ONE_SIDED):
        v = spec.seq("v", n)
        growth = 0.25 * n * m * np.minimum(1.0 / g.B, _ratio(m, 4.0 * v))
        growth = np.where(m > 0, growth, 0.0)
        if fam is BoundFamily.CAPITAL_ADAPTIVE_EPS:
            return growth - 2.0 * np.log(2 * g.d * n**2) - r
        return growth - 4.0 * logn - r
    s = spec.seq("s", n)
    if fam is BoundFamily.HOEFFDING_FUNCTIONAL:
        return pos(n * m - s - 2.0 * np.sqrt(n * logn)) ** 2 / (2.0 * n) - r
    # two-step and capital functional share one form
    v = spec.seq("v", n)
    excess = pos(n * m - s)
    growth = 0.25 * excess * np.minimum(1.0, _ratio(excess, 4.0 * n * v))
    return growth - 4.0 * logn - r


def u_n(spec: PowerBoundSpec, n: int) -> float:
    if int(n) != n or n < 1:
        raise ConfigurationError(f"n must be a positive integer, got {n!r}")
    return float(u_values(spec, np.array([n]))[0])


# --------------------------------------------------------------------------
# aleph
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BeyondHorizon:
    """``aleph`` found no index within ``horizon``; the true value may be
    larger or infinite."""

    horizon: int

    def __str__(self) -> str:
        return f">{self.horizon}"


def materialize(u, horizon: int) -> np.ndarray:
    """``u_1..u_horizon`` from an array, a :class:`PowerBoundSpec` or a
    vectorised callable."""
    if horizon < 1:
        raise ConfigurationError("horizon must be at least 1")
    if isinstance(u, PowerBoundSpec):
        return u_values(u, np.arange(1, horizon + 1))
    if callable(u):
        return np.asarray(u(np.arange(1, horizon + 1)), dtype=float).reshape(horizon)
    values = np.asarray(u, dtype=float).reshape(-1)
    if values.size < horizon:
        raise ConfigurationError(f"sequence has {values.size} terms, horizon is {horizon}")
    return values[:horizon]


def aleph(u, x: float, horizon: int):
    """``inf{n >= 1 : inf_{k >= n} u_k >= x}`` with the infimum over ``k``
    restricted to ``k <= horizon``.

    Returns an ``int`` or :class:`BeyondHorizon` when even ``u_horizon`` is
    below ``x``.
    """
    values = materialize(u, horizon)
    suffix_min = np.minimum.accumulate(values[::-1])[::-1]
    ok = suffix_min >= x
    if not ok[-1]:
        return BeyondHorizon(horizon)
    # ok is monotone (False...False True...True)
    return int(np.argmax(ok)) + 1


def linlog(z: float) -> float:
    """``z log z`` for ``z > 0``."""
    if not z > 0:
        raise ConfigurationError(f"linlog is defined for z > 0, got {z}")
    return z * math.log(z)


def lambert_like(z: float) -> float:
    """The solution ``y >= e`` of ``log(y) / y = z`` for ``0 < z <= 1/e``;
    ``0`` for ``z > 1/e``.

    Uses the lower branch of the Lambert W function,
    ``y = exp(-W_{-1}(-z))``, refined by Newton steps on ``s = log y``.
    """
    z = float(z)
    if not z > 0:
        raise ConfigurationError(f"lambert_like needs z > 0, got {z}")
    inv_e = math.exp(-1.0)
    if z > inv_e:
        return 0.0
    if inv_e - z <= 1e-15:
        return math.e
    w = lambertw(-z, k=-1)
    s = -float(w.real)
    # Newton on h(s) = log(s) - s - log(z); h'(s) = 1/s - 1 < 0 for s > 1.
    logz = math.log(z)
    for _ in range(3):
        h = math.log(s) - s - logz
        dh = 1.0 / s - 1.0
        if dh == 0 or h == 0:
            break
        s_new = s - h / dh
        if not s_new >= 1.0:
            break
        s = s_new
    return math.exp(s)


def aleph_closed_form(a: float, b: float, beta: float, x: float) -> int:
    """``aleph`` of ``u_n = a n^beta - b log n`` at level ``x``:
    ``ceil((e^{-beta x/b} L((a beta/b) e^{-beta x/b}))^{1/beta})`` (at least 1).
    """
    if not (a > 0 and b > 0 and beta > 0):
        raise ConfigurationError("aleph_closed_form needs a, b, beta > 0")
    # work with logarithms: e^{-beta x / b} over- or underflows for large |x|
    log_shrink = -beta * x / b
    log_z = math.log(a * beta / b) + log_shrink
    if log_z > -1.0:
        return 1
    y = lambert_like(math.exp(log_z))
    log_value = (log_shrink + math.log(y)) / beta
    if log_value > 700:
        raise ConfigurationError("aleph_closed_form result exceeds floating-point range")
    value = math.exp(log_value)
    nearest = round(value)
    if abs(value - nearest) <= 1e-9 * max(1.0, value):
        value = float(nearest)
    return max(1, math.ceil(value))


def expected_tau_bound(spec: PowerBoundSpec, rho_terms: float, alpha: float, horizon: int):
    """``rho_terms + c_family + aleph(u, log(1/alpha))`` or
    :class:`BeyondHorizon`. ``rho_terms`` are the caller's tail sums for the
    alternative (zero for deterministic conditional moments)."""
    alpha = check_alpha(alpha)
    if rho_terms < 0:
        raise ConfigurationError("rho_terms must be nonnegative")
    n0 = aleph(spec, math.log(1.0 / alpha), horizon)
    if isinstance(n0, BeyondHorizon):
        return n0
    return rho_terms + FAMILY_CONSTANT[spec.family] + n0


# --------------------------------------------------------------------------
# Adversarial streams and lower bounds
# --------------------------------------------------------------------------

class AdversarialKind(enum.Enum):
    HOEFFDING_LIMIT = "hoeffding-limit"
    HOEFFDING_CONST = "hoeffding-const"
    CAPITAL_LIMIT = "capital-limit"
    CAPITAL_CONST = "capital-const"


def adversarial_values(kind, m, T: int) -> np.ndarray:
    """Deterministic scalar stream ``X_t = z_t - z_{t-1}`` shaped ``(T, 1)``.

    ``z_n = m sqrt(n)`` (hoeffding-limit), ``z_n = n m`` (both const kinds)
    or ``z_n = m`` (capital-limit, i.e. mean ``m / n``). If ``m`` is a
    callable ``n -> m_n`` the stream uses ``z_n = n m_n`` instead.
    """
    kind = AdversarialKind(kind)
    if T < 1:
        raise ConfigurationError("T must be at least 1")
    n = np.arange(0, T + 1, dtype=float)
    if callable(m):
        z = np.concatenate([[0.0], n[1:] * np.asarray(m(n[1:]), dtype=float)])
    else:
        m = float(m)
        if not m > 0:
            raise ConfigurationError(f"adversarial streams need m > 0, got {m}")
        if kind is AdversarialKind.HOEFFDING_LIMIT:
            z = m * np.sqrt(n)
        elif kind is AdversarialKind.CAPITAL_LIMIT:
            z = np.where(n >= 1, m, 0.0)
        else:
            # constant increments, exactly m (differencing n m would add rounding noise)
            return np.full((T, 1), m)
    return np.diff(z)[:, None]


def adversarial_stream(kind, m: float, T: int, B: float = 1.0, D: float = 2.0) -> StreamSpec:
    """:class:`StreamSpec` of :func:`adversarial_values` with geometry ``(1, B, D)``."""
    kind = AdversarialKind(kind)
    adversarial_values(kind, m, 1)  # validate
    GeometryBounds(1, B, D)
    return StreamSpec("adversarial", {"kind": kind.value, "m": float(m), "B": float(B), "D": float(D)},
                      seed=0, T=T)


def lower_bound_tau(kind: str, m: float, geometry: GeometryBounds, alpha: float) -> float:
    """Deterministic lower bound on the rejection time on the constant
    adversarial stream: ``D^2 log(1/alpha) / (2 m^2)`` for Hoeffding,
    ``2 B log(1/alpha) / m`` for Capital."""
    alpha = check_alpha(alpha)
    if not m > 0:
        raise ConfigurationError(f"m must be positive, got {m}")
    if kind == "hoeffding":
        return geometry.D**2 * math.log(1.0 / alpha) / (2.0 * m**2)
    if kind == "capital":
        return 2.0 * geometry.B * math.log(1.0 / alpha) / m
    raise ConfigurationError(f"kind must be 'hoeffding' or 'capital', got {kind!r}")


def limit_threshold(kind, geometry: GeometryBounds, alpha: float) -> float:
    """Largest ``m`` (exclusive) for which the limit stream provably never
    triggers a rejection."""
    kind = AdversarialKind(kind)
    alpha = check_alpha(alpha)
    if kind is AdversarialKind.HOEFFDING_LIMIT:
        return geometry.D / math.sqrt(2.0 * math.log(1.0 / alpha))
    if kind is AdversarialKind.CAPITAL_LIMIT:
        return 2.0 * geometry.B * math.log(1.0 / alpha)
    raise ConfigurationError(f"{kind.value} is not a limit stream")
