"""Predictable betting strategies.

Every strategy exposes ``bet()``, the bet for the next round computed from
past observations only, and ``update(x)``, which ingests the observation the
bet was played against. State arrays carry an optional leading batch shape so
that many independent trajectories advance in lockstep.
"""

from __future__ import annotations

import math

import numpy as np

from .core import BetDomainError, ConfigurationError, GeometryBounds, NumericalError

#: Step constant of the online Newton step recursion.
ONS_STEP = 2.0 / (2.0 - math.log(3.0))

PROJECTION_RTOL = 1e-10


# --------------------------------------------------------------------------
# Projections
# --------------------------------------------------------------------------

def euclidean_ball_projection(x, r: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    norms = np.linalg.norm(x, axis=-1, keepdims=True)
    scale = np.where(norms > r, r / np.where(norms > 0, norms, 1.0), 1.0)
    return x * scale


def a_norm_ball_projection(A, x, r: float, nonnegative: bool = False,
                           rtol: float = PROJECTION_RTOL, max_iter: int = 500) -> np.ndarray:
    """Project ``x`` onto the centred ball of radius ``r`` in the norm induced
    by the positive-definite matrix ``A``.

    Solves ``argmin_{||y|| <= r} (y - x)^T A (y - x)``. Outside the ball the
    minimiser is ``y(lam) = (A + lam I)^{-1} A x`` for the unique ``lam > 0``
    with ``||y(lam)|| = r``; ``lam`` is bracketed by doubling and then found by
    bisection on the eigen-decomposition of ``A``. The returned point is the
    feasible end of the final bracket, so its norm never exceeds ``r``.

    In one dimension the projection is plain clamping to ``[-r, r]``, or to
    ``[0, r]`` with ``nonnegative=True`` (one dimension only).

    Leading axes of ``A`` (``(..., d, d)``) and ``x`` (``(..., d)``) broadcast.
    """
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(x))):
        raise NumericalError("projection input contains non-finite entries")
    if r <= 0:
        raise ConfigurationError(f"projection radius must be positive, got {r}")
    if nonnegative:
        if x.shape[-1] != 1:
            raise ConfigurationError("nonnegative projection is only defined for d = 1")
        return np.clip(x, 0.0, r)
    if x.shape[-1] == 1:
        # in one dimension every A-norm is a multiple of |.|: projection is clamping
        return np.clip(np.broadcast_to(x, np.broadcast_shapes(A.shape[:-2], x.shape[:-1]) + (1,)), -r, r)

    d = x.shape[-1]
    batch = np.broadcast_shapes(A.shape[:-2], x.shape[:-1])
    A = np.broadcast_to(A, batch + (d, d)).reshape(-1, d, d)
    flat = np.broadcast_to(x, batch + (d,)).reshape(-1, d)
    out = flat.copy()

    outside = np.linalg.norm(flat, axis=-1) > r
    if not np.any(outside):
        return out.reshape(batch + (d,))

    w, Q = np.linalg.eigh(A[outside])
    if np.any(w <= 0):
        raise NumericalError("projection matrix is not positive definite")
    c = np.einsum("nij,ni->nj", Q, flat[outside])
    wc = w * c

    def norm_at(lam):
        return np.linalg.norm(wc / (w + lam[:, None]), axis=-1)

    lo = np.zeros(len(w))
    hi = np.max(w, axis=-1)
    too_big = norm_at(hi) > r
    while np.any(too_big):
        lo = np.where(too_big, hi, lo)
        hi = np.where(too_big, 2 * hi, hi)
        too_big = norm_at(hi) > r

    for _ in range(max_iter):
        done = (r - norm_at(hi)) <= rtol * r
        if np.all(done):
            break
        mid = 0.5 * (lo + hi)
        above = norm_at(mid) > r
        lo = np.where(~done & above, mid, lo)
        hi = np.where(~done & ~above, mid, hi)
        if np.all(done | (hi - lo <= 4 * np.finfo(float).eps * hi)):
            break

    y = wc / (w + hi[:, None])
    out[outside] = np.einsum("nij,nj->ni", Q, y)
    return out.reshape(batch + (d,))


# --------------------------------------------------------------------------
# Follow the leader (Hoeffding process)
# --------------------------------------------------------------------------

def ftl_bet(mean, D: float, one_sided: bool = False) -> np.ndarray:
    """Closed-form maximiser ``4 mean / D^2`` of the Hoeffding log-wealth."""
    if D <= 0:
        raise ConfigurationError("FTL needs a positive diameter D")
    lam = 4.0 * np.asarray(mean, dtype=float) / D**2
    if one_sided:
        lam = np.maximum(lam, 0.0)
    return lam


class FollowTheLeader:
    """Plays the maximiser of the Hoeffding log-wealth on past data."""

    name = "ftl"

    def __init__(self, geometry: GeometryBounds, batch_shape=(), one_sided: bool = False):
        geometry.require_positive_D()
        self.geometry = geometry
        self.one_sided = one_sided
        self.sum_x = np.zeros(tuple(batch_shape) + (geometry.d,))
        self.n = 0

    @property
    def mean(self) -> np.ndarray:
        return self.sum_x / self.n if self.n else np.zeros_like(self.sum_x)

    def bet(self) -> np.ndarray:
        return ftl_bet(self.mean, self.geometry.D, self.one_sided)

    def update(self, x) -> None:
        self.sum_x = self.sum_x + x
        self.n += 1


# --------------------------------------------------------------------------
# Exponentially weighted average over the canonical vertices
# --------------------------------------------------------------------------

def canonical_vertices(d: int, eps: float, one_sided: bool = False) -> np.ndarray:
    """Vertex bets ``eps * e_k``: ``+-`` each axis, or ``+`` only when one-sided."""
    eye = np.eye(d)
    return eps * (eye if one_sided else np.vstack([eye, -eye]))


def ewa_bet(log_wealths, vertices) -> np.ndarray:
    """Wealth-weighted average of the vertex bets."""
    lw = np.asarray(log_wealths, dtype=float)
    weights = np.exp(lw - lw.max(axis=-1, keepdims=True))
    weights /= weights.sum(axis=-1, keepdims=True)
    return weights @ vertices


def ewa_update(log_wealths, vertices, x) -> np.ndarray:
    growth = 1.0 + np.asarray(x, dtype=float) @ vertices.T
    if np.any(growth <= 0):
        raise BetDomainError("vertex bet produced a nonpositive wealth factor")
    return log_wealths + np.log(growth)


class ExponentiallyWeightedAverage:
    """Aggregates the constant Capital bets ``eps * e_k`` by their wealths.

    Parameters
    ----------
    eps : float, optional
        Vertex scale in ``(0, 1/(2B)]``; defaults to ``1/(2B)``.
    """

    name = "ewa"

    def __init__(self, geometry: GeometryBounds, batch_shape=(), one_sided: bool = False,
                 eps: float | None = None):
        geometry.require_positive_B()
        max_eps = 1.0 / (2.0 * geometry.B)
        eps = max_eps if eps is None else float(eps)
        if not 0 < eps <= max_eps * (1 + 1e-12):
            raise ConfigurationError(f"eps must lie in (0, 1/(2B)] = (0, {max_eps}], got {eps}")
        self.geometry = geometry
        self.eps = eps
        self.one_sided = one_sided
        self.vertices = canonical_vertices(geometry.d, eps, one_sided)
        self.log_wealths = np.zeros(tuple(batch_shape) + (len(self.vertices),))

    def bet(self) -> np.ndarray:
        return ewa_bet(self.log_wealths, self.vertices)

    def update(self, x) -> None:
        self.log_wealths = ewa_update(self.log_wealths, self.vertices, x)


# --------------------------------------------------------------------------
# Online Newton step
# --------------------------------------------------------------------------

def ons_step(A, gamma, x, one_sided: bool = False):
    """One round of online Newton step on a pre-scaled observation.

    ``x`` must satisfy ``||x|| <= 1`` and ``gamma`` must lie in the radius-1/2
    ball (``[0, 1/2]`` when one-sided). Returns the updated ``(A, gamma)``.
    """
    x = np.asarray(x, dtype=float)
    growth = 1.0 + np.sum(gamma * x, axis=-1, keepdims=True)
    if np.any(growth <= 0):
        raise BetDomainError("ONS bet left its feasible set (1 + gamma.x <= 0)")
    z = -x / growth
    A = A + z[..., :, None] * z[..., None, :]
    direction = np.linalg.solve(A, z[..., None])[..., 0]
    gamma = a_norm_ball_projection(A, gamma - ONS_STEP * direction, 0.5, nonnegative=one_sided)
    return A, gamma


class OnlineNewtonStep:
    """Online Newton step for the Capital process.

    Observations are divided by ``B`` before entering the recursion, so the
    bet played against the raw observation is ``gamma / B``; it lies in the
    ball of radius ``1/(2B)`` (or ``[0, 1/(2B)]`` when one-sided, ``d = 1``).
    """

    name = "ons"

    def __init__(self, geometry: GeometryBounds, batch_shape=(), one_sided: bool = False):
        geometry.require_positive_B()
        if one_sided and geometry.d != 1:
            raise ConfigurationError("one-sided ONS is only defined for d = 1")
        self.geometry = geometry
        self.one_sided = one_sided
        self.scale = geometry.B
        batch_shape = tuple(batch_shape)
        d = geometry.d
        self.A = np.broadcast_to(np.eye(d), batch_shape + (d, d)).copy()
        self.gamma = np.zeros(batch_shape + (d,))

    def bet(self) -> np.ndarray:
        return self.gamma / self.scale

    def update(self, x) -> None:
        self.A, self.gamma = ons_step(self.A, self.gamma, np.asarray(x) / self.scale,
                                      self.one_sided)


# --------------------------------------------------------------------------
# Online projected gradient ascent (direction of the two-step process)
# --------------------------------------------------------------------------

def oga_step(eta, t: int, x, B: float) -> np.ndarray:
    """Gradient step of size ``2/(B^2 sqrt(t))`` then projection onto the
    radius-``1/B`` ball."""
    if t < 1:
        raise ConfigurationError("OGA step counter starts at 1")
    raw = eta + 2.0 * np.asarray(x, dtype=float) / (B**2 * math.sqrt(t))
    return euclidean_ball_projection(raw, 1.0 / B)


class OnlineGradientAscent:
    name = "oga"

    def __init__(self, geometry: GeometryBounds, batch_shape=()):
        geometry.require_positive_B()
        self.geometry = geometry
        self.eta = np.zeros(tuple(batch_shape) + (geometry.d,))
        self.t = 1

    def bet(self) -> np.ndarray:
        return self.eta

    def update(self, x) -> None:
        self.eta = oga_step(self.eta, self.t, x, self.geometry.B)
        self.t += 1


# --------------------------------------------------------------------------
# Constant bet
# --------------------------------------------------------------------------

class FixedBet:
    """Plays the same bet every round (possibly a different one per batch row)."""

    name = "fixed"

    def __init__(self, geometry: GeometryBounds, value, batch_shape=()):
        self.geometry = geometry
        value = np.asarray(value, dtype=float)
        if value.ndim == 0:
            value = np.full(geometry.d, float(value))
        self.value = np.broadcast_to(value, tuple(batch_shape) + (geometry.d,)).copy()

    def bet(self) -> np.ndarray:
        return self.value

    def update(self, x) -> None:
        pass
