"""Regret oracles: the best constant bet in hindsight, compared with the
log-wealth a strategy actually achieved.

Hoeffding log-wealth is a concave quadratic in the bet, so its maximum has
a closed form. Capital log-wealth over a finite vertex set is an exact max;
over a ball it is a concave program solved here by a projected Newton
iteration, and its optimal value is certified with the Frank-Wolfe gap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigurationError, GeometryBounds, NullSpec, NumericalError
from .strategies import a_norm_ball_projection


@dataclass(frozen=True)
class VertexSet:
    vertices: np.ndarray


@dataclass(frozen=True)
class Ball:
    """Centred ball of bets; ``nonnegative`` turns it into ``[0, radius]`` (d = 1)."""

    radius: float
    nonnegative: bool = False


# --------------------------------------------------------------------------
# Hoeffding
# --------------------------------------------------------------------------

def hoeffding_max_log_wealth(history, geometry: GeometryBounds, null=NullSpec.TWO_SIDED):
    """``max_lam log L_n(lam) = 2 n ||mean||^2 / D^2`` (positive part of the
    mean when one-sided). ``history`` is ``(n, ..., d)``."""
    history = np.asarray(history, dtype=float)
    n = history.shape[0]
    if n == 0:
        raise ConfigurationError("regret oracle needs a nonempty history")
    mean = history.mean(axis=0)
    if NullSpec.coerce(null).one_sided:
        mean = np.maximum(mean, 0.0)
    return 2.0 * n * np.sum(mean**2, axis=-1) / geometry.D**2


def hoeffding_max_log_wealth_path(X, geometry: GeometryBounds, null=NullSpec.TWO_SIDED):
    """The hindsight maximum for every prefix, shaped like ``X[..., 0]``."""
    X = np.asarray(X, dtype=float)
    n = np.arange(1, X.shape[0] + 1).reshape((-1,) + (1,) * (X.ndim - 1))
    mean = np.cumsum(X, axis=0) / n
    if NullSpec.coerce(null).one_sided:
        mean = np.maximum(mean, 0.0)
    return 2.0 * n[..., 0] * np.sum(mean**2, axis=-1) / geometry.D**2


def hoeffding_regret_oracle(history, log_wealth, null, geometry: GeometryBounds):
    return hoeffding_max_log_wealth(history, geometry, null) - np.asarray(log_wealth)


# --------------------------------------------------------------------------
# Capital
# --------------------------------------------------------------------------

def vertex_log_wealths(X, vertices) -> np.ndarray:
    """Cumulative ``log L_n(g_k)`` for every prefix and vertex: ``(T, ..., K)``."""
    return np.cumsum(np.log1p(np.asarray(X, dtype=float) @ np.asarray(vertices).T), axis=0)


def _objective(X, gamma):
    u = 1.0 + np.einsum("knd,kd->kn", X, gamma)
    if np.any(u <= 0):
        raise NumericalError("capital oracle left the domain of log(1 + gamma.x)")
    return np.sum(np.log(u), axis=-1), u


def _fw_gap(grad, gamma, ball: Ball):
    """``max_{y in set} grad.(y - gamma)``; an upper bound on the suboptimality."""
    if ball.nonnegative:
        return np.maximum(grad[..., 0], 0.0) * ball.radius - grad[..., 0] * gamma[..., 0]
    return ball.radius * np.linalg.norm(grad, axis=-1) - np.sum(grad * gamma, axis=-1)


def ball_max_log_wealth(X, ball: Ball, gamma0=None, tol: float = 1e-9, max_iter: int = 100):
    """Maximise ``sum_t log(1 + gamma.x_t)`` over ``ball``.

    ``X`` is ``(..., n, d)``; leading axes are independent problems. Uses a
    proximal Newton iteration (Newton direction followed by the projection in
    the Hessian norm) with backtracking. Returns ``(value, gap, gamma)``
    where ``value + gap`` is a certified upper bound on the maximum.
    """
    X = np.asarray(X, dtype=float)
    d = X.shape[-1]
    if ball.nonnegative and d != 1:
        raise ConfigurationError("nonnegative ball is only defined for d = 1")
    batch = X.shape[:-2]
    Xf = X.reshape((-1,) + X.shape[-2:])
    if gamma0 is None:
        gamma = np.zeros((Xf.shape[0], d))
    else:
        gamma = np.broadcast_to(np.asarray(gamma0, dtype=float), batch + (d,)).reshape(-1, d).copy()
    value, u = _objective(Xf, gamma)
    ridge = 1e-12 * np.eye(d)
    active = np.arange(Xf.shape[0])
    for _ in range(max_iter):
        Xa, ga, va, ua = Xf[active], gamma[active], value[active], u[active]
        grad = np.einsum("knd,kn->kd", Xa, 1.0 / ua)
        keep = _fw_gap(grad, ga, ball) > tol
        if not np.any(keep):
            break
        active, Xa, ga, va, ua, grad = (a[keep] for a in (active, Xa, ga, va, ua, grad))
        hess = np.einsum("knd,kne,kn->kde", Xa, Xa, 1.0 / ua**2) + ridge
        newton = ga + np.linalg.solve(hess, grad[..., None])[..., 0]
        step = a_norm_ball_projection(hess, newton, ball.radius, nonnegative=ball.nonnegative) - ga
        t = np.ones(len(active))
        improved = np.zeros(len(active), dtype=bool)
        for _ in range(40):
            pending = ~improved
            trial = ga[pending] + t[pending, None] * step[pending]
            trial_value, trial_u = _objective(Xa[pending], trial)
            ok = trial_value > va[pending]
            idx = np.flatnonzero(pending)[ok]
            ga[idx], va[idx], ua[idx] = trial[ok], trial_value[ok], trial_u[ok]
            improved[idx] = True
            if improved.all():
                break
            t[~improved] *= 0.5
        gamma[active], value[active], u[active] = ga, va, ua
        # no ascent along the projected Newton step: numerically optimal
        active = active[improved]
        if active.size == 0:
            break
    grad = np.einsum("knd,kn->kd", Xf, 1.0 / u)
    gap = np.maximum(_fw_gap(grad, gamma, ball), 0.0)
    return value.reshape(batch), gap.reshape(batch), gamma.reshape(batch + (d,))


def ball_max_log_wealth_path(X, ball: Ball, tol: float = 1e-9):
    """Hindsight maximum over ``ball`` for every prefix of ``X`` (``(T, ..., d)``).

    Each prefix is warm-started from the previous optimum. Returns
    ``(values, gaps)`` shaped ``(T, ...)``.
    """
    X = np.moveaxis(np.asarray(X, dtype=float), 0, -2)
    T = X.shape[-2]
    values = np.empty(X.shape[:-2] + (T,))
    gaps = np.empty_like(values)
    gamma = None
    for n in range(1, T + 1):
        v, g, gamma = ball_max_log_wealth(X[..., :n, :], ball, gamma0=gamma, tol=tol)
        values[..., n - 1] = v
        gaps[..., n - 1] = g
    return np.moveaxis(values, -1, 0), np.moveaxis(gaps, -1, 0)


def capital_max_log_wealth(history, gamma_set):
    """Hindsight maximum over a :class:`VertexSet` (exact) or a :class:`Ball`
    (certified to within its reported gap)."""
    history = np.asarray(history, dtype=float)
    if history.shape[0] == 0:
        raise ConfigurationError("regret oracle needs a nonempty history")
    if isinstance(gamma_set, VertexSet):
        return vertex_log_wealths(history, gamma_set.vertices)[-1].max(axis=-1)
    if isinstance(gamma_set, Ball):
        value, gap, _ = ball_max_log_wealth(np.moveaxis(history, 0, -2), gamma_set)
        if np.any(gap > 1e-6):
            raise NumericalError(f"ball oracle did not reach tolerance (gap {np.max(gap):.3g})")
        return value
    raise ConfigurationError(f"unknown bet set {gamma_set!r}")


def capital_regret_oracle(history, log_wealth, gamma_set):
    return capital_max_log_wealth(history, gamma_set) - np.asarray(log_wealth)


# --------------------------------------------------------------------------
# Two-step direction
# --------------------------------------------------------------------------

def oga_linear_regret_path(X, directions, radius: float):
    """``sup_{||eta|| <= radius} sum eta.X_t - sum eta_t.X_t`` for every prefix.

    ``directions`` are the played ``eta_t`` aligned with ``X``.
    """
    X = np.asarray(X, dtype=float)
    best = radius * np.linalg.norm(np.cumsum(X, axis=0), axis=-1)
    played = np.cumsum(np.sum(np.asarray(directions) * X, axis=-1), axis=0)
    return best - played
