"""scikit-learn style front end.

:class:`SequentialTest` wraps a wealth process as an estimator: ``fit`` runs
the test on a stream (optionally continuing with ``partial_fit``), and the
fitted attributes expose the log-wealth path and the rejection decision.
Hyperparameters are plain constructor arguments, so the estimator clones,
prints and grid-searches like any other.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator

from .core import GeometryBounds, NullSpec, check_stream
from .martingales import FUNCTIONAL_GEOMETRY, check_alpha, make_process, rejection_time


class SequentialTest(BaseEstimator):
    """Anytime-valid test that the conditional mean of a bounded stream is zero
    (or nonpositive for one-sided nulls).

    Parameters
    ----------
    process : str
        ``hoeffding_ftl``, ``capital_ewa``, ``capital_ons`` or
        ``capital_2steps``.
    alpha : float
        Level; the null is rejected once the wealth reaches ``1/alpha``.
    B, D : float
        Norm and diameter bounds of the observations. ``D`` defaults to ``2B``.
    null : str
        ``two-sided``, ``one-sided``, ``functional-two-sided`` or
        ``functional-one-sided``.
    eps : float, optional
        EWA vertex scale.

    Attributes
    ----------
    log_wealth_ : ndarray of shape (n_steps,)
    tau_ : int or None
        First step with ``log_wealth_ >= log(1/alpha)``.
    rejected_ : bool
    n_steps_ : int
    """

    def __init__(self, process="capital_ons", alpha=0.05, B=1.0, D=None,
                 null="two-sided", eps=None):
        self.process = process
        self.alpha = alpha
        self.B = B
        self.D = D
        self.null = null
        self.eps = eps

    def _geometry(self, d: int) -> GeometryBounds:
        if NullSpec.coerce(self.null).functional:
            return FUNCTIONAL_GEOMETRY
        return GeometryBounds(d, float(self.B), 2.0 * float(self.B) if self.D is None else float(self.D))

    def _prepare(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        return check_stream(X, self._geometry(X.shape[1]))

    def fit(self, X, y=None):
        """Run the test from scratch on the rows of ``X`` (``(n_steps, d)``)."""
        check_alpha(self.alpha)
        X = self._prepare(X)
        self.n_features_in_ = X.shape[1]
        self.process_ = make_process(self.process, self._geometry(X.shape[1]), self.null, eps=self.eps)
        self.log_wealth_ = np.empty(0)
        return self._consume(X)

    def partial_fit(self, X, y=None):
        """Continue the running test with further observations."""
        if not hasattr(self, "process_"):
            return self.fit(X, y)
        X = self._prepare(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return self._consume(X)

    def _consume(self, X):
        path = self.process_.run(X)
        self.log_wealth_ = np.concatenate([self.log_wealth_, path])
        record = rejection_time(self.log_wealth_, self.alpha) if self.log_wealth_.size else None
        self.tau_ = record.tau if record else None
        self.rejected_ = bool(record and record.rejected)
        self.n_steps_ = self.log_wealth_.size
        return self

    def e_value(self) -> float:
        """Current wealth ``W_n`` (an e-value for the null)."""
        return math.exp(self.log_wealth_[-1]) if self.log_wealth_.size else 1.0

    def decision_function(self, X=None):
        """Log-wealth path minus the threshold; positive entries reject."""
        return self.log_wealth_ - math.log(1.0 / self.alpha)
