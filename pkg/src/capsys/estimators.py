"""scikit-learn style estimators for the solver and the enclosing ellipsoid.

Kept apart from the numerical modules so that importing those does not pull
in scikit-learn.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from . import dual, john

__all__ = ["ClarkeDualSolver", "EnclosingEllipsoid"]


class ClarkeDualSolver(BaseEstimator):
    """Estimator front end to :func:`capsys.dual.solve`.

    ``fit(body)`` stores the certified runs in ``systoles_`` (sorted by
    value), the best one in ``systole_`` and its value in ``capacity_``.
    """

    def __init__(self, modes=24, grid=None, starts=8, seed=0, tau0=3e-2, decay=0.25,
                 tau_min=1e-4, max_iter=50_000, tol=1e-9, polish_iter=300, threads=1):
        self.modes = modes
        self.grid = grid
        self.starts = starts
        self.seed = seed
        self.tau0 = tau0
        self.decay = decay
        self.tau_min = tau_min
        self.max_iter = max_iter
        self.tol = tol
        self.polish_iter = polish_iter
        self.threads = threads

    def config(self):
        return dual.SolveConfig(**self.get_params())

    def fit(self, body, y=None):
        self.systoles_ = dual.solve(body, self.config())
        self.systole_ = self.systoles_[0]
        self.capacity_ = self.systole_.value
        return self

    def score(self, body, y=None):
        """Negative best dual value, so that larger is better."""
        return -dual.solve(body, self.config())[0].value


class EnclosingEllipsoid(BaseEstimator):
    """Estimator form of :func:`capsys.john.enclosing_ellipsoid`; ``fit`` takes a point array."""

    def __init__(self, tol=1e-6, centrally_symmetric=False, max_iter=100_000):
        self.tol = tol
        self.centrally_symmetric = centrally_symmetric
        self.max_iter = max_iter

    def fit(self, X, y=None):
        res = john.enclosing_ellipsoid(X, self.tol, self.centrally_symmetric, self.max_iter)
        self.result_ = res
        self.center_ = res.center
        self.shape_ = res.shape
        self.gap_ = res.duality_gap
        self.n_iter_ = res.iterations
        return self

    def score_samples(self, X):
        """Quadratic form ``(x - c)^T A (x - c)``; at most 1 on the fitted points."""
        R = np.asarray(X, dtype=float) - self.center_
        return np.einsum("ij,jk,ik->i", R, self.shape_, R)
