"""scikit-learn style estimators for empirical tail exponents.

``TailExponentEstimator`` fits ``-log P(X > t) / f(t)`` from a sample of
``X``; ``LDMEstimator`` fits the finite-``t`` local dependence measure from
a sample of pairs ``(A, B)``. Both follow the usual ``fit`` / ``get_params``
conventions, so they drop into pipelines and ``clone``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_increasing
from .exceptions import InputError
from .ldm import LDMCurve
from .regvar import RegVarFn


class TailExponentEstimator(BaseEstimator):
    """Empirical exponential-``f`` decay rate of a nonnegative sample.

    Parameters
    ----------
    f : RegVarFn, optional
        Scale function; defaults to ``t**2``.
    t_grid : array-like, optional
        Thresholds; defaults to 20 points up to the sample's 1 - 10/n quantile.
    min_hits : int
        Thresholds with fewer exceedances are flagged as unresolved.

    Attributes
    ----------
    t_grid_, hits_, prob_, ratios_, floor_hit_ : ndarray
    exponent_ : float
        Ratio at the largest resolved threshold (``nan`` if none).
    """

    def __init__(self, f=None, t_grid=None, min_hits=10):
        self.f = f
        self.t_grid = t_grid
        self.min_hits = min_hits

    def _f(self):
        return self.f if self.f is not None else RegVarFn(2.0)

    def fit(self, X, y=None):
        x = check_array(X, ensure_2d=False, dtype=float).reshape(-1)
        if np.any(x < 0):
            raise InputError("samples must be nonnegative")
        n = x.size
        if self.t_grid is None:
            top = np.quantile(x, max(0.0, 1.0 - self.min_hits / n))
            t = np.linspace(top / 20, top, 20) if top > 0 else np.array([1.0])
        else:
            t = check_increasing(self.t_grid, "t_grid")
        xs = np.sort(x)
        hits = n - np.searchsorted(xs, t, side="right")
        with np.errstate(divide="ignore"):
            ratios = -np.log(hits / n) / np.asarray(self._f()(t), dtype=float)
        self.t_grid_, self.hits_, self.prob_ = t, hits, hits / n
        self.ratios_ = ratios
        self.floor_hit_ = hits < self.min_hits
        ok = np.flatnonzero(~self.floor_hit_)
        self.exponent_ = float(ratios[ok[-1]]) if ok.size else float("nan")
        self.n_samples_ = n
        return self

    def predict_log_survival(self, t):
        """``-exponent_ * f(t)``, the fitted logarithmic tail."""
        check_is_fitted(self, "exponent_")
        return -self.exponent_ * np.asarray(self._f()(np.asarray(t, dtype=float)))


class LDMEstimator(BaseEstimator):
    """Finite-``t`` estimate of ``g(y) = -log P(A t y + B > t) / f(t)`` from pairs.

    ``X`` is an ``(n, 2)`` array of ``(A, B)`` draws. ``predict(y)`` evaluates
    the fitted curve by interpolation.
    """

    def __init__(self, f=None, y_grid=None, t=3.0, min_hits=10):
        self.f = f
        self.y_grid = y_grid
        self.t = t
        self.min_hits = min_hits

    def fit(self, X, y=None):
        ab = check_array(X, dtype=float)
        if ab.shape[1] != 2:
            raise InputError("X must have two columns (A, B)")
        if np.any(ab < 0):
            raise InputError("pairs must be nonnegative")
        f = self.f if self.f is not None else RegVarFn(2.0)
        grid = check_increasing(np.linspace(0, 2, 21) if self.y_grid is None else self.y_grid, "y_grid")
        a, b = ab[:, 0], ab[:, 1]
        t = float(self.t)
        hits = np.array([np.count_nonzero(a * t * yy + b > t) for yy in grid])
        n = ab.shape[0]
        with np.errstate(divide="ignore"):
            vals = -np.log(hits / n) / float(f(t))
        self.hits_ = hits
        self.floor_hit_ = hits < self.min_hits
        self.a_plus_ = float(a.max()) if a.max() > 0 else 1.0
        self.curve_ = LDMCurve(grid, vals, "finite_t_estimate", f.rho, float(vals[0]), self.a_plus_)
        self.g_ = vals
        return self

    def predict(self, y):
        check_is_fitted(self, "curve_")
        return np.asarray(self.curve_(np.asarray(y, dtype=float)))
