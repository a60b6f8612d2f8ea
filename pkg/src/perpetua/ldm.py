"""Local dependence measure ``g(y) = lim -log P(A t y + B > t) / f(t)``.

Closed forms cover PQD pairs and the atom-plus-survival family; for any
model with an analytic event probability (or a sampler) the finite-``t``
ratios are available through :func:`ldm_estimate`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._optim import batch_grid_minimize, clustered_grid
from ._validation import check_increasing
from .exceptions import InputError, PropertyFailure, UnsupportedQueryError
from .models import AlphaFn, AtomSurvivalModel, IndependentModel, PairModel
from .regvar import RegVarFn
from .rng import map_chunks

SOURCES = ("pqd_closed", "example8_closed", "finite_t_estimate", "step", "tabulated")


def _ret(x):
    x = np.asarray(x, dtype=float)
    return x[()] if x.ndim == 0 else x


class LDM:
    """A local dependence measure usable by the transform routines.

    Subclasses provide a vectorised ``__call__``; ``breakpoints`` lists the
    abscissae where ``g`` may jump or kink.
    """

    rho: float
    a_plus: float
    source: str = "tabulated"

    @property
    def gamma0(self) -> float:
        return float(self(0.0))

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return (1.0 / self.a_plus,) if self.a_plus > 0 else ()

    @property
    def y_end(self) -> float:
        return 0.0

    def __call__(self, y):
        raise NotImplementedError

    def to_curve(self, y_grid: Sequence[float]) -> "LDMCurve":
        y = np.asarray(y_grid, dtype=float)
        return LDMCurve(y, np.asarray(self(y), dtype=float), self.source, self.rho,
                        self.gamma0, self.a_plus)


@dataclass(frozen=True)
class PQDLDM(LDM):
    gamma: float
    a_plus: float
    rho: float
    source: str = field(default="pqd_closed", init=False)

    def __post_init__(self):
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise InputError("gamma must be finite and nonnegative")
        if not 0 < self.a_plus <= 1:
            raise InputError("a_plus must lie in (0, 1]")
        if not self.rho > 0:
            raise InputError("rho must be positive")

    def __call__(self, y):
        return ldm_pqd(self.gamma, self.a_plus, self.rho, y)


@dataclass(frozen=True)
class StepLDM(LDM):
    """``g = inf`` below ``1/a_plus`` and ``0`` from there on."""

    a_plus: float
    rho: float
    source: str = field(default="step", init=False)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return _ret(np.where(y < 1.0 / self.a_plus, np.inf, 0.0))


@dataclass(frozen=True)
class Example8LDM(LDM):
    """``g(y) = scale * inf_a (1 - y a)**rho * alpha(a)`` on ``[0, 1]``, zero above."""

    alpha: AlphaFn
    rho: float
    scale: float = 1.0
    a_plus: float = field(default=1.0, init=False)
    source: str = field(default="example8_closed", init=False)

    @property
    def gamma0(self) -> float:
        return self.scale

    def __call__(self, y):
        return _ret(self.scale * np.asarray(ldm_example8(self.alpha, self.rho, y)))

    def argmin(self, y):
        return ldm_example8(self.alpha, self.rho, y, return_argmin=True)[1]


class LDMCurve(LDM):
    """Tabulated ``g`` on a strictly increasing ``y_grid``.

    Values between nodes are interpolated linearly (an infinite endpoint makes
    the cell infinite); beyond ``1/a_plus`` the curve is zero and beyond the
    last node it keeps the last value.
    """

    def __init__(self, y_grid, values, source: str, rho: float, gamma0: float,
                 a_plus: float, check: bool = True):
        y = np.asarray(y_grid, dtype=float)
        v = np.asarray(values, dtype=float)
        if y.ndim != 1 or y.shape != v.shape or y.size == 0:
            raise InputError("y_grid and values must be equal-length 1-d arrays")
        check_increasing(y, "y_grid", strict=True)
        if np.any(y < 0) or np.any(v < 0) or np.any(np.isnan(v)):
            raise InputError("LDM values live in [0, inf]")
        if source not in SOURCES:
            raise InputError(f"unknown source {source!r}")
        self.y_grid, self.values = y, v
        self.source, self.rho, self._gamma0, self.a_plus = source, float(rho), float(gamma0), float(a_plus)
        if check:
            bad = [k for k, ok in self.check_invariants().items() if not ok]
            if bad:
                raise PropertyFailure(f"LDM curve violates {', '.join(bad)}")

    @property
    def gamma0(self) -> float:
        return self._gamma0

    @property
    def y_end(self) -> float:
        return float(self.y_grid[-1])

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(self.y_grid) + super().breakpoints

    def check_invariants(self, rtol: float = 1e-9) -> dict[str, bool]:
        """Monotonicity always; the two limit properties only for closed forms.

        Finite-``t`` estimates are strictly positive above ``1/a_plus`` and may
        sit below the asymptotic lower bound, so those checks do not apply.
        """
        y, v = self.y_grid, self.values
        fin = np.where(np.isinf(v), np.finfo(float).max, v)
        out = {"nonincreasing": bool(np.all(np.diff(fin) <= rtol * np.maximum(1.0, fin[:-1])))}
        if self.source != "finite_t_estimate":
            above = y > 1.0 / self.a_plus
            out["zero_above_inverse_a_plus"] = bool(np.all(v[above] == 0.0))
            with np.errstate(invalid="ignore"):
                lb = self._gamma0 * np.maximum(1.0 - self.a_plus * y, 0.0) ** self.rho
            lb = np.where(np.isnan(lb), 0.0, lb)
            out["above_lower_bound"] = bool(np.all(v >= lb * (1.0 - rtol) - 1e-300))
        return out

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        yg, v = self.y_grid, self.values
        j = np.clip(np.searchsorted(yg, y, side="right") - 1, 0, yg.size - 1)
        k = np.minimum(j + 1, yg.size - 1)
        lo, hi = v[j], v[k]
        w = np.where(k > j, (y - yg[j]) / np.where(k > j, yg[k] - yg[j], 1.0), 0.0)
        w = np.clip(w, 0.0, 1.0)
        with np.errstate(invalid="ignore"):
            mid = np.where(np.isinf(lo) | np.isinf(hi), np.where(w > 0, np.maximum(lo, hi), lo),
                           lo + w * (hi - lo))
        out = np.where(y < yg[0], v[0], np.where(y >= yg[-1], v[-1], mid))
        out = np.where(y > 1.0 / self.a_plus, 0.0, out) if self.source != "finite_t_estimate" else out
        return _ret(out)


# ------------------------------------------------------------ closed forms --

def ldm_pqd(gamma: float, a_plus: float, rho: float, y):
    """``gamma * max(1 - a_plus*y, 0)**rho``."""
    y = np.asarray(y, dtype=float)
    return _ret(gamma * np.maximum(1.0 - a_plus * y, 0.0) ** rho)


_BLOCK = 2**21  # cells per vectorised block


def _alpha_grid() -> np.ndarray:
    return clustered_grid(0.0, 1.0 - 1e-15, 2048, edge=1e-13)


def ldm_example8(alpha: AlphaFn, rho: float, y, return_argmin: bool = False):
    """``inf over a in [0,1) of (1 - y a)**rho * alpha(a)`` for ``y <= 1``; 0 for ``y > 1``.

    Dense pre-scan then golden-section refinement, carried out in log space.
    """
    y = np.asarray(y, dtype=float)
    flat = y.reshape(-1)
    if np.any(flat < 0):
        raise InputError("y must be nonnegative")
    val = np.zeros(flat.shape)
    arg = np.full(flat.shape, np.nan)
    inside = flat <= 1.0
    if inside.any():
        yy = flat[inside]

        def logobj(yv, a):
            with np.errstate(divide="ignore", invalid="ignore"):
                return rho * np.log1p(-yv * a) + alpha.log(a)

        grid = _alpha_grid()
        step = max(1, _BLOCK // grid.size)
        xa, fl = np.empty(yy.size), np.empty(yy.size)
        for s in range(0, yy.size, step):
            xa[s:s + step], fl[s:s + step] = batch_grid_minimize(logobj, yy[s:s + step], grid)
        val[inside] = np.exp(fl)
        arg[inside] = xa
    val = val.reshape(y.shape)
    if return_argmin:
        return _ret(val), _ret(arg.reshape(y.shape))
    return _ret(val)


def _b_exponent(model: IndependentModel, f: RegVarFn) -> float:
    """``lim -log P(B > t) / f(t)`` for the independent family."""
    if model.B.law == "point":
        return math.inf
    rb, sigma = model.B.rho, model.B.sigma
    if rb > f.rho:
        return math.inf
    if rb < f.rho:
        return 0.0
    if f.log_exponent > 0:
        return 0.0
    if f.log_exponent < 0:
        return math.inf
    return sigma ** (-rb) / f.scale


def closed_form_ldm(model: PairModel, f: RegVarFn) -> LDM:
    """The limiting LDM of ``model`` under scale ``f`` where it is known exactly."""
    if isinstance(model, IndependentModel):
        gamma = _b_exponent(model, f)
        if model.a_plus == 0:
            raise UnsupportedQueryError("a_plus = 0 leaves g undefined above 0")
        if math.isinf(gamma):
            return StepLDM(model.a_plus, f.rho)
        return PQDLDM(gamma, model.a_plus, f.rho)
    if isinstance(model, AtomSurvivalModel):
        if f.log_exponent != 0 or f.rho != model.rho:
            raise UnsupportedQueryError("atom_survival closed form needs f = c * t**rho")
        return Example8LDM(model.alpha, model.rho, scale=1.0 / f.scale)
    raise UnsupportedQueryError(f"no closed-form LDM for {type(model).__name__}")


# ------------------------------------------------------------- estimation --

@dataclass
class LDMEstimate:
    y: float
    t_grid: np.ndarray
    log_probs: np.ndarray
    ratios: np.ndarray
    floor_hit: np.ndarray
    mode: str
    floor: float
    estimate: float
    infinite: bool
    hits: np.ndarray | None = None
    n_samples: int | None = None

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)

    def rows(self):
        for t, lp, r, fh in zip(self.t_grid, self.log_probs, self.ratios, self.floor_hit):
            yield {"y": self.y, "t": float(t), "prob": float(np.exp(lp)), "ratio": float(r),
                   "mode": self.mode, "floor_hit": int(fh)}


def ldm_estimate(model: PairModel, f: RegVarFn, y: float, t_grid: Sequence[float],
                 mode: str = "quadrature", n_samples: int = 10**6, seed: int = 0,
                 workers: int | None = None) -> LDMEstimate:
    """Finite-``t`` ratios ``-log P(A t y + B > t) / f(t)`` and the value at the largest resolvable ``t``.

    In quadrature mode probabilities are carried as logarithms, so the only
    unresolvable case is an exactly-zero probability. In Monte Carlo mode a
    ``t`` is resolvable when it has at least 10 hits (floor ``10/n``).
    """
    t = check_increasing(np.asarray(t_grid, dtype=float), "t_grid", strict=True)
    if np.any(t <= 0):
        raise InputError("t_grid must be positive")
    if y < 0:
        raise InputError("y must be nonnegative")
    ft = np.asarray(f(t), dtype=float)
    if mode == "quadrature":
        lp = np.array([model.log_event_prob(float(ti), float(y)) for ti in t])
        floor_hit = ~np.isfinite(lp)
        floor, hits, n = 0.0, None, None
    elif mode == "monte_carlo":
        if n_samples < 10**5:
            raise InputError("monte_carlo mode needs n_samples >= 1e5")

        def count(m, rng):
            a, b = model.sample(m, rng)
            return np.array([np.count_nonzero(a * ti * y + b > ti) for ti in t])

        hits = np.sum(map_chunks(count, n_samples, seed, workers), axis=0)
        n = int(n_samples)
        with np.errstate(divide="ignore"):
            lp = np.log(hits / n)
        floor = 10.0 / n
        floor_hit = hits < 10
    else:
        raise InputError(f"unknown mode {mode!r}")
    with np.errstate(invalid="ignore"):
        ratios = -lp / ft
    ok = np.flatnonzero(~floor_hit)
    infinite = False
    if ok.size:
        estimate = float(ratios[ok[-1]])
    elif hits is not None and not np.any(hits):
        estimate, infinite = math.inf, True
    elif hits is None and np.all(np.isneginf(lp)):
        estimate, infinite = math.inf, True
    else:
        estimate = math.nan
    return LDMEstimate(float(y), t, lp, ratios, floor_hit, mode, floor, estimate,
                       infinite, hits, n)


def estimate_curve(model: PairModel, f: RegVarFn, y_grid: Sequence[float], t: float,
                   mode: str = "quadrature", **kw) -> LDMCurve:
    """Finite-``t`` LDM curve on ``y_grid`` (source ``finite_t_estimate``)."""
    est = [ldm_estimate(model, f, float(y), [t], mode, **kw) for y in y_grid]
    vals = np.array([e.ratios[0] if not e.floor_hit[0] else math.inf for e in est])
    return LDMCurve(np.asarray(y_grid, float), vals, "finite_t_estimate", f.rho,
                    float(vals[0]), model.a_plus)
