"""Joint laws of nonnegative pairs ``(A, B)`` with ``A < 1`` almost surely.

Two families are provided:

* :class:`IndependentModel` -- ``A`` uniform, a point mass or a power law on
  ``[0, a_plus]``; ``B`` Weibull-type with survival ``exp(-(t/sigma)**rho)``
  (or a point mass, for degenerate checks).
* :class:`AtomSurvivalModel` -- an atom ``P(A=0, B=1) = 1 - 1/e`` plus a
  continuous part with joint survival ``exp(-alpha(a) * b**rho)`` for
  ``a in [0, 1)``, ``b >= 1``.

Probabilities of the event ``{A t y + B > t}`` are computed in log space so
that values far below the smallest double remain usable.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from ._optim import clustered_grid, grid_minimize
from .exceptions import InputError, PerpetuaError, UnsupportedQueryError
from .regvar import RegVarFn
from .rng import as_generator

ATOM_MASS = 1.0 - math.exp(-1.0)
LOG_ATOM_MASS = math.log(ATOM_MASS)


def _ret(x):
    x = np.asarray(x, dtype=float)
    return x[()] if x.ndim == 0 else x


# ---------------------------------------------------------------- alpha ----

@dataclass(frozen=True)
class AlphaFn:
    """Nondecreasing ``alpha: [0, 1) -> [1, inf)`` with ``alpha(0) = 1``."""

    variant: str
    rho: float | None = None
    knots: tuple = ()
    _spline: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.variant == "case_a":
            if self.rho is None or not self.rho > 1:
                raise InputError("case_a alpha(a) = (1-a)**(1-rho) needs rho > 1")
        elif self.variant == "case_b":
            pass
        elif self.variant == "table":
            k = np.asarray(self.knots, dtype=float).reshape(-1, 2)
            if k.shape[0] < 2:
                raise InputError("table alpha needs at least two knots")
            a, v = k[:, 0], k[:, 1]
            if a[0] != 0.0 or v[0] != 1.0:
                raise InputError("table alpha must start at (0, 1)")
            if np.any(np.diff(a) <= 0) or a[-1] >= 1:
                raise InputError("knot abscissae must increase strictly inside [0, 1)")
            if np.any(np.diff(v) < 0):
                raise InputError("knot values must be nondecreasing")
            object.__setattr__(self, "_spline", PchipInterpolator(a, v, extrapolate=False))
        else:
            raise InputError(f"unknown alpha variant {self.variant!r}")

    @classmethod
    def case_a(cls, rho: float) -> "AlphaFn":
        return cls("case_a", rho=rho)

    @classmethod
    def case_b(cls) -> "AlphaFn":
        return cls("case_b")

    @classmethod
    def table(cls, knots: Sequence[Sequence[float]]) -> "AlphaFn":
        return cls("table", knots=tuple(tuple(map(float, p)) for p in knots))

    # tabulated alpha beyond the last knot: alpha_m * (1 - a_m) / (1 - a)
    def _tail_params(self):
        a_m, v_m = self.knots[-1]
        return a_m, v_m

    def log(self, a):
        """``log alpha(a)``, finite for every ``a < 1``."""
        a = np.asarray(a, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.variant == "case_a":
                out = (self.rho - 1.0) * -np.log1p(-a)
            elif self.variant == "case_b":
                out = a / (1.0 - a)
            else:
                a_m, v_m = self._tail_params()
                inner = np.log(self._spline(np.clip(a, 0.0, a_m)))
                outer = math.log(v_m) + math.log1p(-a_m) - np.log1p(-a)
                out = np.where(a <= a_m, inner, outer)
        return _ret(out)

    def __call__(self, a):
        with np.errstate(over="ignore"):
            return _ret(np.exp(self.log(a)))

    def log_deriv(self, a):
        """``log alpha'(a)``; ``-inf`` where alpha is flat."""
        a = np.asarray(a, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.variant == "case_a":
                out = math.log(self.rho - 1.0) - self.rho * np.log1p(-a)
            elif self.variant == "case_b":
                out = a / (1.0 - a) - 2.0 * np.log1p(-a)
            else:
                a_m, v_m = self._tail_params()
                d = self._spline.derivative()(np.clip(a, 0.0, a_m))
                inner = np.log(np.maximum(d, 0.0))
                outer = math.log(v_m) + math.log1p(-a_m) - 2.0 * np.log1p(-a)
                out = np.where(a <= a_m, inner, outer)
        return _ret(out)

    def inverse(self, u):
        """Generalised inverse ``inf{a : alpha(a) >= u}`` for ``u >= 1``."""
        u = np.asarray(u, dtype=float)
        if np.any(u < 1.0):
            raise InputError("alpha takes values in [1, inf)")
        if self.variant == "case_a":
            out = -np.expm1(-np.log(u) / (self.rho - 1.0))
        elif self.variant == "case_b":
            v = np.log(u)
            out = v / (1.0 + v)
        else:
            target = np.log(u)
            lo = np.zeros(u.shape)
            hi = np.ones(u.shape)
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                below = self.log(mid) < target
                lo = np.where(below, mid, lo)
                hi = np.where(below, hi, mid)
                if np.max(hi - lo) < 1e-13:
                    break
            out = np.where(u <= 1.0, 0.0, hi)
        return _ret(out)

    def to_dict(self) -> dict:
        d = {"variant": self.variant}
        if self.variant == "table":
            d["knots"] = [list(p) for p in self.knots]
        return d

    @classmethod
    def from_dict(cls, d: dict, rho: float | None = None) -> "AlphaFn":
        variant = d["variant"]
        if variant == "case_a":
            return cls.case_a(float(d.get("rho", rho)))
        if variant == "case_b":
            return cls.case_b()
        return cls.table(d["knots"])


# ------------------------------------------------------- log quadrature ----

_CUT = 80.0


def _distance_to_level(logf, peak: float, edge: float, level: float) -> float:
    """Distance from ``peak`` towards ``edge`` at which ``logf`` first drops to ``level``.

    Bisection in log-distance; assumes ``logf`` is monotone on that side.
    """
    span = abs(edge - peak)
    if span == 0.0 or float(logf(edge)) > level:
        return span
    sgn = 1.0 if edge > peak else -1.0
    lo, hi = math.log(span) - 50.0, math.log(span)
    if float(logf(peak + sgn * math.exp(lo))) <= level:
        return math.exp(lo)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if float(logf(peak + sgn * math.exp(mid))) > level:
            lo = mid
        else:
            hi = mid
    return math.exp(hi)


def _log_quad(logf, lo: float, hi: float, peak: float | None = None) -> float:
    """``log of the integral of exp(logf)`` over ``[lo, hi]``, robust to underflow.

    The integrand is rescaled by its maximum and integrated only where it
    exceeds ``exp(-80)`` of that maximum; breakpoints at geometric multiples
    of the peak width let the adaptive rule resolve very narrow peaks.
    ``logf`` must accept arrays.
    """
    if hi <= lo:
        return -math.inf
    grid = clustered_grid(lo, hi, 2048)
    vals = np.asarray(logf(grid), dtype=float)
    vals = np.where(np.isnan(vals), -np.inf, vals)
    if peak is None:
        peak, neg = grid_minimize(lambda x: -np.asarray(logf(x), dtype=float), grid)
        lmax = -neg
    else:
        lmax = float(logf(peak))
    lmax = max(lmax, float(vals.max()))
    if not np.isfinite(lmax):
        return lmax
    level = lmax - _CUT
    keep = np.flatnonzero(vals > level)
    g_lo = grid[max(keep[0] - 1, 0)] if keep.size else peak
    g_hi = grid[min(keep[-1] + 1, grid.size - 1)] if keep.size else peak
    left = peak - _distance_to_level(logf, peak, lo, level)
    right = peak + _distance_to_level(logf, peak, hi, level)
    a, b = min(left, g_lo), max(right, g_hi)
    w = max(_distance_to_level(logf, peak, lo, lmax - 1.0) if peak > lo else 0.0,
            _distance_to_level(logf, peak, hi, lmax - 1.0) if peak < hi else 0.0)
    w = w if w > 0 else (b - a)
    pts = sorted({p for k in range(-3, 17) for p in (peak - w * 10.0 ** k, peak + w * 10.0 ** k)
                  if a < p < b} | ({peak} if a < peak < b else set()))

    def integrand(x):
        v = float(logf(x)) - lmax
        return math.exp(min(v, 0.0)) if v == v else 0.0

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(integrand, a, b, points=pts or None, limit=4000,
                                  epsabs=1e-14 * w, epsrel=1e-10)
    if err > 1e-4 * abs(val) + 1e-14 * w:
        raise PerpetuaError(f"quadrature did not converge (value {val:.3e}, error {err:.1e})")
    if val <= 0:
        return -math.inf
    return lmax + math.log(val)


def _logaddexp(*xs: float) -> float:
    xs = [x for x in xs if x > -math.inf]
    if not xs:
        return -math.inf
    m = max(xs)
    return m + math.log(sum(math.exp(x - m) for x in xs))


# ---------------------------------------------------------------- models ---

class PairModel:
    """Common surface of the supported pair laws."""

    kind: str

    @property
    def a_plus(self) -> float:
        raise NotImplementedError

    def sample(self, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def sample_pair(self, rng) -> tuple[float, float]:
        a, b = self.sample(1, rng)
        return float(a[0]), float(b[0])

    def joint_survival(self, a, b):
        raise UnsupportedQueryError(f"{self.kind} model has no closed-form survival")

    def log_event_prob(self, t: float, y: float) -> float:
        raise UnsupportedQueryError(f"{self.kind} model has no analytic event probability")

    def event_prob(self, t: float, y: float) -> float:
        """``P(A t y + B > t)``."""
        return math.exp(self.log_event_prob(t, y))

    def b_tail(self, t):
        """``-log P(B > t)``."""
        raise UnsupportedQueryError(f"{self.kind} model has no closed-form B tail")

    def ess_sup_ratio(self) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ALaw:
    law: str = "uniform"
    a_plus: float = 0.5
    power: float = 1.0

    def __post_init__(self):
        if self.law not in ("uniform", "point", "power"):
            raise InputError(f"unknown A law {self.law!r}")
        if self.law == "point":
            if not 0 <= self.a_plus < 1:
                raise InputError("point-mass A needs a_plus in [0, 1)")
        elif not 0 < self.a_plus < 1:
            raise InputError("A law needs a_plus in (0, 1)")
        if not self.power > 0:
            raise InputError("power-law exponent must be positive")

    def survival(self, a):
        a = np.asarray(a, dtype=float)
        if self.law == "point":
            return _ret((a < self.a_plus).astype(float))
        z = np.clip(a / self.a_plus, 0.0, 1.0)
        return _ret(1.0 - (z if self.law == "uniform" else z ** self.power))

    def log_density(self, a):
        a = np.asarray(a, dtype=float)
        k = 1.0 if self.law == "uniform" else self.power
        if k == 1.0:
            return np.full(a.shape, math.log(1.0 / self.a_plus))[()]
        with np.errstate(divide="ignore"):
            return math.log(k / self.a_plus) + (k - 1.0) * np.log(a / self.a_plus)

    def sample(self, n, rng):
        if self.law == "point":
            return np.full(n, self.a_plus)
        u = rng.random(n)
        if self.law == "uniform":
            return self.a_plus * u
        return self.a_plus * u ** (1.0 / self.power)


@dataclass(frozen=True)
class BLaw:
    law: str = "weibull"
    sigma: float = 1.0
    rho: float = 2.0
    value: float = 1.0

    def __post_init__(self):
        if self.law not in ("weibull", "point"):
            raise InputError(f"unknown B law {self.law!r}")
        if self.law == "weibull" and not (self.sigma > 0 and self.rho > 0):
            raise InputError("Weibull B needs sigma > 0 and rho > 0")
        if self.law == "point" and self.value < 0:
            raise InputError("B must be nonnegative")

    def log_survival(self, b):
        b = np.asarray(b, dtype=float)
        if self.law == "point":
            return _ret(np.where(b < self.value, 0.0, -np.inf))
        return _ret(-(np.maximum(b, 0.0) / self.sigma) ** self.rho)

    def sample(self, n, rng):
        if self.law == "point":
            return np.full(n, self.value)
        return self.sigma * rng.standard_exponential(n) ** (1.0 / self.rho)


@dataclass(frozen=True)
class IndependentModel(PairModel):
    A: ALaw = ALaw()
    B: BLaw = BLaw()
    kind: str = field(default="independent", init=False)

    @property
    def a_plus(self) -> float:
        return self.A.a_plus

    def sample(self, n, rng):
        rng = as_generator(rng)
        return self.A.sample(n, rng), self.B.sample(n, rng)

    def joint_survival(self, a, b):
        return _ret(np.asarray(self.A.survival(a)) * np.exp(self.B.log_survival(b)))

    def b_tail(self, t):
        return _ret(-np.asarray(self.B.log_survival(t)))

    def log_event_prob(self, t: float, y: float) -> float:
        if t <= 0 or y < 0:
            raise InputError("need t > 0 and y >= 0")
        A, B = self.A, self.B
        if y == 0 or A.a_plus == 0:
            return float(B.log_survival(t))
        if A.law == "point":
            return float(B.log_survival(t * (1.0 - y * A.a_plus)))
        if B.law == "point":
            # A t y > t - b0
            p = float(A.survival((t - B.value) / (t * y)))
            return math.log(p) if p > 0 else -math.inf
        cut = 1.0 / y
        hi = min(A.a_plus, cut)
        parts = []
        if cut < A.a_plus:
            parts.append(math.log(float(A.survival(cut))))

        def logf(a):
            return A.log_density(a) + B.log_survival(t * (1.0 - y * a))

        # integrand increases in a when A has nondecreasing density
        peak = hi if (A.law == "uniform" or A.power >= 1) else None
        parts.append(_log_quad(logf, 0.0, hi, peak))
        return _logaddexp(*parts)

    def ess_sup_ratio(self) -> float:
        if self.B.law == "weibull":
            return math.inf
        return self.B.value / (1.0 - self.A.a_plus)

    def to_dict(self) -> dict:
        a = {"law": self.A.law, "a_plus": self.A.a_plus}
        if self.A.law == "power":
            a["power"] = self.A.power
        b = ({"law": "weibull", "sigma": self.B.sigma, "rho": self.B.rho}
             if self.B.law == "weibull" else {"law": "point", "value": self.B.value})
        return {"kind": "independent", "A": a, "B": b}


def _solve_conditional(alpha: np.ndarray, logw: np.ndarray) -> np.ndarray:
    """Solve ``log1p(s) - alpha*s = logw`` for ``s = b**rho - 1 >= 0``.

    The left side is strictly decreasing in ``s`` when ``alpha >= 1``.
    """
    lo = np.zeros_like(alpha)
    hi = (1.0 - logw) / np.maximum(alpha - 1.0, 1e-300)
    hi = np.minimum(hi, 4.0 * (1.0 - logw) ** 2 + 4.0)
    for _ in range(200):
        short = np.log1p(hi) - alpha * hi > logw
        if not short.any():
            break
        hi = np.where(short, 2.0 * hi, hi)
    for it in range(200):
        mid = 0.5 * (lo + hi)
        above = np.log1p(mid) - alpha * mid > logw
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
        if np.all(hi - lo <= 4e-16 * (1.0 + hi)):
            return 0.5 * (lo + hi)
    raise PerpetuaError("conditional survival bisection did not converge")


@dataclass(frozen=True)
class AtomSurvivalModel(PairModel):
    rho: float
    alpha: AlphaFn
    kind: str = field(default="atom_survival", init=False)

    def __post_init__(self):
        if not self.rho > 0:
            raise InputError("rho must be positive")

    @property
    def a_plus(self) -> float:
        return 1.0

    def conditional_survival(self, b, a):
        """``P(B > b | A = a)`` on the continuous branch."""
        b = np.asarray(b, dtype=float)
        v = np.maximum(b, 1.0) ** self.rho
        with np.errstate(over="ignore", invalid="ignore"):
            out = v * np.exp(-np.asarray(self.alpha(a)) * (v - 1.0))
        return _ret(np.where(b < 1.0, 1.0, out))

    def sample(self, n, rng):
        rng = as_generator(rng)
        u = rng.random(n)
        w = 1.0 - rng.random(n)
        atom = u < ATOM_MASS
        a = np.zeros(n)
        b = np.ones(n)
        cont = ~atom
        m = int(cont.sum())
        if m:
            # 1 - u is uniform on (0, 1/e], so -log(1 - u) >= 1
            ac = self.alpha.inverse(-np.log1p(-u[cont]))
            al = np.asarray(self.alpha(ac), dtype=float).reshape(-1)
            s = _solve_conditional(al, np.log(w[cont]))
            a[cont] = ac
            b[cont] = np.power(1.0 + s, 1.0 / self.rho)
        return a, b

    def joint_survival(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if np.any((a < 0) | (a >= 1)):
            raise InputError("a must lie in [0, 1)")
        la = np.asarray(self.alpha.log(a))
        with np.errstate(over="ignore"):
            out = np.exp(-np.exp(la + self.rho * np.log(np.maximum(b, 1.0))))
        return _ret(np.where(b < 1.0, np.exp(-np.exp(la)), out))

    def b_tail(self, t):
        t = np.asarray(t, dtype=float)
        return _ret(np.where(t < 1.0, 0.0, np.maximum(t, 1.0) ** self.rho))

    def log_event_prob(self, t: float, y: float) -> float:
        if t <= 0 or y < 0:
            raise InputError("need t > 0 and y >= 0")
        atom = LOG_ATOM_MASS if t < 1.0 else -math.inf
        if t <= 1.0:
            # continuous branch has B > 1 >= t(1 - y a) almost surely
            return _logaddexp(atom, -1.0)
        if y == 0:
            return -(t ** self.rho)
        cut = (1.0 - 1.0 / t) / y
        hi = min(cut, 1.0)
        rho, al = self.rho, self.alpha

        def logf(a):
            a = np.asarray(a, dtype=float)
            with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                lb = math.log(t) + np.log1p(-y * a)
                out = al.log_deriv(a) + rho * lb - np.exp(al.log(a) + rho * lb)
            return np.where(np.isnan(out), -np.inf, out)

        parts = [atom, _log_quad(logf, 0.0, hi)]
        if cut < 1.0:
            parts.append(-float(al(cut)))
        return _logaddexp(*parts)

    def ess_sup_ratio(self) -> float:
        return math.inf

    def to_dict(self) -> dict:
        return {"kind": "atom_survival", "rho": self.rho, "alpha": self.alpha.to_dict()}


def model_from_dict(d: dict) -> PairModel:
    kind = d.get("kind")
    if kind == "independent":
        a = d.get("A", {})
        b = d.get("B", {})
        return IndependentModel(
            ALaw(law=a.get("law", "uniform"), a_plus=float(a.get("a_plus", 0.5)),
                 power=float(a.get("power", 1.0))),
            BLaw(law=b.get("law", "weibull"), sigma=float(b.get("sigma", 1.0)),
                 rho=float(b.get("rho", 2.0)), value=float(b.get("value", 1.0))))
    if kind == "atom_survival":
        rho = float(d["rho"])
        return AtomSurvivalModel(rho, AlphaFn.from_dict(d["alpha"], rho=rho))
    raise InputError(f"unknown model kind {kind!r}")


# ---------------------------------------------------------- ED sampler -----

def ed_quantile(f: RegVarFn, lam: float, u):
    """Inverse-transform map for the law with survival ``exp(-lam * f(t))``."""
    if not lam > 0:
        raise InputError("lambda must be positive")
    u = np.asarray(u, dtype=float)
    return f.inverse(-np.log(u) / lam)


def sample_ED(f: RegVarFn, lam: float, rng, n: int | None = None):
    """Draw from the law with ``P(Z > t) = exp(-lam * f(t))``."""
    rng = as_generator(rng)
    u = 1.0 - rng.random(1 if n is None else n)
    z = ed_quantile(f, lam, u)
    return float(z[0]) if n is None else z
