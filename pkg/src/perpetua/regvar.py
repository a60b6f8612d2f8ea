"""Regularly varying scale functions of power-log type.

``f(t) = scale * t**rho * (1 + log t)**log_exponent`` for ``t >= max(domain_floor, 1)``,
continued linearly to ``f(0) = 0`` below that point so that ``f`` is a
continuous increasing bijection of ``[0, inf)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import InputError

_LOG_TOL = 1e-13


@dataclass(frozen=True)
class RegVarFn:
    rho: float
    scale: float = 1.0
    log_exponent: float = 0.0
    domain_floor: float = 0.0

    def __post_init__(self):
        if not self.rho > 0:
            raise InputError(f"rho must be positive, got {self.rho}")
        if not self.scale > 0:
            raise InputError(f"scale must be positive, got {self.scale}")
        if self.domain_floor < 0:
            raise InputError("domain_floor must be nonnegative")
        # d/dt log f > 0 on [knot, inf) needs rho * (1 + log t) + beta > 0
        if self.rho * (1.0 + math.log(self.knot)) + self.log_exponent <= 0:
            raise InputError("log_exponent too negative for this domain_floor; "
                             "f would not be increasing")

    @property
    def knot(self) -> float:
        return max(self.domain_floor, 1.0)

    @property
    def f_knot(self) -> float:
        return self._power_log(self.knot)

    def _power_log(self, t):
        return self.scale * t ** self.rho * (1.0 + np.log(t)) ** self.log_exponent

    def __call__(self, t):
        return self.eval(t)

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise InputError("f is defined on [0, inf)")
        k = self.knot
        with np.errstate(divide="ignore", invalid="ignore"):
            upper = self._power_log(np.maximum(t, k))
        out = np.where(t >= k, upper, self.f_knot * t / k)
        return out[()] if out.ndim == 0 else out

    def log_eval(self, t):
        """``log f(t)`` without overflow, for ``t >= knot``."""
        t = np.asarray(t, dtype=float)
        return (math.log(self.scale) + self.rho * np.log(t)
                + self.log_exponent * np.log1p(np.log(t)))

    def inverse(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise InputError("inverse is defined on [0, inf)")
        k, fk = self.knot, self.f_knot
        lower = x * k / fk
        if self.log_exponent == 0.0:
            with np.errstate(divide="ignore"):
                upper = (np.maximum(x, fk) / self.scale) ** (1.0 / self.rho)
        else:
            upper = self._bisect_log(np.maximum(x, fk))
        out = np.where(x >= fk, upper, lower)
        return out[()] if out.ndim == 0 else out

    def _bisect_log(self, x: np.ndarray) -> np.ndarray:
        target = np.log(x)
        lo = np.full(x.shape, math.log(self.knot))
        # log f(t) >= log c + rho*log t - |beta|*log t for t >= 1; the bound
        # (log x - log c)/(rho - |beta|) fails when |beta| >= rho, so expand
        hi = np.maximum(lo + 1.0, (target - math.log(self.scale)) / self.rho + 1.0)
        for _ in range(200):
            short = self.log_eval(np.exp(hi)) < target
            if not short.any():
                break
            hi = np.where(short, 2.0 * hi + 1.0, hi)
        while np.max(hi - lo) > _LOG_TOL:
            mid = 0.5 * (lo + hi)
            below = self.log_eval(np.exp(mid)) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return np.exp(0.5 * (lo + hi))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RegVarFn":
        return cls(rho=float(d["rho"]), scale=float(d.get("scale", 1.0)),
                   log_exponent=float(d.get("log_exponent", 0.0)),
                   domain_floor=float(d.get("domain_floor", 0.0)))


@dataclass(frozen=True)
class PotterResult:
    ok: bool
    worst_pair: tuple[float, float]
    worst_excess: float


def potter_check(f: RegVarFn, C: float, delta: float, K: float,
                 grid: Iterable[Sequence[float]]) -> PotterResult:
    """Check ``f(y)/f(x) <= C * max((y/x)**(rho+delta), (y/x)**(rho-delta))`` on ``grid``.

    ``worst_excess`` is the largest value of lhs/rhs; the check passes iff it is <= 1.
    """
    pairs = np.asarray(list(grid), dtype=float)
    if pairs.size == 0:
        raise InputError("empty grid")
    if not C > 1:
        raise InputError("C must exceed 1")
    if delta < 0:
        raise InputError("delta must be nonnegative")
    pairs = pairs.reshape(-1, 2)
    if np.any(pairs < K):
        raise InputError("all grid points must be >= K")
    x, y = pairs[:, 0], pairs[:, 1]
    q = y / x
    lhs = np.exp(f.log_eval(y) - f.log_eval(x)) if K >= f.knot else f(y) / f(x)
    rhs = C * np.maximum(q ** (f.rho + delta), q ** (f.rho - delta))
    excess = lhs / rhs
    i = int(np.argmax(excess))
    return PotterResult(bool(excess[i] <= 1.0), (float(x[i]), float(y[i])), float(excess[i]))
