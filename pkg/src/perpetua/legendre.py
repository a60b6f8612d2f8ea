"""The transform ``phi(lam) = inf_{y>0} {lam * y**rho + g(y)}`` and its fixed point.

``lambda_star = inf_{0<y<1} g(y) / (1 - y**rho)`` is the unique nonzero fixed
point of ``phi`` for admissible ``g`` and the logarithmic tail exponent of the
perpetuity.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ._optim import clustered_grid, grid_minimize
from ._validation import check_increasing
from .exceptions import InputError, PropertyFailure
from .ldm import LDM, PQDLDM

GRID_SIZE = 4096
Y_FLOOR = 1e-12
GOLDEN_TOL = 1e-9
FIXED_POINT_TOL = 1e-6


def _values(g: LDM, y):
    return np.asarray(g(np.asarray(y, dtype=float)), dtype=float)


def _near(points, lo, hi):
    out = []
    for p in points:
        for q in (np.nextafter(p, -np.inf), p, np.nextafter(p, np.inf)):
            if lo <= q <= hi:
                out.append(q)
    return out


def phi(g: LDM, lam: float, rho: float | None = None) -> tuple[float, float]:
    """``(phi(lam), argmin y)``; argmin 0 stands for the limit ``y -> 0+``.

    The search runs over ``(0, Y_max]`` with ``Y_max = max(2/a_plus, last
    grid node)``: ``g`` vanishes above ``1/a_plus``, so nothing beyond can
    improve the infimum.
    """
    if lam < 0:
        raise InputError("lambda must be nonnegative")
    rho = g.rho if rho is None else rho
    y_max = max(2.0 / g.a_plus, g.y_end)

    def obj(y):
        y = np.asarray(y, dtype=float)
        v = _values(g, y)
        return v + (lam * y ** rho if lam > 0 else 0.0)

    grid = clustered_grid(Y_FLOOR, y_max, GRID_SIZE, edge=1e-12)
    extra = _near(g.breakpoints, Y_FLOOR, y_max)
    if extra:
        grid = np.unique(np.concatenate([grid, extra]))
    y, v = grid_minimize(obj, grid, tol=GOLDEN_TOL)
    # lim_{y->0+} (lam y**rho + g(y)) = g(0+)
    v0 = float(_values(g, Y_FLOOR * 1e-3))
    if v0 <= v:
        return v0, 0.0
    return float(v), float(y)


def phi_pqd_closed(gamma: float, a_plus: float, rho: float, lam: float) -> float:
    if lam < 0 or gamma < 0 or not 0 < a_plus <= 1:
        raise InputError("need lam >= 0, gamma >= 0, a_plus in (0, 1]")
    if lam == 0 or gamma == 0:
        return 0.0
    if rho <= 1:
        return min(gamma, lam * a_plus ** (-rho))
    p = 1.0 / (rho - 1.0)
    return (gamma ** (-p) + a_plus ** (rho * p) * lam ** (-p)) ** (-(rho - 1.0))


def lambda_star(g: LDM, rho: float | None = None) -> tuple[float, float]:
    """``(lambda_star, argmin y)``; an argmin of 0 means the limit ``y -> 0+``."""
    rho = g.rho if rho is None else rho
    if math.isinf(g.gamma0) and math.isinf(float(_values(g, Y_FLOOR * 1e-3))):
        return math.inf, 0.0

    def obj(y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return _values(g, y) / -np.expm1(rho * np.log(y))

    grid = clustered_grid(1e-15, 1.0 - 1e-15, GRID_SIZE, edge=1e-14)
    extra = _near([b for b in g.breakpoints if 0 < b < 1], 1e-15, 1.0 - 1e-15)
    if extra:
        grid = np.unique(np.concatenate([grid, extra]))
    y, v = grid_minimize(obj, grid, tol=GOLDEN_TOL)
    v0 = float(_values(g, Y_FLOOR * 1e-3))
    if v0 <= v:
        return v0, 0.0
    return float(v), float(y)


def lambda_star_pqd_closed(gamma: float, a_plus: float, rho: float) -> float:
    if rho <= 1:
        return float(gamma)
    return gamma * (1.0 - a_plus ** (rho / (rho - 1.0))) ** (rho - 1.0)


def admissibility(g: LDM, rho: float | None = None, margin: float = 1e-9,
                  lam_grid: Sequence[float] | None = None) -> tuple[bool, float | None]:
    """``(admissible, witness)``: witness maximises ``phi(lam) - lam`` on the search grid."""
    if g.gamma0 == 0:
        return True, None
    lams = np.geomspace(1e-6, 1e6, 121) if lam_grid is None else np.asarray(lam_grid, float)
    gaps = np.array([phi(g, float(l), rho)[0] - l for l in lams])
    i = int(np.argmax(gaps))
    if gaps[i] > margin:
        return True, float(lams[i])
    return False, None


@dataclass
class FixedPointReport:
    lambda_star: float
    phi_at_lambda_star: float
    residual: float
    below: list = field(default_factory=list)
    above: list = field(default_factory=list)
    passed: bool = True
    worst: tuple | None = None


def fixed_point_check(g: LDM, rho: float | None = None, tol: float = FIXED_POINT_TOL,
                      n_grid: int = 20, raise_on_failure: bool = False) -> FixedPointReport:
    """``phi(lambda_star) = lambda_star``, ``phi(c) >= c`` below and ``phi(c) < c`` above."""
    ls, _ = lambda_star(g, rho)
    if not math.isfinite(ls):
        raise InputError("fixed_point_check needs a finite lambda_star")
    p_star = phi(g, ls, rho)[0]
    rep = FixedPointReport(ls, p_star, abs(p_star - ls))
    if ls > 0:
        ks = np.arange(1, n_grid + 1)
        for c in ls * ks / (n_grid + 1):
            rep.below.append((float(c), phi(g, float(c), rho)[0]))
        for c in ls * (1.0 + ks / n_grid):
            rep.above.append((float(c), phi(g, float(c), rho)[0]))
    # slack covers the y -> 0+ limit candidate, which may sit below the true infimum by rounding
    bad = [(c, p, c - p) for c, p in rep.below if p < c - 1e-9]
    bad += [(c, p, p - c) for c, p in rep.above if not p < c]
    if rep.residual > tol:
        bad.append((ls, p_star, rep.residual))
    if bad:
        rep.passed = False
        rep.worst = max(bad, key=lambda r: r[2])
        if raise_on_failure:
            raise PropertyFailure("fixed-point property violated", rep.worst)
    return rep


@dataclass
class TransformReport:
    lambda_grid: np.ndarray
    phi_values: np.ndarray
    argmin_y: np.ndarray
    lambda_star: float
    lambda_star_argmin: float
    admissible: bool
    fixed_point_residual: float
    witness_lambda: float | None = None

    def check_invariants(self, tol: float = 1e-7) -> dict[str, bool]:
        lam, v = self.lambda_grid, self.phi_values
        out = {"nondecreasing": bool(np.all(np.diff(v) >= -tol))}
        if lam.size >= 3:
            s = np.diff(v) / np.diff(lam)
            out["concave"] = bool(np.all(np.diff(s) <= tol * np.maximum(1.0, np.abs(s[:-1]))))
        if lam[0] == 0:
            out["phi_zero_at_zero"] = bool(v[0] == 0)
        if math.isfinite(self.lambda_star):
            out["fixed_point"] = bool(self.fixed_point_residual <= FIXED_POINT_TOL)
        return out

    def summary(self) -> dict:
        return {"lambda_star": self.lambda_star, "argmin": self.lambda_star_argmin,
                "admissible": self.admissible, "residual": self.fixed_point_residual,
                "witness_lambda": self.witness_lambda}

    def rows(self):
        for l, p, y in zip(self.lambda_grid, self.phi_values, self.argmin_y):
            yield {"lambda": float(l), "phi": float(p), "argmin_y": float(y)}


def transform_report(g: LDM, lambda_grid: Sequence[float], rho: float | None = None) -> TransformReport:
    lam = check_increasing(lambda_grid, "lambda_grid", strict=True)
    if lam[0] < 0:
        raise InputError("lambda_grid must be nonnegative")
    vals = [phi(g, float(l), rho) for l in lam]
    ls, arg = lambda_star(g, rho)
    resid = abs(phi(g, ls, rho)[0] - ls) if math.isfinite(ls) else math.nan
    adm, wit = admissibility(g, rho)
    return TransformReport(lam, np.array([v for v, _ in vals]), np.array([y for _, y in vals]),
                           ls, arg, adm, resid, wit)


def pqd_phi_lower_bound(gamma: float, a_plus: float, rho: float, lam: float) -> float:
    """Lower envelope of ``phi`` valid for any LDM with ``g(0) = gamma``."""
    return phi_pqd_closed(gamma, a_plus, rho, lam)
