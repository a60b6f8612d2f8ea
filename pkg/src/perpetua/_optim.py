"""Bracketed one-dimensional minimisation: dense grid scan plus golden section."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _clean(v):
    v = np.asarray(v, dtype=float)
    return np.where(np.isnan(v), np.inf, v)


def golden_section(fun: Callable[[float], float], lo: float, hi: float,
                   tol: float = 1e-9, maxiter: int = 300) -> tuple[float, float]:
    """Minimise a unimodal ``fun`` on ``[lo, hi]``.

    Returns ``(x, fun(x))`` for the best point seen, endpoints included.
    """
    a, b = float(lo), float(hi)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = float(_clean(fun(c))), float(_clean(fun(d)))
    it = 0
    while abs(b - a) > tol * max(1.0, abs(a) + abs(b)) and it < maxiter:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = float(_clean(fun(c)))
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = float(_clean(fun(d)))
        it += 1
    cands = [(fc, c), (fd, d)]
    for x in (lo, hi):
        cands.append((float(_clean(fun(x))), x))
    fx, x = min(cands, key=lambda p: (p[0], p[1]))
    return x, fx


def grid_minimize(fun_vec: Callable[[np.ndarray], np.ndarray], grid: np.ndarray,
                  fun: Callable[[float], float] | None = None,
                  tol: float = 1e-9) -> tuple[float, float]:
    """Minimise over a sorted ``grid`` then refine inside the bracketing cell.

    Ties on the grid resolve to the smallest abscissa.
    """
    grid = np.asarray(grid, dtype=float)
    vals = _clean(fun_vec(grid))
    i = int(np.argmin(vals))
    best = (float(vals[i]), float(grid[i]))
    if not np.isfinite(best[0]) or grid.size < 2:
        return best[1], best[0]
    if fun is None:
        def fun(x):
            return float(_clean(fun_vec(np.array([x])))[0])
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    x, fx = golden_section(fun, lo, hi, tol=tol)
    if fx < best[0]:
        return x, fx
    return best[1], best[0]


def clustered_grid(lo: float, hi: float, n: int = 2048, edge: float = 1e-12,
                   cluster_lo: bool = True, cluster_hi: bool = True) -> np.ndarray:
    """Uniform grid on ``[lo, hi]`` densified geometrically towards the ends."""
    parts = [np.linspace(lo, hi, n)]
    width = hi - lo
    k = max(8, int(round(-math.log10(edge))) * 4)
    offsets = width * np.geomspace(edge, 0.05, k)
    if cluster_lo:
        parts.append(lo + offsets)
    if cluster_hi:
        parts.append(hi - offsets)
    g = np.unique(np.concatenate(parts))
    return g[(g >= lo) & (g <= hi)]


def batch_grid_minimize(fun2: Callable[[np.ndarray, np.ndarray], np.ndarray],
                        params: np.ndarray, grid: np.ndarray,
                        tol: float = 1e-12, maxiter: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise ``min over x of fun2(p, x)`` for every ``p`` in ``params``.

    ``fun2`` must broadcast. The grid scan brackets each row's minimum and a
    vectorised golden-section pass refines all rows at once.
    """
    params = np.asarray(params, dtype=float).reshape(-1)
    grid = np.asarray(grid, dtype=float)
    vals = _clean(fun2(params[:, None], grid[None, :]))
    i = np.argmin(vals, axis=1)
    rows = np.arange(params.size)
    best_f = vals[rows, i]
    best_x = grid[i]
    lo = grid[np.maximum(i - 1, 0)]
    hi = grid[np.minimum(i + 1, grid.size - 1)]
    a, b = lo.copy(), hi.copy()
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = _clean(fun2(params, c)), _clean(fun2(params, d))
    for _ in range(maxiter):
        if np.all(np.abs(b - a) <= tol * np.maximum(1.0, np.abs(a) + np.abs(b))):
            break
        left = fc <= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        nc = np.where(left, b - INV_PHI * (b - a), d)
        nd = np.where(left, c, a + INV_PHI * (b - a))
        fnew = _clean(fun2(params, np.where(left, nc, nd)))
        fc, fd = np.where(left, fnew, fd), np.where(left, fc, fnew)
        c, d = nc, nd
    for x, fx in ((c, fc), (d, fd)):
        better = fx < best_f
        best_f = np.where(better, fx, best_f)
        best_x = np.where(better, x, best_x)
    return best_x, best_f
