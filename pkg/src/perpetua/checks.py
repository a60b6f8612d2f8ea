"""Sampler validation against closed forms (used by ``validate-model``)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import AtomSurvivalModel, IndependentModel, PairModel
from .rng import map_chunks


@dataclass
class Check:
    name: str
    value: float
    bound: float
    passed: bool


def default_grid(model: PairModel) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(model, AtomSurvivalModel):
        return np.array([0.0, 0.1, 0.3, 0.5, 0.7]), np.array([1.0, 1.1, 1.25, 1.5, 1.75])
    ap = model.a_plus
    return ap * np.array([0.0, 0.2, 0.4, 0.6, 0.8]), np.array([0.1, 0.5, 1.0, 1.5, 2.0])


def empirical_joint_survival(model: PairModel, a_grid, b_grid, n: int, seed: int = 0,
                             workers: int | None = None) -> np.ndarray:
    a_grid, b_grid = np.asarray(a_grid, float), np.asarray(b_grid, float)

    def count(m, rng):
        a, b = model.sample(m, rng)
        out = np.empty((a_grid.size, b_grid.size), dtype=np.int64)
        for i, av in enumerate(a_grid):
            sel = b[a > av]
            sel.sort()
            out[i] = sel.size - np.searchsorted(sel, b_grid, side="right")
        return out

    return np.sum(map_chunks(count, n, seed, workers), axis=0) / n


def joint_survival_check(model: PairModel, n: int, seed: int = 0, sigmas: float = 4.0,
                         a_grid=None, b_grid=None, workers: int | None = None) -> Check:
    """Largest ``|p_hat - p| / se`` over the grid, compared with ``sigmas``."""
    ga, gb = default_grid(model)
    a_grid = ga if a_grid is None else np.asarray(a_grid, float)
    b_grid = gb if b_grid is None else np.asarray(b_grid, float)
    emp = empirical_joint_survival(model, a_grid, b_grid, n, seed, workers)
    exact = np.asarray(model.joint_survival(a_grid[:, None], b_grid[None, :]), dtype=float)
    se = np.sqrt(exact * (1 - exact) / n)
    z = np.abs(emp - exact) / np.where(se > 0, se, np.inf)
    worst = float(np.max(z))
    return Check("joint_survival_z", worst, sigmas, worst <= sigmas)


def b_marginal_check(model: PairModel, n: int, seed: int = 0, sigmas: float = 4.0,
                     min_prob: float = 1e-4) -> Check:
    """Empirical ``P(B > b)`` against ``exp(-b_tail(b))`` where ``P >= min_prob``."""
    b = np.linspace(0.0, 6.0, 121)
    p = np.exp(-np.asarray(model.b_tail(b), dtype=float))
    b = b[(p >= min_prob) & (p < 1.0)]

    def count(m, rng):
        x = np.sort(model.sample(m, rng)[1])
        return x.size - np.searchsorted(x, b, side="right")

    emp = np.sum(map_chunks(count, n, seed + 1), axis=0) / n
    exact = np.exp(-np.asarray(model.b_tail(b), dtype=float))
    z = np.abs(emp - exact) / np.sqrt(exact * (1 - exact) / n)
    worst = float(np.max(z)) if z.size else 0.0
    return Check("b_marginal_z", worst, sigmas, worst <= sigmas)


def conditional_formula_check(model: AtomSurvivalModel, tol: float = 1e-6, h: float = 1e-6) -> Check:
    """``P(B > b | A = a)`` versus the ratio of a-derivatives of the joint survival."""
    worst = 0.0
    for a in (0.05, 0.2, 0.4, 0.6, 0.8):
        for b in (1.0, 1.05, 1.2, 1.5, 2.0):
            num = (model.joint_survival(a - h, b) - model.joint_survival(a + h, b)) / (2 * h)
            den = (model.joint_survival(a - h, 1.0) - model.joint_survival(a + h, 1.0)) / (2 * h)
            worst = max(worst, abs(num / den - float(model.conditional_survival(b, a))))
    return Check("conditional_survival_fd", worst, tol, worst <= tol)


def pqd_gap(model: PairModel, a_grid=None, b_grid=None) -> float:
    """``min over the grid of P(A>a, B>b) - P(A>a) P(B>b)``; negative means not PQD."""
    ga, gb = default_grid(model)
    a_grid = np.asarray(ga if a_grid is None else a_grid, float)
    b_grid = np.asarray(gb if b_grid is None else b_grid, float)
    joint = np.asarray(model.joint_survival(a_grid[:, None], b_grid[None, :]), dtype=float)
    pa = np.asarray(model.joint_survival(a_grid, 0.0), dtype=float)
    pb = np.exp(-np.asarray(model.b_tail(b_grid), dtype=float))
    return float(np.min(joint - pa[:, None] * pb[None, :]))


def validate_model(model: PairModel, n: int, seed: int = 0, workers: int | None = None) -> list[Check]:
    checks = [joint_survival_check(model, n, seed, workers=workers),
              b_marginal_check(model, n, seed)]
    gap = pqd_gap(model)
    if isinstance(model, AtomSurvivalModel):
        checks.append(conditional_formula_check(model))
        # the atom family is never PQD: some grid point must violate the inequality
        checks.append(Check("pqd_violated", gap, 0.0, gap < 0))
    elif isinstance(model, IndependentModel):
        checks.append(Check("pqd_factorization", abs(gap), 1e-15, abs(gap) <= 1e-15))
    return checks
