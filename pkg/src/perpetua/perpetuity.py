"""Simulation of ``X_n = A_n X_{n-1} + B_n`` and of its stationary law.

Tail probabilities use independent replications (series draws or burned-in
chains); the upper envelope uses long single trajectories started at 0.
Probabilities supported by fewer than 10 hits are flagged, never
extrapolated.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from ._validation import check_increasing, check_samples
from .exceptions import InputError, PerpetuaError, PreconditionError, UnsupportedQueryError
from .ldm import closed_form_ldm
from .legendre import lambda_star as _lambda_star, phi as _phi
from .models import PairModel, sample_ED
from .regvar import RegVarFn
from .rng import CHUNK, as_generator, default_workers, map_chunks, stream

MIN_HITS = 10
MAX_TERMS = 10**6


def iterate(model: PairModel, n: int, x0: float = 0.0, rng=None, streaming: bool = False):
    """Trajectory ``(X_0, ..., X_n)``; with ``streaming=True`` only ``X_n`` is kept."""
    if n < 0 or x0 < 0:
        raise InputError("need n >= 0 and x0 >= 0")
    rng = as_generator(rng)
    if not streaming:
        a, b = model.sample(n, rng)
        return _kernels.recurse(a, b, float(x0))
    x, done = float(x0), 0
    while done < n:
        m = min(CHUNK, n - done)
        a, b = model.sample(m, rng)
        x = float(_kernels.recurse(a, b, x)[-1])
        done += m
    return x


def _series(model: PairModel, m: int, trunc_tol: float, rng) -> np.ndarray:
    x = np.zeros(m)
    prod = np.ones(m)
    active = np.arange(m)
    terms = 0
    while active.size:
        a, b = model.sample(active.size, rng)
        x[active] += prod[active] * b
        prod[active] *= a
        active = active[prod[active] >= trunc_tol]
        terms += 1
        if terms > MAX_TERMS:
            raise PerpetuaError("product of A did not fall below trunc_tol within 1e6 factors")
    return x


def sample_stationary(model: PairModel, trunc_tol: float = 1e-16, rng=None, n: int | None = None):
    """Draw(s) of ``sum_k B_k prod_{j<k} A_j``, truncated once the product drops below ``trunc_tol``.

    The truncation error of each draw is at most ``truncation_bias_bound``.
    """
    if not 0 < trunc_tol < 1:
        raise InputError("trunc_tol must lie in (0, 1)")
    rng = as_generator(rng)
    x = _series(model, 1 if n is None else n, trunc_tol, rng)
    return float(x[0]) if n is None else x


def truncation_bias_bound(model: PairModel, trunc_tol: float) -> float:
    """``trunc_tol * ess sup B/(1-A)``; infinite (no a.s. bound) for unbounded ``B``."""
    r = model.ess_sup_ratio()
    return trunc_tol * r if math.isfinite(r) else math.inf


@dataclass
class TailEstimate:
    t_grid: np.ndarray
    hits: np.ndarray
    n_samples: int
    prob_estimates: np.ndarray
    ratios: np.ndarray
    floor_hit: np.ndarray
    method: str
    predicted: float | None = None

    @property
    def resolvable(self) -> np.ndarray:
        return np.flatnonzero(~self.floor_hit)

    @property
    def last_resolvable(self) -> tuple[float, float] | None:
        ok = self.resolvable
        if not ok.size:
            return None
        return float(self.t_grid[ok[-1]]), float(self.ratios[ok[-1]])

    def stderr(self) -> np.ndarray:
        p = self.prob_estimates
        return np.sqrt(p * (1 - p) / self.n_samples)

    def rows(self):
        for t, h, p, r in zip(self.t_grid, self.hits, self.prob_estimates, self.ratios):
            yield {"t": float(t), "hits": int(h), "n": self.n_samples, "prob": float(p), "ratio": float(r)}


def _tail_from_hits(t, hits, n, f, method, predicted=None) -> TailEstimate:
    p = hits / n
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = -np.log(p) / np.asarray(f(t), dtype=float)
    return TailEstimate(t, hits.astype(np.int64), n, p, ratios, hits < MIN_HITS, method, predicted)


def predicted_lambda_star(model: PairModel, f: RegVarFn) -> float | None:
    try:
        return _lambda_star(closed_form_ldm(model, f))[0]
    except UnsupportedQueryError:
        return None


def tail_log_estimate(model: PairModel, f: RegVarFn, t_grid: Sequence[float], n_samples: int,
                      method: str = "series", burnin: int = 1000, trunc_tol: float = 1e-16,
                      seed: int = 0, workers: int | None = None) -> TailEstimate:
    """Empirical ``-log P(X > t) / f(t)`` from independent draws of the stationary law."""
    t = check_increasing(t_grid, "t_grid", strict=True)
    n = check_samples(n_samples, minimum=1)
    if method == "series":
        def draw(m, rng):
            return _series(model, m, trunc_tol, rng)
    elif method == "recursion_burnin":
        def draw(m, rng):
            x = np.zeros(m)
            for _ in range(burnin):
                a, b = model.sample(m, rng)
                x = a * x + b
            return x
    else:
        raise InputError(f"unknown method {method!r}")

    def count(m, rng):
        x = draw(m, rng)
        return np.count_nonzero(x[:, None] > t[None, :], axis=0) if m * t.size <= 2**26 else \
            np.array([np.count_nonzero(x > ti) for ti in t])

    hits = np.sum(map_chunks(count, n, seed, workers), axis=0)
    return _tail_from_hits(t, hits, n, f, method, predicted_lambda_star(model, f))


@dataclass
class EnvelopeReport:
    N: int
    n_traj: int
    n_start: int
    checkpoints: np.ndarray
    running_max_ratio: np.ndarray  # (n_traj, n_checkpoints)
    predicted_limit: float
    lambda_star: float
    final_ratios: np.ndarray = field(init=False)

    def __post_init__(self):
        self.final_ratios = self.running_max_ratio[:, -1]

    @property
    def median_final(self) -> float:
        return float(np.median(self.final_ratios))

    def nondecreasing(self) -> bool:
        return bool(np.all(np.diff(self.running_max_ratio, axis=1) >= 0))

    def rows(self):
        for j in range(self.n_traj):
            for n, r in zip(self.checkpoints, self.running_max_ratio[j]):
                yield {"trajectory": j, "n": int(n), "ratio": float(r)}


def default_checkpoints(N: int, n_start: int = 3) -> np.ndarray:
    k = np.arange(0, int(math.log(max(N, 2)) / math.log(1.5)) + 2)
    c = np.unique(np.ceil(1.5 ** k).astype(np.int64))
    c = c[(c >= n_start) & (c <= N)]
    return np.unique(np.append(c, N))


def envelope(model: PairModel, f: RegVarFn, lambda_star: float, N: int, n_traj: int,
             checkpoints: Sequence[int] | None = None, n_start: int = 3, seed: int = 0,
             workers: int | None = None) -> EnvelopeReport:
    """Running ``max_{n_start <= m <= n} X_m / f^{-1}(log m)`` along trajectories from ``X_0 = 0``.

    The almost-sure limsup is ``lambda_star**(-1/rho)``. Early steps carry a
    transient (``f^{-1}(log m)`` is tiny for small ``m``), so a later
    ``n_start`` gives a cleaner finite-horizon proxy of the limsup.
    """
    if not (lambda_star > 0 and math.isfinite(lambda_star)):
        raise PreconditionError("envelope needs lambda_star in (0, inf)")
    if N < 3 or n_traj < 1:
        raise InputError("need N >= 3 and n_traj >= 1")
    n_start = max(int(n_start), 3)
    if n_start > N:
        raise InputError("n_start exceeds the horizon")
    ck = (default_checkpoints(N, n_start) if checkpoints is None
          else np.unique(np.asarray(checkpoints, dtype=np.int64)))
    if ck.size == 0 or ck[0] < n_start or ck[-1] > N:
        raise InputError("checkpoints must lie in [n_start, N]")

    def run(j):
        rng = stream(seed, j)
        out = np.full(ck.size, np.nan)
        x, rmax, pos, done = 0.0, 0.0, 0, 0
        while done < N:
            m = min(CHUNK, N - done)
            a, b = model.sample(m, rng)
            steps = np.arange(done + 1, done + m + 1, dtype=float)
            scale = np.asarray(f.inverse(np.log(steps)), dtype=float)
            x, rmax, pos = _kernels.envelope_chunk(a, b, scale, x, done, n_start, rmax, ck, pos, out)
            done += m
        return out

    workers = workers or default_workers()
    if workers > 1 and n_traj > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, range(n_traj)))
    else:
        rows = [run(j) for j in range(n_traj)]
    return EnvelopeReport(int(N), int(n_traj), n_start, ck, np.vstack(rows),
                          lambda_star ** (-1.0 / f.rho), float(lambda_star))


def one_step_tail(model: PairModel, f: RegVarFn, lam: float, t_grid: Sequence[float],
                  n_samples: int, seed: int = 0, workers: int | None = None) -> TailEstimate:
    """Empirical ratios for ``A Z + B`` with ``Z`` independent, ``P(Z > t) = exp(-lam f(t))``.

    ``predicted`` holds ``phi(lam)`` when the model has a closed-form LDM.
    """
    if lam < 0:
        raise InputError("lambda must be nonnegative")
    t = check_increasing(t_grid, "t_grid", strict=True)
    n = check_samples(n_samples, minimum=1)

    def count(m, rng):
        a, b = model.sample(m, rng)
        if lam == 0:
            x = np.where(a > 0, np.inf, b)
        else:
            x = a * sample_ED(f, lam, rng, m) + b
        return np.array([np.count_nonzero(x > ti) for ti in t])

    hits = np.sum(map_chunks(count, n, seed, workers), axis=0)
    try:
        predicted = _phi(closed_form_ldm(model, f), lam)[0]
    except UnsupportedQueryError:
        predicted = None
    return _tail_from_hits(t, hits, n, f, "one_step", predicted)


@dataclass
class MonotonicityReport:
    t_grid: np.ndarray
    n_list: list
    survival: np.ndarray  # rows follow n_list, last row is the stationary law
    n_samples: int
    violations: list
    passed: bool


def stochastic_monotonicity_check(model: PairModel, n_list: Sequence[int], n_samples: int,
                                  t_grid: Sequence[float], seed: int = 0, sigmas: float = 4.0,
                                  trunc_tol: float = 1e-16) -> MonotonicityReport:
    """Tails of ``X_n`` (from ``X_0 = 0``) must grow with ``n`` and stay below the stationary tail.

    Each law is estimated from its own independent draws; comparisons allow
    ``sigmas`` binomial standard errors.
    """
    ns = sorted(int(k) for k in n_list)
    if ns[0] < 0:
        raise InputError("n_list must be nonnegative")
    t = check_increasing(t_grid, "t_grid", strict=False)
    n = check_samples(n_samples)
    rows = []
    for i, k in enumerate(ns):
        rng = stream(seed, i)
        x = np.zeros(n)
        for _ in range(k):
            a, b = model.sample(n, rng)
            x = a * x + b
        rows.append([np.count_nonzero(x > ti) / n for ti in t])
    xs = sample_stationary(model, trunc_tol, stream(seed, len(ns)), n)
    rows.append([np.count_nonzero(xs > ti) / n for ti in t])
    surv = np.asarray(rows)
    se = np.sqrt(surv * (1 - surv) / n)
    violations = []
    labels = [f"X_{k}" for k in ns] + ["X"]
    pairs = [(i, i + 1) for i in range(len(ns))] + [(i, len(ns)) for i in range(len(ns) - 1)]
    for lo, hi in pairs:
        slack = sigmas * np.sqrt(se[lo] ** 2 + se[hi] ** 2)
        bad = np.flatnonzero(surv[hi] < surv[lo] - slack)
        for j in bad:
            violations.append((labels[lo], labels[hi], float(t[j]), float(surv[lo, j] - surv[hi, j])))
    return MonotonicityReport(t, ns, surv, n, violations, not violations)
