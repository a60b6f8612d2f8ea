"""Argument checks shared by the numerical routines and estimators."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import InputError


def check_increasing(x, name: str = "grid", strict: bool = True) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise InputError(f"{name} must be a nonempty 1-d sequence")
    if not np.all(np.isfinite(x)):
        raise InputError(f"{name} must be finite")
    d = np.diff(x)
    if np.any(d <= 0) if strict else np.any(d < 0):
        raise InputError(f"{name} must be {'strictly ' if strict else ''}increasing")
    return x


def check_positive(value, name: str, allow_zero: bool = False) -> float:
    if not isinstance(value, numbers.Real):
        raise InputError(f"{name} must be a real number")
    ok = value >= 0 if allow_zero else value > 0
    if not ok:
        raise InputError(f"{name} must be {'nonnegative' if allow_zero else 'positive'}")
    return float(value)


def check_samples(n, name: str = "n_samples", minimum: int = 1) -> int:
    if not isinstance(n, numbers.Integral) or n < minimum:
        raise InputError(f"{name} must be an integer >= {minimum}")
    return int(n)
