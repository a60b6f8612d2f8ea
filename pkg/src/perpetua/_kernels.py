"""Compiled inner loops for the sequential recursion."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def recurse(a, b, x0):
    out = np.empty(a.size + 1)
    out[0] = x0
    x = x0
    for i in range(a.size):
        x = a[i] * x + b[i]
        out[i + 1] = x
    return out


@njit(cache=True, nogil=True)
def envelope_chunk(a, b, scale, x, n0, n_start, rmax, checkpoints, ck, out):
    """Advance one trajectory over a chunk, tracking ``max X_m / scale_m`` for ``m >= n_start``.

    ``scale[i]`` belongs to step ``n0 + i + 1``. The running maximum is
    written to ``out[ck]`` each time a checkpoint is passed.
    """
    for i in range(a.size):
        x = a[i] * x + b[i]
        n = n0 + i + 1
        if n >= n_start:
            r = x / scale[i]
            if r > rmax:
                rmax = r
        while ck < checkpoints.size and checkpoints[ck] == n:
            out[ck] = rmax
            ck += 1
    return x, rmax, ck
