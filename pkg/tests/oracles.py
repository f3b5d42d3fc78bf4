"""Literal transcriptions of the stability formulas, used only as test oracles.

Deliberately unoptimised: nested loops straight from the definitions,
compiled with numba so the full oracle sweeps finish in seconds.
"""

import math

import numba
import numpy as np


@numba.njit(cache=True)
def _tdev_sq_literal(x, m):
    n = x.size
    terms = n - 3 * m + 1
    total = 0.0
    for j in range(terms):
        inner = 0
        for i in range(j, j + m):
            inner += x[i + 2 * m] - 2 * x[i + m] + x[i]
        total += float(inner) * float(inner)
    return total / (6.0 * m * m * terms)


def tdev_literal(samples_ps, m):
    """TDEV in seconds by the direct triple loop."""
    x = np.asarray(samples_ps, dtype=np.int64)
    return math.sqrt(_tdev_sq_literal(x, m)) * 1e-12


@numba.njit(cache=True)
def _mtie_all_literal(x):
    # Every window [k, k+n] is visited; extending the window one sample at a
    # time lets all n share the scan from a given start k.
    n_samples = x.size
    out = np.zeros(n_samples, dtype=np.int64)
    for k in range(n_samples):
        hi = x[k]
        lo = x[k]
        for i in range(k + 1, n_samples):
            if x[i] > hi:
                hi = x[i]
            if x[i] < lo:
                lo = x[i]
            n = i - k
            if hi - lo > out[n]:
                out[n] = hi - lo
    return out


def mtie_all_literal(samples_ps):
    """MTIE in seconds for every n = 1..N-1 (index n of the result)."""
    return _mtie_all_literal(np.asarray(samples_ps, dtype=np.int64)) * 1e-12


def mtie_literal(samples_ps, n):
    x = [int(v) for v in samples_ps]
    best = 0
    for k in range(len(x) - n):
        window = x[k:k + n + 1]
        best = max(best, max(window) - min(window))
    return best * 1e-12


@numba.njit(cache=True)
def _adev_sq_literal(x, m):
    n = x.size
    total = 0.0
    for i in range(n - 2 * m):
        d = float(x[i + 2 * m] - 2 * x[i + m] + x[i]) * 1e-12
        total += d * d
    return total / (2.0 * (n - 2 * m))


def adev_literal(samples_ps, m, tau0=1.0):
    x = np.asarray(samples_ps, dtype=np.int64)
    tau = m * tau0
    return math.sqrt(_adev_sq_literal(x, m)) / tau


def tdev_from_block_means(samples_ps, m):
    """TDEV via the averaged-phase form (mean of consecutive m-blocks).

    Algebraically identical to the double sum; a second cross-check with a
    different operation order.
    """
    x = np.asarray(samples_ps, dtype=float)
    n = x.size
    acc = 0.0
    count = n - 3 * m + 1
    for j in range(count):
        a = x[j:j + m].mean()
        b = x[j + m:j + 2 * m].mean()
        c = x[j + 2 * m:j + 3 * m].mean()
        acc += (c - 2 * b + a) ** 2
    return math.sqrt(acc / (6.0 * count)) * 1e-12
