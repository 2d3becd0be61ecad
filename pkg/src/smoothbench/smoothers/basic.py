"""Moving-average and running-median smoothers (SMA, RRM, TUK)."""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import SeriesTooShort
from .windows import clipped_bounds

RRM_MAX_PASSES = 50


def simple_moving_average(y: np.ndarray, window: int) -> np.ndarray:
    """Centered mean over a window truncated at the series boundaries."""
    n = len(y)
    lo, hi = clipped_bounds(n, window)
    csum = np.concatenate(([0.0], np.cumsum(y)))
    return (csum[hi] - csum[lo]) / (hi - lo)


def sma_operator(n: int, window: int) -> np.ndarray:
    """Dense smoother matrix of the truncated-window moving average."""
    lo, hi = clipped_bounds(n, window)
    out = np.zeros((n, n))
    for i in range(n):
        out[i, lo[i] : hi[i]] = 1.0 / (hi[i] - lo[i])
    return out


def _running_median(y: np.ndarray, window: int) -> np.ndarray:
    n = len(y)
    h = window // 2
    out = np.empty(n)
    if n >= window:
        out[h : n - h] = np.median(sliding_window_view(y, window), axis=1)
    for i in range(min(h, n)):
        out[i] = np.median(y[: min(n, i + h + 1)])
    for i in range(max(h, n - h), n):
        out[i] = np.median(y[max(0, i - h) :])
    return out


def repeated_running_median(y: np.ndarray, window: int) -> np.ndarray:
    """Running median re-applied until the series stops changing (capped)."""
    cur = np.asarray(y, dtype=float).copy()
    for _ in range(RRM_MAX_PASSES):
        nxt = _running_median(cur, window)
        if np.array_equal(nxt, cur):
            break
        cur = nxt
    return cur


def tukey_3r(y: np.ndarray) -> np.ndarray:
    """Running medians of three, endpoints copied, iterated to a fixpoint."""
    n = len(y)
    if n < 3:
        raise SeriesTooShort(f"Tukey 3R needs at least 3 points, got {n}")
    cur = np.asarray(y, dtype=float).copy()
    # medians of 3 reach a fixpoint in at most ~n passes; cap defensively
    for _ in range(max(n, 8)):
        nxt = cur.copy()
        nxt[1:-1] = np.median(sliding_window_view(cur, 3), axis=1)
        if np.array_equal(nxt, cur):
            break
        cur = nxt
    return cur
