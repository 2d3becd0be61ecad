"""Savitzky-Golay filtering, fixed degree (SGF) and adaptive degree (ADP).

Interior points use the classic convolution form: the center row of the
least-squares projection is precomputed once per (window, degree) and slid
across the series.  Boundary points are refit on the truncated asymmetric
window, with the degree clamped to what the window can determine.

The adaptive variant chooses each point's degree inside [min_degree,
max_degree] by a forward F-test on the residual drop of successive degrees.
When the one-step test fails it probes two degrees ahead before stopping:
on symmetric windows the even and odd polynomial terms decouple, so a
single-step test alone would miss e.g. the quadratic term at a local
extremum.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.stats import f as f_dist

from .windows import batched_local_polyfit, polyfit_window

F_TEST_ALPHA = 0.05
_SSE_TINY = 1e-280


@lru_cache(maxsize=256)
def _sg_center_coefficients(window: int, degree: int) -> np.ndarray:
    """Center row of the SG projection matrix for a full window."""
    half = window // 2
    offsets = (np.arange(window) - half) / max(1, half)
    design = offsets[:, None] ** np.arange(degree + 1)[None, :]
    return np.linalg.pinv(design)[0]


@lru_cache(maxsize=128)
def _f_critical(num_dof: int, dof2: int) -> float:
    return float(f_dist.ppf(1.0 - F_TEST_ALPHA, num_dof, dof2))


def savitzky_golay(y: np.ndarray, window: int, degree: int) -> np.ndarray:
    n = len(y)
    half = window // 2
    out = np.empty(n)
    coeffs = _sg_center_coefficients(window, degree)
    out[half : n - half] = np.correlate(y, coeffs, mode="valid")
    for i in range(half):
        for j in (i, n - 1 - i):
            lo, hi = max(0, j - half), min(n, j + half + 1)
            out[j], _ = polyfit_window(y[lo:hi], np.arange(lo, hi) - j, degree)
    return out


def _edge_row(offsets: np.ndarray, degree: int) -> np.ndarray:
    """Fit weights of the truncated-window polynomial value at offset zero."""
    m = len(offsets)
    deg = min(degree, m - 1)
    scale = max(1.0, float(np.abs(offsets).max()))
    design = (offsets / scale)[:, None] ** np.arange(deg + 1)[None, :]
    return np.linalg.pinv(design)[0]


def savgol_operator(n: int, window: int, degree: int) -> np.ndarray:
    """Dense smoother matrix matching :func:`savitzky_golay`."""
    half = window // 2
    out = np.zeros((n, n))
    coeffs = _sg_center_coefficients(window, degree)
    for i in range(half, n - half):
        out[i, i - half : i + half + 1] = coeffs
    for i in range(half):
        for j in (i, n - 1 - i):
            lo, hi = max(0, j - half), min(n, j + half + 1)
            out[j, lo:hi] = _edge_row(np.arange(lo, hi) - j, degree)
    return out


def _step_accepted(sse_d: float, sse_up: float, jump: int, m: int, d: int) -> bool:
    """F-test: does raising the degree by ``jump`` significantly cut the SSE?"""
    dof2 = m - (d + jump) - 1
    if dof2 <= 0:
        return False
    if sse_up <= _SSE_TINY:
        return True
    f_stat = ((sse_d - sse_up) / jump) * dof2 / sse_up
    return f_stat > _f_critical(jump, dof2)


def adaptive_degree_filter(
    y: np.ndarray, window: int, min_degree: int, max_degree: int
) -> np.ndarray:
    n = len(y)
    half = window // 2
    out = np.empty(n)

    interior = np.arange(half, n - half)
    if interior.size:
        degrees = list(range(min_degree, max_degree + 1))
        ndeg = len(degrees)
        fits = np.empty((ndeg, interior.size))
        sses = np.empty((ndeg, interior.size))
        starts = interior - half
        for di, d in enumerate(degrees):
            fits[di], sses[di] = batched_local_polyfit(
                y, starts, window, d, centers=interior, want_sse=True
            )
        chosen = np.zeros(interior.size, dtype=int)  # index into `degrees`
        active = np.ones(interior.size, dtype=bool)
        while active.any():
            rows = np.flatnonzero(active)
            for r in rows:
                di = chosen[r]
                d = degrees[di]
                if sses[di, r] <= _SSE_TINY or di + 1 >= ndeg:
                    active[r] = False
                    continue
                if _step_accepted(sses[di, r], sses[di + 1, r], 1, window, d):
                    chosen[r] = di + 1
                    continue
                # a symmetric window can hide the d+1 term; probe two ahead
                if di + 2 < ndeg and _step_accepted(
                    sses[di, r], sses[di + 2, r], 2, window, d
                ):
                    chosen[r] = di + 2
                    continue
                active[r] = False
        out[interior] = fits[chosen, np.arange(interior.size)]

    for i in range(min(half, n)):
        for j in (i, n - 1 - i):
            lo, hi = max(0, j - half), min(n, j + half + 1)
            out[j] = _adaptive_window_value(
                y[lo:hi], np.arange(lo, hi) - j, min_degree, max_degree
            )
    return out


def _adaptive_window_value(
    y_win: np.ndarray, offsets: np.ndarray, min_degree: int, max_degree: int
) -> float:
    m = len(y_win)
    max_degree = min(max_degree, m - 1)
    d = min(min_degree, m - 1)
    best_val, best_sse = polyfit_window(y_win, offsets, d)
    while d < max_degree:
        if best_sse <= _SSE_TINY:
            break
        val, sse = polyfit_window(y_win, offsets, d + 1)
        if _step_accepted(best_sse, sse, 1, m, d):
            best_val, best_sse, d = val, sse, d + 1
            continue
        if d + 2 <= max_degree:
            val2, sse2 = polyfit_window(y_win, offsets, d + 2)
            if _step_accepted(best_sse, sse2, 2, m, d):
                best_val, best_sse, d = val2, sse2, d + 2
                continue
        break
    return best_val
