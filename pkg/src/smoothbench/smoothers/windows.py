"""Windowing and batched local polynomial fits shared by several smoothers.

All smoothers operate on the integer sample index.  Two window families are
used: *clipped* centered windows (truncated at the boundaries, so their size
shrinks near the edges) and *nearest-neighbour* windows (constant size, shifted
inward at the edges).  The batched fit solves every per-window weighted
least-squares problem in one vectorized call; offsets are rescaled to [-1, 1]
to keep the normal equations well conditioned up to degree 6.
"""
from __future__ import annotations

import numpy as np


def clipped_bounds(n: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    """Start (inclusive) and stop (exclusive) of centered windows clipped to the series."""
    h = w // 2
    idx = np.arange(n)
    return np.maximum(0, idx - h), np.minimum(n, idx + h + 1)


def knn_starts(n: int, k: int) -> np.ndarray:
    """Starts of contiguous k-point neighbourhoods, shifted inward at the edges."""
    if k > n:
        raise ValueError(f"window of {k} points exceeds series length {n}")
    idx = np.arange(n)
    return np.clip(idx - (k - 1) // 2, 0, n - k)


def window_offsets(
    starts: np.ndarray, k: int, centers: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Column indices (m, k) of each window and offsets relative to each center.

    Window row r is centered at ``centers[r]`` (default: index r, one window
    per series point).
    """
    cols = starts[:, None] + np.arange(k)[None, :]
    if centers is None:
        centers = np.arange(len(starts))
    offsets = cols - centers[:, None]
    return cols, offsets


def batched_local_polyfit(
    y: np.ndarray,
    starts: np.ndarray,
    k: int,
    degree: int,
    weights: np.ndarray | None = None,
    centers: np.ndarray | None = None,
    want_hat: bool = False,
    want_sse: bool = False,
):
    """Fit a degree-``degree`` polynomial in every window, evaluated at its center.

    Parameters
    ----------
    y : (n,) series values
    starts : (m,) inclusive window starts (one window per evaluation point)
    k : common window size
    degree : polynomial degree (k and the weight pattern must leave at least
        degree+1 effectively usable points per window)
    weights : optional (m, k) nonnegative least-squares weights
    centers : (m,) series index each window is evaluated at (default 0..m-1,
        i.e. one window per point)
    want_hat : also return the hat-matrix diagonal h_ii (leverage of the
        center observation on its own fitted value)
    want_sse : also return each window's weighted residual sum of squares

    Returns
    -------
    fitted : (m,) fitted value at each center
    hat : (m,) only if ``want_hat``
    sse : (m,) only if ``want_sse``
    """
    if centers is None:
        centers = np.arange(len(starts))
    cols, offsets = window_offsets(starts, k, centers)
    scale = max(1.0, float(np.abs(offsets).max()))
    t = offsets / scale
    powers = np.arange(degree + 1)
    design = t[:, :, None] ** powers[None, None, :]
    w = np.ones_like(t) if weights is None else weights
    yw = y[cols]
    aw = design * w[:, :, None]
    normal = np.einsum("nkp,nkq->npq", aw, design)
    rhs = np.einsum("nkp,nk->np", aw, yw)
    coef = np.linalg.solve(normal, rhs[:, :, None])[:, :, 0]
    fitted = coef[:, 0]  # polynomial evaluated at offset 0
    out = [fitted]
    if want_hat:
        m = len(starts)
        e0 = np.zeros((m, degree + 1))
        e0[:, 0] = 1.0
        ninv_e0 = np.linalg.solve(normal, e0[:, :, None])[:, :, 0]
        center_pos = centers - starts
        w_center = w[np.arange(m), center_pos]
        out.append(ninv_e0[:, 0] * w_center)
    if want_sse:
        resid = yw - np.einsum("nkp,np->nk", design, coef)
        out.append(np.einsum("nk,nk->n", w, resid**2))
    return out[0] if len(out) == 1 else tuple(out)


def local_polyfit_rows(
    starts: np.ndarray,
    k: int,
    degree: int,
    n: int,
    weights: np.ndarray | None = None,
) -> np.ndarray:
    """Equivalent-kernel rows of the local polynomial smoother.

    Returns the dense (n, n) matrix S with ``S @ y`` equal to the batched fit
    of :func:`batched_local_polyfit` over one window per point (the fitted
    value is linear in y for fixed windows and weights).
    """
    cols, offsets = window_offsets(starts, k)
    scale = max(1.0, float(np.abs(offsets).max()))
    t = offsets / scale
    powers = np.arange(degree + 1)
    design = t[:, :, None] ** powers[None, None, :]
    w = np.ones((n, k)) if weights is None else weights
    aw = design * w[:, :, None]
    normal = np.einsum("nkp,nkq->npq", aw, design)
    e0 = np.zeros((n, degree + 1, 1))
    e0[:, 0, 0] = 1.0
    ninv_e0 = np.linalg.solve(normal, e0)[:, :, 0]
    window_rows = np.einsum("np,nkp->nk", ninv_e0, aw)
    out = np.zeros((n, n))
    np.put_along_axis(out, cols, window_rows, axis=1)
    return out


def polyfit_window(y_win: np.ndarray, offsets: np.ndarray, degree: int) -> tuple[float, float]:
    """Single-window unweighted fit: (value at offset 0, residual SSE).

    Used for the irregular truncated windows at the series boundaries where
    batching does not pay off.  The degree is clamped to what the window can
    determine.
    """
    m = len(y_win)
    deg = min(degree, m - 1)
    scale = max(1.0, float(np.abs(offsets).max()))
    design = (offsets / scale)[:, None] ** np.arange(deg + 1)[None, :]
    coef, *_ = np.linalg.lstsq(design, y_win, rcond=None)
    resid = y_win - design @ coef
    return float(coef[0]), float(resid @ resid)
