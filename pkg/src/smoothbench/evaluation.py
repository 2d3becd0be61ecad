"""Leave-one-out cross-validation engine and performance indices.

For a series of length T the LOOCV matrix holds one smoothed series per
column: column t is computed from the input with entry t deleted and refilled
by linear interpolation, so it never sees the true x_t.  Three indices are
read off the matrix: the mean absolute error of the diagonal against the
source, the summed per-time sample variance across columns, and an
information criterion on the diagonal residuals penalized by the method's
nominal parameter count (the penalty enters with a minus sign; a switch
restores the textbook plus sign).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData, SeriesTooShort
from .smoothers import SmootherSpec, apply_to_values, linear_operator
from .timeseries import TimeSeries, percentile

ZERO_RESIDUAL_SSE = 1e-300


@dataclass(frozen=True)
class LoocvMatrix:
    """T x T matrix of single-deletion smooths plus the source series."""

    matrix: np.ndarray
    source: TimeSeries

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        t = len(self.source)
        if m.shape != (t, t):
            raise ValueError(f"matrix shape {m.shape} does not match series length {t}")

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class PerformanceIndex:
    """(MAE, VAR, AIC) triple for one calibrated method on one dataset."""

    method: "str | None"
    k: int
    mae: float
    var: float
    aic: float
    zero_residual: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.mae) and self.mae >= 0):
            raise ValueError(f"MAE must be finite and nonnegative, got {self.mae}")
        if not (math.isfinite(self.var) and self.var >= 0):
            raise ValueError(f"VAR must be finite and nonnegative, got {self.var}")
        if math.isnan(self.aic):
            raise ValueError("AIC is NaN")

    def features(self) -> tuple[float, float, float]:
        return (self.var, self.mae, self.aic)


def deletion_imputations(y: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Value that linear imputation puts at slot i when x_i alone is deleted.

    Interior slots interpolate between their neighbours weighted by calendar
    distance; boundary slots copy the nearest remaining value.
    """
    imp = np.empty(len(y))
    imp[0] = y[1]
    imp[-1] = y[-2]
    dt_prev = t[1:-1] - t[:-2]
    dt_next = t[2:] - t[1:-1]
    imp[1:-1] = (y[:-2] * dt_next + y[2:] * dt_prev) / (dt_prev + dt_next)
    return imp


def build_loocv_matrix(spec: SmootherSpec, series: TimeSeries) -> LoocvMatrix:
    """Delete, impute and re-smooth once per sample; columns stack the results.

    Column t is the smoother applied to the series with x_t replaced by its
    deletion imputation.  For the linear catalog methods that is computed as
    a rank-one update of one matrix application (same map, fewer passes); the
    data-adaptive methods are re-run per deletion.
    """
    if not series.is_gap_free():
        raise InsufficientData("LOOCV input must be gap-free; impute first")
    n = len(series)
    if n < 5:
        raise SeriesTooShort(f"LOOCV needs at least 5 samples, got {n}")
    y = series.values()
    imp = deletion_imputations(y, series.day_index())
    operator = linear_operator(spec, n)
    if operator is not None:
        # the direct algorithm gives the base application (bit-faithful for
        # e.g. constants); the operator supplies the per-deletion correction
        base = apply_to_values(spec, y)
        matrix = base[:, None] + operator * (imp - y)[None, :]
    else:
        matrix = np.empty((n, n))
        for i in range(n):
            deleted = y.copy()
            deleted[i] = imp[i]
            matrix[:, i] = apply_to_values(spec, deleted)
    return LoocvMatrix(matrix, series)


def mae(loocv: LoocvMatrix) -> float:
    resid = np.diag(loocv.matrix) - loocv.source.values()
    return float(np.mean(np.abs(resid)))


def var_index(loocv: LoocvMatrix) -> float:
    return float(np.sum(np.var(loocv.matrix, axis=1, ddof=1)))


def aic(loocv: LoocvMatrix, k: int, standard_sign: bool = False) -> float:
    """T*ln(SSE/T) with the 2k penalty subtracted (added when standard_sign)."""
    n = loocv.size
    resid = np.diag(loocv.matrix) - loocv.source.values()
    sse = float(resid @ resid)
    penalty = 2.0 * k
    if sse < ZERO_RESIDUAL_SSE:
        return float("-inf")
    value = n * math.log(sse / n)
    return value + penalty if standard_sign else value - penalty


def confidence_band(
    loocv: LoocvMatrix, level: float = 0.95
) -> tuple[TimeSeries, TimeSeries]:
    """Pointwise percentile envelope of the LOOCV replicates."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    p_lo = (1.0 - level) / 2.0
    p_hi = (1.0 + level) / 2.0
    lower = [percentile(row, p_lo) for row in loocv.matrix]
    upper = [percentile(row, p_hi) for row in loocv.matrix]
    return loocv.source.with_values(lower), loocv.source.with_values(upper)


def evaluate_method(
    spec: SmootherSpec, series: TimeSeries, standard_aic_sign: bool = False
) -> PerformanceIndex:
    """LOOCV build plus all three indices, k taken from the method catalog."""
    loocv = build_loocv_matrix(spec, series)
    aic_value = aic(loocv, spec.k, standard_sign=standard_aic_sign)
    return PerformanceIndex(
        method=spec.method.value,
        k=spec.k,
        mae=mae(loocv),
        var=var_index(loocv),
        aic=aic_value,
        zero_residual=not math.isfinite(aic_value),
    )
