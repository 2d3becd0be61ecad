"""End-to-end benchmark workflow.

normalize (optional) -> impute -> per-method GA calibration -> LOOCV indices
-> K-medoid clustering -> optimal method -> full-series smooth + confidence
band -> report.  Per-method GA seeds are derived by hashing the master seed
with the method code, so dropping one method never perturbs the others.
Methods that fail are excluded from clustering with a warning instead of
aborting the run.
"""
from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, replace
from datetime import date

from . import __version__
from .calibration import GaConfig, calibrate
from .clustering import ClusterResult, cluster_methods
from .errors import (
    EvaluationFailure,
    InputError,
    MissingBiomarker,
    SeriesTooShort,
    SmoothbenchError,
)
from .evaluation import (
    LoocvMatrix,
    PerformanceIndex,
    aic,
    build_loocv_matrix,
    confidence_band,
    mae,
    var_index,
)
from .normalization import REFERENCE_NH4_LOADS, normalize_series
from .regression import LinearFit, fit_linear, join_load_incidence
from .smoothers import (
    PARAM_SPECS,
    MethodId,
    SmootherSpec,
    apply_smoother,
    default_spec,
)
from .timeseries import SurveillanceRecord, TimeSeries, build_series, impute_linear

SIGNAL_KINDS = ("raw", "normalized")


@dataclass(frozen=True)
class PipelineConfig:
    """Settings of one benchmark run (desk-scale GA budget by default)."""

    master_seed: int = 42
    ga_population: int = 30
    ga_iterations: int = 100
    mutation_rate: float = 0.1
    crossover_rate: float = 0.8
    elitism_fraction: float = 0.05
    objective: str = "aic"
    patience: int | None = None
    standardize: bool = True
    standard_aic_sign: bool = False
    band_level: float = 0.95
    methods: tuple[MethodId, ...] = tuple(MethodId)
    f_nh4: float | None = None
    include_loocv: bool = False

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(MethodId(m) for m in self.methods))
        if len(self.methods) < 3:
            raise ValueError("the benchmark needs at least 3 methods to cluster")

    def with_paper_fidelity(self) -> "PipelineConfig":
        return replace(self, ga_population=100, ga_iterations=1000)

    def ga_config(self, seed: int) -> GaConfig:
        return GaConfig(
            population_size=self.ga_population,
            iterations=self.ga_iterations,
            mutation_rate=self.mutation_rate,
            crossover_rate=self.crossover_rate,
            elitism_fraction=self.elitism_fraction,
            seed=seed,
            patience=self.patience,
        )

    def to_dict(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "ga_population": self.ga_population,
            "ga_iterations": self.ga_iterations,
            "mutation_rate": self.mutation_rate,
            "crossover_rate": self.crossover_rate,
            "elitism_fraction": self.elitism_fraction,
            "objective": self.objective,
            "patience": self.patience,
            "standardize": self.standardize,
            "standard_aic_sign": self.standard_aic_sign,
            "band_level": self.band_level,
            "methods": [m.value for m in self.methods],
            "f_nh4": self.f_nh4,
            "include_loocv": self.include_loocv,
        }

    def digest(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


@dataclass(frozen=True)
class MethodOutcome:
    """Calibration + evaluation result (or recorded failure) of one method."""

    method: MethodId
    params: tuple[float, ...] | None = None
    index: PerformanceIndex | None = None
    ga_seed: int | None = None
    ga_evaluations: int = 0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class BenchmarkReport:
    site: str
    signal_kind: str
    timestamps: tuple[date, ...]
    original: tuple
    imputed: tuple[float, ...]
    outcomes: tuple[MethodOutcome, ...]
    cluster: ClusterResult
    optimal_method: MethodId
    optimal_params: tuple[float, ...]
    smoothed: tuple[float, ...]
    band_lower: tuple[float, ...]
    band_upper: tuple[float, ...]
    band_level: float
    regression: LinearFit | None
    provenance: dict
    loocv_optimal: tuple | None = None


def method_seed(master_seed: int, method: MethodId) -> int:
    """Stable per-method GA seed derived from the master seed."""
    digest = hashlib.sha256(f"{master_seed}:{MethodId(method).value}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _signal_series(
    records: list[SurveillanceRecord], signal_kind: str, config: PipelineConfig
) -> TimeSeries:
    if signal_kind == "raw":
        return build_series(records, "c_virus")
    if signal_kind != "normalized":
        raise ValueError(f"signal_kind must be one of {SIGNAL_KINDS}, got {signal_kind!r}")
    if all(r.c_nh4 is None for r in records):
        raise MissingBiomarker("normalized run requested but no NH4 values are present")
    virus = build_series(records, "c_virus")
    nh4 = build_series(records, "c_nh4")
    f_nh4 = config.f_nh4
    if f_nh4 is None:
        ref = REFERENCE_NH4_LOADS.get(records[0].site)
        if ref is None:
            raise InputError(
                "f_nh4 not configured and site has no reference biomarker load"
            )
        f_nh4 = ref.f_bm
    return normalize_series(virus, nh4, f_nh4)


def run_benchmark(
    records: list[SurveillanceRecord], signal_kind: str, config: PipelineConfig | None = None
) -> BenchmarkReport:
    """Execute the full workflow on one signal kind; fully seed-deterministic."""
    config = config or PipelineConfig()
    series = _signal_series(records, signal_kind, config)
    usable = sum(1 for s in series if s.value is not None)
    if usable < 5:
        raise SeriesTooShort(f"only {usable} usable samples after normalization")
    imputed = impute_linear(series)
    n = len(imputed)

    outcomes: list[MethodOutcome] = []
    matrices: dict[MethodId, LoocvMatrix] = {}
    for m in config.methods:
        parametric = bool(PARAM_SPECS[m])
        seed_m = method_seed(config.master_seed, m) if parametric else None
        ga_evals = 0
        try:
            if parametric:
                result = calibrate(
                    m, imputed, config.ga_config(seed_m), objective=config.objective
                )
                spec = result.spec
                ga_evals = result.evaluations
            else:
                spec = default_spec(m)
            loocv = build_loocv_matrix(spec, imputed)
            aic_value = aic(loocv, spec.k, standard_sign=config.standard_aic_sign)
            index = PerformanceIndex(
                method=m.value,
                k=spec.k,
                mae=mae(loocv),
                var=var_index(loocv),
                aic=aic_value,
                zero_residual=aic_value == float("-inf"),
            )
        except SmoothbenchError as exc:
            warnings.warn(f"method {m.value} failed and is excluded: {exc}")
            outcomes.append(
                MethodOutcome(
                    method=m,
                    ga_seed=seed_m,
                    ga_evaluations=ga_evals,
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
            continue
        matrices[m] = loocv
        outcomes.append(
            MethodOutcome(
                method=m,
                params=spec.params,
                index=index,
                ga_seed=seed_m,
                ga_evaluations=ga_evals,
            )
        )

    succeeded = [o for o in outcomes if o.ok]
    if len(succeeded) < 3:
        raise EvaluationFailure(
            f"only {len(succeeded)} methods succeeded; need at least 3 to cluster"
        )
    cluster = cluster_methods(
        [o.index for o in succeeded],
        seed=config.master_seed,
        standardize=config.standardize,
    )
    optimal = cluster.optimal
    optimal_outcome = next(o for o in succeeded if o.method is optimal)
    optimal_spec = SmootherSpec(optimal, optimal_outcome.params)
    smoothed = apply_smoother(optimal_spec, imputed)
    lower, upper = confidence_band(matrices[optimal], config.band_level)

    regression = _regression_fit(records, smoothed)

    per_method_counts = {
        o.method.value: {"ga_evaluations": o.ga_evaluations, "final_loocv_builds": int(o.ok)}
        for o in outcomes
    }
    total_apps = sum(
        (c["ga_evaluations"] + c["final_loocv_builds"]) * n
        for c in per_method_counts.values()
    ) + 1  # the final full-series smooth of the optimal method
    provenance = {
        "tool_version": __version__,
        "master_seed": config.master_seed,
        "config_digest": config.digest(),
        "config": config.to_dict(),
        "method_seeds": {
            o.method.value: o.ga_seed for o in outcomes if o.ga_seed is not None
        },
        "evaluation_counts": {
            "series_length": n,
            "per_method": per_method_counts,
            "smoother_applications": total_apps,
        },
    }

    loocv_payload = None
    if config.include_loocv:
        loocv_payload = tuple(tuple(row) for row in matrices[optimal].matrix)

    return BenchmarkReport(
        site=records[0].site,
        signal_kind=signal_kind,
        timestamps=series.timestamps,
        original=tuple(s.value for s in series),
        imputed=tuple(imputed.values()),
        outcomes=tuple(outcomes),
        cluster=cluster,
        optimal_method=optimal,
        optimal_params=optimal_spec.params,
        smoothed=tuple(smoothed.values()),
        band_lower=tuple(lower.values()),
        band_upper=tuple(upper.values()),
        band_level=config.band_level,
        regression=regression,
        provenance=provenance,
        loocv_optimal=loocv_payload,
    )


def _regression_fit(records, smoothed: TimeSeries) -> LinearFit | None:
    if all(r.incidence_7d is None for r in records):
        return None
    try:
        incidence = build_series(records, "incidence_7d")
        pairs = join_load_incidence(smoothed, incidence, site=records[0].site)
        if len(pairs) < 2:
            return None
        return fit_linear(pairs)
    except SmoothbenchError:
        return None


def run_raw_and_normalized(
    records: list[SurveillanceRecord], config: PipelineConfig | None = None
) -> tuple[BenchmarkReport, BenchmarkReport]:
    """Benchmark the raw signal, then repeat on the NH4-normalized signal."""
    config = config or PipelineConfig()
    raw = run_benchmark(records, "raw", config)
    normalized = run_benchmark(records, "normalized", config)
    return raw, normalized
