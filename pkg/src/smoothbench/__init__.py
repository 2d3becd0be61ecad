"""smoothbench: benchmark smoothing methods for wastewater surveillance series."""

__version__ = "0.1.0"

from .smoothers import (  # noqa: F401
    MethodId,
    SmootherSpec,
    apply_smoother,
    default_spec,
    make_spec,
)
from .timeseries import (  # noqa: F401
    MISSING,
    Sample,
    SurveillanceRecord,
    TimeSeries,
    build_series,
    impute_linear,
    percentile,
)


def __getattr__(name):
    # heavier layers are imported lazily so `import smoothbench` stays cheap
    if name in ("evaluate_method", "build_loocv_matrix", "confidence_band"):
        from . import evaluation

        return getattr(evaluation, name)
    if name in ("calibrate", "GaConfig"):
        from . import calibration

        return getattr(calibration, name)
    if name in ("run_benchmark", "run_raw_and_normalized", "PipelineConfig"):
        from . import pipeline

        return getattr(pipeline, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
