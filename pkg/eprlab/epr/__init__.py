from .ensemble import EnsembleRun, EnsembleSettings, simulate_ensemble
from .functional import (
    EprAccumulator,
    EprObserver,
    FunctionalSample,
    TrajectoryRecord,
    accumulate,
    finalize,
    geometric_grid,
    reference_epr,
    sample_from_sums,
)
from .martingale import effective_sample_size, martingale_mean

__all__ = [
    "EnsembleRun",
    "EnsembleSettings",
    "EprAccumulator",
    "EprObserver",
    "FunctionalSample",
    "TrajectoryRecord",
    "accumulate",
    "effective_sample_size",
    "finalize",
    "geometric_grid",
    "martingale_mean",
    "reference_epr",
    "sample_from_sums",
    "simulate_ensemble",
]
