from .estimators import (
    DeltaEstimate,
    EnsembleStats,
    estimate_delta_batch_means,
    estimate_delta_ensemble,
    estimate_epr,
    variance_with_se,
)
from .fluctuations import (
    CltReport,
    MdpReport,
    MdpRow,
    clt_test,
    gaussian_rate,
    mdp_curve,
    mdp_rate,
    normalized_fluctuation,
)
from .lil import REFERENCE_PATHS, LilCalibration, LilReport, brownian_sups, lil_calibration, lil_normalizer, lil_scan
from .point_start import PointStartReport, point_start_suite

__all__ = [
    "REFERENCE_PATHS",
    "CltReport",
    "DeltaEstimate",
    "EnsembleStats",
    "LilCalibration",
    "LilReport",
    "MdpReport",
    "MdpRow",
    "PointStartReport",
    "brownian_sups",
    "clt_test",
    "estimate_delta_batch_means",
    "estimate_delta_ensemble",
    "estimate_epr",
    "gaussian_rate",
    "lil_calibration",
    "lil_normalizer",
    "lil_scan",
    "mdp_curve",
    "mdp_rate",
    "normalized_fluctuation",
    "point_start_suite",
    "variance_with_se",
]
