from .dissipativity import DissipativityReport, check_dissipativity, default_burn_in
from .engine import PathSummary, em_step, euler_update, march, reversed_drift, simulate_path
from .laws import InitialLaw
from .noise import (
    DEFAULT_NOISE_BLOCK,
    LANE_AUXILIARY,
    LANE_INCREMENTS,
    LANE_INITIAL,
    NoiseStream,
    PathConfig,
    WienerIncrement,
)

__all__ = [
    "DEFAULT_NOISE_BLOCK",
    "DissipativityReport",
    "InitialLaw",
    "LANE_AUXILIARY",
    "LANE_INCREMENTS",
    "LANE_INITIAL",
    "NoiseStream",
    "PathConfig",
    "PathSummary",
    "WienerIncrement",
    "check_dissipativity",
    "default_burn_in",
    "em_step",
    "euler_update",
    "march",
    "reversed_drift",
    "simulate_path",
]
