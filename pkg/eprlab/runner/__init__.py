from .artifacts import ArtifactSet, RunManifest, json_safe
from .experiment import KINDS, ExperimentConfig, load_experiment
from .pipeline import EXIT_ERROR, EXIT_FAIL, EXIT_PASS, RunResult, run_experiment
from .scheduler import ExecutionPlan, replica_scheduler, run_ensemble

__all__ = [
    "ArtifactSet",
    "EXIT_ERROR",
    "EXIT_FAIL",
    "EXIT_PASS",
    "ExecutionPlan",
    "ExperimentConfig",
    "KINDS",
    "RunManifest",
    "RunResult",
    "json_safe",
    "load_experiment",
    "replica_scheduler",
    "run_ensemble",
    "run_experiment",
]
