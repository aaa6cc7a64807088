from .base import ClosedForms, DiffusionModel, psi_general, psi_of
from .closed_forms import (
    closed_form_delta_linear,
    closed_form_delta_rotated_ou,
    closed_form_epr,
    em_covariance_step,
    stationary_mean_psi_sq,
)
from .free import FreeBrownian
from .linear import LinearOU, lyapunov_stationary
from .manifest import model_from_manifest, model_manifest
from .rotated import (
    ConstantField,
    ModulatedField,
    RotatedGaussian,
    build_drift_from_potential,
    check_example_41_condition,
    example_41_report,
    rotation_generator,
)

__all__ = [
    "ClosedForms",
    "ConstantField",
    "DiffusionModel",
    "FreeBrownian",
    "LinearOU",
    "ModulatedField",
    "RotatedGaussian",
    "build_drift_from_potential",
    "check_example_41_condition",
    "closed_form_delta_linear",
    "closed_form_delta_rotated_ou",
    "closed_form_epr",
    "em_covariance_step",
    "example_41_report",
    "lyapunov_stationary",
    "model_from_manifest",
    "model_manifest",
    "psi_general",
    "psi_of",
    "rotation_generator",
    "stationary_mean_psi_sq",
]
