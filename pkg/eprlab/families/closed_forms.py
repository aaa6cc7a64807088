import math

import numpy as np

from ..errors import AvailabilityError
from .linear import LinearOU
from .rotated import RotatedGaussian


def _linear_view(model):
    if isinstance(model, LinearOU):
        return model
    if isinstance(model, RotatedGaussian) and model.additive:
        return model.as_linear()
    raise AvailabilityError(
        f"closed forms need a linear-ou or constant-sigma rotated-gaussian model, got {model.family}"
    )


def closed_form_epr(model):
    """R = 1/2 mu(|psi|^2) from the Gaussian trace identity mu(x^T Q x) = tr(Q Sigma)."""
    return 0.5 * _linear_view(model).mean_psi_sq()


def discrete_epr(model, h):
    """Stationary EPR functional of the step-h Euler-Maruyama chain, which carries an O(h) bias against R."""
    return 0.5 * _linear_view(model).discrete_mean_psi_sq(float(h))


def closed_form_delta_linear(model, variant="epr"):
    return _linear_view(model).poisson_delta(variant)


def closed_form_delta_rotated_ou(a, beta):
    """Asymptotic variance of t(R_t - R) for d = 2, sigma = I, b = a J x."""
    a = float(a)
    beta = float(beta)
    if not (math.isfinite(a) and math.isfinite(beta)) or beta <= 0.0:
        raise AvailabilityError(f"rotated-ou needs finite a and beta > 0, got a={a}, beta={beta}")
    return 4.0 * a**2 / beta + 4.0 * a**4 / beta**3


def em_covariance_step(model, covariance, h):
    return _linear_view(model).em_covariance_step(np.asarray(covariance, dtype=float), h)


def stationary_mean_psi_sq(model, n, rng):
    """Monte Carlo mu(|psi|^2) with its standard error, from exact stationary draws."""
    samples = model.sample_stationary(rng, n)
    values = np.sum(model.psi(samples) ** 2, axis=-1)
    return float(np.mean(values)), float(np.std(values, ddof=1) / math.sqrt(n))
