import logging
import math

import numpy as np

from ..errors import AvailabilityError, ConfigurationError
from .base import (
    FD_STEP,
    ClosedForms,
    DiffusionModel,
    apply,
    as_matrix,
    batched_apply,
    central_jacobian,
    check_invertible,
)
from .linear import LinearOU


logger = logging.getLogger(__name__)


def rotation_generator(a, dim=2):
    """a * [[0, 1], [-1, 0]] acting on the first two coordinates."""
    if dim < 2:
        raise ConfigurationError("a rotation needs dimension >= 2", field="model.dim")
    A = np.zeros((dim, dim))
    A[0, 1] = a
    A[1, 0] = -a
    return A


def normalizing_alpha(beta, dim):
    return 0.5 * dim * math.log(beta / math.pi)


def central_divergence(covariance, x, step=FD_STEP):
    x = np.asarray(x, dtype=float)
    dim = x.shape[-1]
    out = np.zeros_like(x)
    for j in range(dim):
        offset = np.zeros(dim)
        offset[j] = step
        forward = np.broadcast_to(covariance(x + offset), x.shape + (dim,))
        backward = np.broadcast_to(covariance(x - offset), x.shape + (dim,))
        out = out + (forward[..., :, j] - backward[..., :, j]) / (2.0 * step)
    return out


class ConstantField:
    kind = "constant"
    derivative = "analytic"

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=float)
        self.dim = self.matrix.shape[0]
        self.a = self.matrix @ self.matrix.T

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.matrix, x.shape[:-1] + (self.dim, self.dim))

    def covariance(self, x):
        return self.a

    def divergence(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def bounds(self):
        eigenvalues = np.linalg.eigvalsh(self.a)
        return {
            "grad_sigma": 0.0,
            "divergence": np.zeros((self.dim, self.dim)),
            "c1": float(eigenvalues[0]),
            "c2": float(eigenvalues[-1]),
        }

    def to_dict(self):
        return {"kind": self.kind, "matrix": self.matrix.tolist()}


class ModulatedField:
    """sigma(x) = (1 + epsilon sin<w, x>) S."""

    kind = "modulated"

    def __init__(self, matrix, epsilon, w, derivative="analytic", fd_step=FD_STEP):
        self.matrix = np.asarray(matrix, dtype=float)
        self.dim = self.matrix.shape[0]
        self.epsilon = float(epsilon)
        self.w = np.asarray(w, dtype=float)
        if not 0.0 <= self.epsilon < 1.0:
            raise ConfigurationError("must lie in [0, 1)", field="model.sigma.epsilon")
        if self.w.shape != (self.dim,):
            raise ConfigurationError(f"expected length {self.dim}", field="model.sigma.w")
        if derivative not in ("analytic", "central"):
            raise ConfigurationError(
                "must be 'analytic' or 'central'", field="model.sigma.derivative"
            )
        self.derivative = derivative
        self.fd_step = fd_step
        self.a = self.matrix @ self.matrix.T
        self._aw = self.a @ self.w

    def _phase(self, x):
        return apply(self.w[None, :], x)[..., 0]

    def factor(self, x):
        return 1.0 + self.epsilon * np.sin(self._phase(x))

    def __call__(self, x):
        return self.factor(x)[..., None, None] * self.matrix

    def covariance(self, x):
        return (self.factor(x) ** 2)[..., None, None] * self.a

    def divergence(self, x):
        if self.derivative == "central":
            return central_divergence(self.covariance, x, self.fd_step)
        phase = self._phase(x)
        scale = 2.0 * (1.0 + self.epsilon * np.sin(phase)) * self.epsilon * np.cos(phase)
        return scale[..., None] * self._aw

    def bounds(self):
        eigenvalues = np.linalg.eigvalsh(self.a)
        eps = self.epsilon
        return {
            "grad_sigma": eps * float(np.linalg.norm(self.w)) * float(np.linalg.norm(self.matrix)),
            "divergence": 2.0 * (1.0 + eps) * eps * np.abs(self.a) * np.abs(self.w)[None, :],
            "c1": (1.0 - eps) ** 2 * float(eigenvalues[0]),
            "c2": (1.0 + eps) ** 2 * float(eigenvalues[-1]),
        }

    def to_dict(self):
        return {
            "kind": self.kind,
            "matrix": self.matrix.tolist(),
            "epsilon": self.epsilon,
            "w": self.w.tolist(),
            "derivative": self.derivative,
        }


def build_drift_from_potential(
    grad_potential,
    b,
    sigma,
    divergence=None,
    covariance=None,
    allow_fallback=True,
    fd_step=FD_STEP,
):
    """B = b + 1/2 sum_ij d_j(sigma sigma^T)_ij e_i + 1/2 sigma sigma^T grad V.

    ``divergence`` is the analytic sum_j d_j (sigma sigma^T)_ij; without it the
    term comes from central differences of sigma sigma^T with step ``fd_step``.
    """
    if covariance is None:

        def covariance(x):
            value = sigma(x)
            return value @ np.swapaxes(value, -1, -2)

    method = "analytic"
    if divergence is None:
        if not allow_fallback:
            raise ConfigurationError(
                "no analytic derivative of sigma sigma^T and the central-difference fallback is disabled",
                field="model.sigma.derivative",
            )
        method = "central-difference"

        def divergence(x):
            return central_divergence(covariance, x, fd_step)

    def drift(x):
        x = np.asarray(x, dtype=float)
        return b(x) + 0.5 * divergence(x) + 0.5 * batched_apply(covariance(x), grad_potential(x))

    drift.divergence = divergence
    drift.covariance = covariance
    drift.divergence_method = method
    return drift


class RotatedGaussian(DiffusionModel):
    """V(x) = alpha - beta |x|^2, b(x) = Ax with A antisymmetric, drift from the potential."""

    family = "rotated-gaussian"
    has_stationary = True

    def __init__(self, beta, A, sigma_field=None, alpha=None, fd_step=FD_STEP):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ConfigurationError(f"expected a square matrix, got shape {A.shape}", field="model.A")
        super().__init__(A.shape[0], fd_step=fd_step)
        self.A = as_matrix(A, self.dim, "model.A")
        if np.max(np.abs(self.A + self.A.T), initial=0.0) > 1e-12:
            raise ConfigurationError("must be antisymmetric", field="model.A")
        self.beta = float(beta)
        if not self.beta > 0.0 or not math.isfinite(self.beta):
            raise ConfigurationError("must be > 0", field="model.beta")
        if alpha is not None:
            logger.warning(
                "alpha=%s ignored; recomputed from beta=%s and d=%s so that e^V dx is a probability measure",
                alpha,
                self.beta,
                self.dim,
            )
        self.alpha = normalizing_alpha(self.beta, self.dim)

        if sigma_field is None:
            sigma_field = ConstantField(np.eye(self.dim))
        if sigma_field.dim != self.dim:
            raise ConfigurationError(f"expected dimension {self.dim}", field="model.sigma")
        check_invertible(sigma_field.matrix, "model.sigma.matrix")
        self.sigma_field = sigma_field
        self.additive = sigma_field.kind == "constant"
        self.jacobian_method = "analytic" if self.additive else "central-difference"
        self._sigma_inv = np.linalg.inv(sigma_field.matrix) if self.additive else None

        analytic = sigma_field.divergence if sigma_field.derivative == "analytic" else None
        self._drift = build_drift_from_potential(
            self.grad_potential,
            self.b,
            sigma_field,
            divergence=analytic,
            covariance=sigma_field.covariance,
            fd_step=fd_step,
        )
        if self._drift.divergence_method != "analytic":
            logger.warning("sigma derivative for %s taken by central differences", self.family)

    def b(self, x):
        return apply(self.A, x)

    def potential(self, x):
        x = np.asarray(x, dtype=float)
        return self.alpha - self.beta * np.sum(x * x, axis=-1)

    def grad_potential(self, x):
        return -2.0 * self.beta * np.asarray(x, dtype=float)

    def drift(self, x):
        return self._drift(x)

    def diffusion(self, x):
        return self.sigma_field(x)

    def covariance(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.sigma_field.covariance(x), x.shape[:-1] + (self.dim, self.dim))

    def diffusion_divergence(self, x):
        return self._drift.divergence(x)

    def noise(self, x, dw):
        if self.additive:
            return apply(self.sigma_field.matrix, dw)
        return batched_apply(self.sigma_field(x), dw)

    def solve_diffusion(self, x, v):
        if self.additive:
            return apply(self._sigma_inv, v)
        return super().solve_diffusion(x, v)

    def diffusion_transpose_apply(self, x, v):
        if self.additive:
            return apply(self.sigma_field.matrix.T, v)
        return super().diffusion_transpose_apply(x, v)

    def grad_log_rho(self, x):
        return self.grad_potential(x)

    def psi(self, x):
        """2 sigma^-1 b + sum_ij d_j(sigma sigma^T)_ij sigma^-1 e_i."""
        x = np.asarray(x, dtype=float)
        return self.solve_diffusion(x, 2.0 * self.b(x) + self.diffusion_divergence(x))

    def drift_jacobian(self, x):
        x = np.asarray(x, dtype=float)
        if self.additive:
            jacobian = self.A - self.beta * self.sigma_field.a
            return np.broadcast_to(jacobian, x.shape[:-1] + (self.dim, self.dim))
        return central_jacobian(self.drift, x, self.fd_step)

    def sample_stationary(self, rng, n):
        return rng.standard_normal((n, self.dim)) * math.sqrt(0.5 / self.beta)

    @property
    def stationary_covariance(self):
        return np.eye(self.dim) * (0.5 / self.beta)

    def sigma_inverse_norm(self):
        if self.additive:
            return float(np.linalg.norm(self._sigma_inv, 2))
        return super().sigma_inverse_norm()

    def as_linear(self):
        if not self.additive:
            raise AvailabilityError("state-dependent sigma has no linear equivalent")
        return LinearOU(self.A - self.beta * self.sigma_field.a, self.sigma_field.matrix)

    def closed_forms(self):
        if not self.additive:
            return ClosedForms(
                available=False,
                reason="state-dependent sigma; use a stationary Monte Carlo reference",
            )
        return self.as_linear().closed_forms()

    def params(self):
        return {
            "beta": self.beta,
            "A": self.A.tolist(),
            "sigma": self.sigma_field.to_dict(),
        }

    @property
    def divergence_method(self):
        return self._drift.divergence_method


def example_41_report(model):
    """Both sides of the confinement condition on a rotated Gaussian, with lambda read as beta.

    The condition is evaluated as beta exceeding the bracketed bound: that is
    the direction in which a larger confining rate implies dissipativity.
    """
    bounds = model.sigma_field.bounds()
    A_norm = float(np.linalg.norm(model.A, 2))
    divergence_term = float(np.sqrt(np.sum(np.sum(bounds["divergence"], axis=1) ** 2)))
    bracket = model.dim * bounds["grad_sigma"] ** 2 + 2.0 * A_norm + divergence_term
    threshold = bracket / (2.0 * bounds["c2"])
    return {
        "lambda": model.beta,
        "lambda_reading": "lambda := beta",
        "threshold": threshold,
        "holds": bool(model.beta > threshold),
        "literal_holds": bool(model.beta < threshold),
        "terms": {
            "d_grad_sigma_sq": model.dim * bounds["grad_sigma"] ** 2,
            "two_A_norm": 2.0 * A_norm,
            "divergence": divergence_term,
        },
        "c1": bounds["c1"],
        "c2": bounds["c2"],
    }


def check_example_41_condition(model):
    return example_41_report(model)["holds"]
